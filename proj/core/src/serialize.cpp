#include "tenconv/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "tenconv/error.hpp"

namespace tenconv {

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError("unexpected end of stream");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
  return v;
}

constexpr std::uint32_t kMaxRank = 64;

}  // namespace

void write_u16(std::ostream& out, std::uint16_t v) { write_le(out, v); }
void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
std::uint16_t read_u16(std::istream& in) { return read_le<std::uint16_t>(in); }
std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t>(in); }

void write_tensor(std::ostream& out, const Tensor& t) {
  write_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape().dims()) write_u32(out, static_cast<std::uint32_t>(d));
  for (Real v : t.data()) write_u64(out, std::bit_cast<std::uint64_t>(static_cast<double>(v)));
}

Tensor read_tensor(std::istream& in) {
  const std::uint32_t rank = read_u32(in);
  if (rank > kMaxRank) throw FormatError("tensor rank " + std::to_string(rank) + " is implausible");
  std::vector<std::size_t> dims(rank);
  for (auto& d : dims) {
    d = read_u32(in);
    if (d == 0) throw FormatError("zero extent in tensor record");
  }
  Shape shape(std::move(dims));
  if (shape.numel() > (std::size_t{1} << 32)) throw FormatError("tensor record of " + shape.str() + " is implausible");
  std::vector<Real> data(shape.numel());
  for (auto& v : data) v = static_cast<Real>(std::bit_cast<double>(read_u64(in)));
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace tenconv
