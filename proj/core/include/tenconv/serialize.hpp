#pragma once

#include <cstdint>
#include <iosfwd>

#include "tenconv/tensor.hpp"

namespace tenconv {

// Flat binary tensor record, little-endian:
//   u32 rank, u32 extents[rank], f64 data[numel]
// Data is always stored as f64; single-precision builds cast on load.

void write_tensor(std::ostream& out, const Tensor& t);
/// Throws FormatError on a short or malformed record.
Tensor read_tensor(std::istream& in);

void write_u16(std::ostream& out, std::uint16_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
std::uint16_t read_u16(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);

}  // namespace tenconv
