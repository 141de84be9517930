#include "tenconv/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tenconv/error.hpp"
#include "tenconv/serialize.hpp"

namespace tenconv {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'N', 'N'};

struct Contents {
  ModelSpec spec;
  std::vector<Tensor> tensors;
};

Contents parse(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open checkpoint " + path);
  std::stringstream in;
  in << file.rdbuf();
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || !std::equal(magic, magic + 4, kMagic)) throw FormatError(path + ": not a checkpoint (bad magic)");
  const std::uint16_t version = read_u16(in);
  if (version != kCheckpointVersion) {
    throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t digest = read_u64(in);
  const std::uint32_t length = read_u32(in);
  std::string json(length, '\0');
  in.read(json.data(), length);
  if (static_cast<std::uint32_t>(in.gcount()) != length) throw FormatError(path + ": truncated model description");
  Contents c;
  try {
    c.spec = spec_from_json(json);
  } catch (const IncompatibleSpec& e) {
    throw FormatError(path + ": " + e.what());
  }
  if (spec_digest(c.spec) != digest) throw FormatError(path + ": model description digest mismatch");
  const std::uint32_t count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) c.tensors.push_back(read_tensor(in));
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path + ": trailing bytes after last tensor");
  return c;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  std::ostringstream out;
  out.write(kMagic, 4);
  write_u16(out, kCheckpointVersion);
  write_u64(out, spec_digest(model.spec()));
  const std::string json = to_json(model.spec());
  write_u32(out, static_cast<std::uint32_t>(json.size()));
  out.write(json.data(), static_cast<std::streamsize>(json.size()));
  write_u32(out, static_cast<std::uint32_t>(model.parameters().size()));
  for (const Parameter* p : model.parameters()) write_tensor(out, p->value);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write checkpoint " + path);
  const std::string bytes = out.str();
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("failed writing checkpoint " + path);
}

std::unique_ptr<Model> load_checkpoint(const std::string& path) {
  Contents c = parse(path);
  auto model = std::make_unique<Model>(c.spec);
  model->restore(c.tensors);
  return model;
}

void load_checkpoint_into(Model& model, const std::string& path) {
  Contents c = parse(path);
  if (!(c.spec == model.spec())) {
    throw ShapeMismatch(path + " holds '" + c.spec.name + "', which differs from '" + model.spec().name + "'");
  }
  model.restore(c.tensors);
}

}  // namespace tenconv
