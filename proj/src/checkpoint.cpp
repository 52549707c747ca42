#include "genomotif/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "genomotif/binary_io.hpp"

namespace genomotif::nn {

namespace {

void write_block(std::ostream& out, const std::vector<std::vector<float>>& tensors) {
  write_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    write_u32(out, static_cast<std::uint32_t>(t.size()));
    for (float v : t) write_f32(out, v);
  }
}

std::vector<std::vector<float>> read_block(std::istream& in) {
  const auto count = read_u32(in);
  if (count > (1u << 20)) throw Error(ErrorCode::BadFormat, "implausible tensor count in checkpoint");
  std::vector<std::vector<float>> tensors(count);
  for (auto& t : tensors) {
    const auto n = read_u32(in);
    if (n > (1u << 28)) throw Error(ErrorCode::BadFormat, "implausible tensor size in checkpoint");
    t.resize(n);
    for (auto& v : t) v = read_f32(in);
  }
  return tensors;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out.write("GMNN", 4);
  write_u32(out, kCheckpointVersion);
  const auto& s = c.spec;
  for (int v : {s.input_channels, s.input_height, s.input_width, s.stem_channels, s.stem_kernel, s.stem_stride})
    write_u32(out, static_cast<std::uint32_t>(v));
  write_u32(out, static_cast<std::uint32_t>(s.blocks.size()));
  for (const auto& b : s.blocks) {
    write_u32(out, static_cast<std::uint32_t>(b.layers));
    write_u32(out, static_cast<std::uint32_t>(b.growth));
  }
  write_f32(out, static_cast<float>(s.compression));
  write_f32(out, static_cast<float>(s.dropout));
  write_u32(out, static_cast<std::uint32_t>(s.classes));

  write_u64(out, c.state.model_seed);
  write_u64(out, c.state.step);
  write_u32(out, c.state.epoch);
  write_f32(out, c.state.best_val_accuracy);
  write_f32(out, static_cast<float>(c.state.optimizer.learning_rate));
  write_f32(out, static_cast<float>(c.state.optimizer.rho));
  write_f32(out, static_cast<float>(c.state.optimizer.epsilon));

  write_block(out, c.params);
  write_block(out, c.buffers);
  write_block(out, c.optimizer);
  if (!out) throw Error(ErrorCode::Io, "checkpoint write failed");
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "GMNN", 4) != 0)
    throw Error(ErrorCode::BadFormat, "not a GMNN checkpoint");
  const auto version = read_u32(in);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::BadFormat, "unsupported checkpoint version " + std::to_string(version));

  Checkpoint c;
  auto& s = c.spec;
  for (int* v : {&s.input_channels, &s.input_height, &s.input_width, &s.stem_channels, &s.stem_kernel,
                 &s.stem_stride})
    *v = static_cast<int>(read_u32(in));
  const auto blocks = read_u32(in);
  if (blocks > 64) throw Error(ErrorCode::BadFormat, "implausible block count in checkpoint");
  s.blocks.resize(blocks);
  for (auto& b : s.blocks) {
    b.layers = static_cast<int>(read_u32(in));
    b.growth = static_cast<int>(read_u32(in));
  }
  s.compression = read_f32(in);
  s.dropout = read_f32(in);
  s.classes = static_cast<int>(read_u32(in));

  c.state.model_seed = read_u64(in);
  c.state.step = read_u64(in);
  c.state.epoch = read_u32(in);
  c.state.best_val_accuracy = read_f32(in);
  c.state.optimizer.learning_rate = read_f32(in);
  c.state.optimizer.rho = read_f32(in);
  c.state.optimizer.epsilon = read_f32(in);

  c.params = read_block(in);
  c.buffers = read_block(in);
  c.optimizer = read_block(in);
  s.validate();
  return c;
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    return read_checkpoint(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace genomotif::nn
