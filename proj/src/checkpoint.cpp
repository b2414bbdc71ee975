#include "mat/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts need byte swaps");

namespace mat::policy {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'T', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_net(const Net& net, std::ostream& out) {
  const auto& cfg = net.config();
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kVersion);
  write_pod<std::uint32_t>(out, cfg.has_log_sigma ? 0 : 1);  // kind: 0 policy, 1 value
  write_pod<std::uint32_t>(out, cfg.n_fingers);
  write_pod<std::uint32_t>(out, cfg.hidden);
  write_pod<std::uint32_t>(out, cfg.xyz_time_pool ? 1 : 0);
  write_pod<std::uint32_t>(out, cfg.dims.history);
  write_pod<std::uint32_t>(out, cfg.dims.cells);
  write_pod<std::uint32_t>(out, cfg.dims.joints);
  write_pod<std::uint32_t>(out, cfg.head_dim);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.tensors().size()));
  for (const auto& t : net.tensors()) {
    write_pod<std::uint32_t>(out, t.rows);
    write_pod<std::uint32_t>(out, t.cols);
  }
  write_pod<std::uint64_t>(out, net.n_params());
  out.write(reinterpret_cast<const char*>(net.params().data()),
            static_cast<std::streamsize>(sizeof(double) * net.n_params()));
  if (!out) throw CheckpointError("checkpoint: write failed");
}

Net load_net(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("checkpoint: bad magic");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) throw CheckpointError("checkpoint: unsupported version");

  const auto kind = read_pod<std::uint32_t>(in);
  const auto n_fingers = read_pod<std::uint32_t>(in);
  const auto hidden = read_pod<std::uint32_t>(in);
  const auto pool = read_pod<std::uint32_t>(in);
  obs::ObsDims dims;
  dims.history = static_cast<int>(read_pod<std::uint32_t>(in));
  dims.cells = static_cast<int>(read_pod<std::uint32_t>(in));
  dims.joints = static_cast<int>(read_pod<std::uint32_t>(in));
  const auto head_dim = read_pod<std::uint32_t>(in);

  Net net = kind == 0 ? Net::make_policy(dims, static_cast<int>(n_fingers),
                                         static_cast<int>(hidden), pool != 0)
                      : Net::make_value(dims, static_cast<int>(hidden), pool != 0);
  if (net.config().head_dim != static_cast<int>(head_dim))
    throw CheckpointError("checkpoint: head dimension mismatch");

  const auto n_tensors = read_pod<std::uint32_t>(in);
  if (n_tensors != net.tensors().size()) throw CheckpointError("checkpoint: tensor count mismatch");
  for (const auto& t : net.tensors()) {
    const auto rows = read_pod<std::uint32_t>(in);
    const auto cols = read_pod<std::uint32_t>(in);
    if (static_cast<int>(rows) != t.rows || static_cast<int>(cols) != t.cols)
      throw CheckpointError("checkpoint: layer shape mismatch");
  }
  const auto n_params = read_pod<std::uint64_t>(in);
  if (n_params != net.n_params()) throw CheckpointError("checkpoint: parameter count mismatch");
  in.read(reinterpret_cast<char*>(net.params().data()),
          static_cast<std::streamsize>(sizeof(double) * n_params));
  if (!in) throw CheckpointError("checkpoint: truncated parameter array");
  return net;
}

void save_net_file(const Net& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot open for write: " + path);
  save_net(net, out);
}

Net load_net_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open: " + path);
  return load_net(in);
}

}  // namespace mat::policy
