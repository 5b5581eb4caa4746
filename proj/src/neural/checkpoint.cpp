#include "semrl/neural/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "semrl/core/error.hpp"

namespace semrl::nn {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename U>
void put(std::ostream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get(std::istream& in) {
  U v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(U))) throw CorruptionError("checkpoint truncated");
  return v;
}

}  // namespace

template <typename T>
void save_checkpoint(std::ostream& out, const std::vector<Tensor<T>>& params, std::uint64_t vocab_hash) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, vocab_hash);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name().size()));
    out.write(p.name().data(), static_cast<std::streamsize>(p.name().size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.rank()));
    for (int d : p.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (T v : p.data()) put<float>(out, static_cast<float>(v));
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const std::vector<Tensor<T>>& params,
                     std::uint64_t vocab_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  save_checkpoint(out, params, vocab_hash);
}

template <typename T>
void load_checkpoint(std::istream& in, std::vector<Tensor<T>>& params, std::uint64_t vocab_hash) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw CorruptionError("not a checkpoint (bad magic)");
  }
  if (const auto v = get<std::uint32_t>(in); v != kCheckpointVersion) {
    throw CorruptionError("unsupported checkpoint version " + std::to_string(v));
  }
  if (get<std::uint64_t>(in) != vocab_hash) throw CorruptionError("checkpoint vocabulary hash mismatch");
  if (get<std::uint32_t>(in) != params.size()) throw CorruptionError("checkpoint parameter count mismatch");
  for (auto& p : params) {
    const auto n = get<std::uint32_t>(in);
    if (n > 4096) throw CorruptionError("checkpoint name too long");
    std::string name(n, '\0');
    if (!in.read(name.data(), n)) throw CorruptionError("checkpoint truncated");
    if (name != p.name()) throw CorruptionError("checkpoint has '" + name + "' where '" + p.name() + "' was expected");
    const auto rank = get<std::uint32_t>(in);
    Shape shape;
    for (std::uint32_t i = 0; i < rank && i < 8; ++i) shape.push_back(static_cast<int>(get<std::uint32_t>(in)));
    if (shape != p.shape()) {
      throw CorruptionError("checkpoint shape " + shape_str(shape) + " for " + name + ", expected " +
                            shape_str(p.shape()));
    }
    for (auto& v : p.data()) v = static_cast<T>(get<float>(in));
  }
}

template <typename T>
void load_checkpoint(const std::filesystem::path& path, std::vector<Tensor<T>>& params, std::uint64_t vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptionError("cannot open checkpoint " + path.string());
  load_checkpoint(in, params, vocab_hash);
}

template <typename T>
void write_manifest(std::ostream& out, const std::vector<Tensor<T>>& params) {
  std::size_t total = 0;
  for (const auto& p : params) {
    out << p.name() << ' ' << shape_str(p.shape()) << ' ' << p.size() << '\n';
    total += p.size();
  }
  out << "total " << total << '\n';
}

#define SEMRL_INSTANTIATE_CKPT(T)                                                                              \
  template void save_checkpoint(std::ostream&, const std::vector<Tensor<T>>&, std::uint64_t);                  \
  template void save_checkpoint(const std::filesystem::path&, const std::vector<Tensor<T>>&, std::uint64_t);   \
  template void load_checkpoint(std::istream&, std::vector<Tensor<T>>&, std::uint64_t);                        \
  template void load_checkpoint(const std::filesystem::path&, std::vector<Tensor<T>>&, std::uint64_t);         \
  template void write_manifest(std::ostream&, const std::vector<Tensor<T>>&);

SEMRL_INSTANTIATE_CKPT(float)
SEMRL_INSTANTIATE_CKPT(double)

}  // namespace semrl::nn
