#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "semrl/neural/tensor.hpp"

namespace semrl::nn {

inline constexpr char kCheckpointMagic[8] = {'S', 'E', 'M', 'R', 'L', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout (little-endian): magic[8], u32 version, u64 vocabulary hash,
// u32 record count, then per record: u32 name length, name bytes, u32 rank,
// rank x u32 dims, numel x f32 values.
template <typename T>
void save_checkpoint(std::ostream& out, const std::vector<Tensor<T>>& params, std::uint64_t vocab_hash);
template <typename T>
void save_checkpoint(const std::filesystem::path& path, const std::vector<Tensor<T>>& params,
                     std::uint64_t vocab_hash);

// Loads into `params` in place; names, shapes and the vocabulary hash must all
// match, otherwise CorruptionError.
template <typename T>
void load_checkpoint(std::istream& in, std::vector<Tensor<T>>& params, std::uint64_t vocab_hash);
template <typename T>
void load_checkpoint(const std::filesystem::path& path, std::vector<Tensor<T>>& params, std::uint64_t vocab_hash);

// Plain-text listing: one "name shape count" line per parameter plus a total.
template <typename T>
void write_manifest(std::ostream& out, const std::vector<Tensor<T>>& params);

}  // namespace semrl::nn
