#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fewscale/dataset.hpp"

namespace fewscale {

// Embedding file layout (all little-endian, no padding):
//   magic "EMBD" | version u32 = 1 | dim u32 | count u64 | meta_len u32 |
//   meta (UTF-8 JSON) | count x (sample_id u64 | class_id u32 | dim x f32)
inline constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', 'D'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kFixedHeaderBytes = 4 + 4 + 4 + 8 + 4;

inline constexpr std::size_t record_bytes(std::uint32_t dim) {
    return 8 + 4 + std::size_t{dim} * 4;
}

std::vector<std::byte> encode_embeddings(const EmbeddingDataset& dataset);
EmbeddingDataset decode_embeddings(std::span<const std::byte> bytes);

void write_embeddings(const EmbeddingDataset& dataset, const std::filesystem::path& path);
EmbeddingDataset read_embeddings(const std::filesystem::path& path);

} // namespace fewscale
