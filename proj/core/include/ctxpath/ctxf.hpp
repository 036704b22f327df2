#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ctxpath/features.hpp"

namespace ctxpath {

// CTXF feature store, little-endian:
//   "CTXF" | u32 version | u32 D | u32 record_count
//   per record: u16 id_len | id (UTF-8) | u8 augmentation | u16 rows | u16 cols
//               | rows*cols*D float32, row-major patch order
namespace ctxf {
inline constexpr std::uint8_t kMagic[4] = {0x43, 0x54, 0x58, 0x46};
inline constexpr std::uint32_t kVersion = 1;
}  // namespace ctxf

std::vector<std::uint8_t> encode_store(std::span<const FeatureStoreEntry> entries);
std::vector<FeatureStoreEntry> decode_store(std::span<const std::uint8_t> bytes);

void store_write(const std::filesystem::path& path, std::span<const FeatureStoreEntry> entries);
std::vector<FeatureStoreEntry> store_read(const std::filesystem::path& path);

}  // namespace ctxpath
