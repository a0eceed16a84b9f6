#pragma once

#include <cstdint>
#include <string>

#include "kglp/kgem.hpp"
#include "kglp/twigi.hpp"

namespace kglp {

// Binary checkpoints: 8-byte magic, u32 format version, u32 model family,
// family-specific header, then little-endian float64 parameter rows. Every
// checkpoint embeds the training seed and the config hash.

inline constexpr char kCheckpointMagic[8] = {'K', 'G', 'L', 'P', 'C', 'K', 'P', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kFamilyKgem = 1;
inline constexpr std::uint32_t kFamilyTwigI = 2;

void save_kgem_checkpoint(const std::string& path, const KgemModel& model,
                          std::uint64_t config_hash);
KgemModel load_kgem_checkpoint(const std::string& path, std::uint64_t* config_hash = nullptr);

void save_twigi_checkpoint(const std::string& path, const TwigIModel& model,
                           std::uint64_t config_hash);
TwigIModel load_twigi_checkpoint(const std::string& path, std::uint64_t* config_hash = nullptr);

} // namespace kglp
