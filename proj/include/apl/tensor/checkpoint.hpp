// SPDX-License-Identifier: Apache-2.0

// "CKPT" parameter files: magic, u16 version, then records of
// (u16 name length, name bytes, u8 rank, u32 dims, float32 LE payload) until
// end of file.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "apl/tensor/tensor.hpp"

namespace apl {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointRecord {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

std::vector<std::uint8_t> encode_checkpoint(std::span<const CheckpointRecord> records);
std::vector<CheckpointRecord> decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, std::span<const CheckpointRecord> records);
std::vector<CheckpointRecord> read_checkpoint(const std::filesystem::path& path);

/// Snapshot of tensors as float32 records, in the given order.
template <typename T>
std::vector<CheckpointRecord> to_records(const std::vector<TensorRef<T>>& tensors);

/// Copies records into tensors by name. Every tensor must be present with a
/// matching shape and no record may be left over; otherwise kCompatibility.
template <typename T>
void load_records(std::span<const CheckpointRecord> records, const std::vector<TensorRef<T>>& tensors);

}  // namespace apl
