// SPDX-License-Identifier: Apache-2.0

#include "apl/tensor/checkpoint.hpp"

#include <map>

#include "apl/common/io.hpp"

namespace apl {
namespace {
constexpr char kMagic[] = "CKPT";
}  // namespace

std::vector<std::uint8_t> encode_checkpoint(std::span<const CheckpointRecord> records) {
  io::ByteWriter w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put_u16(kCheckpointVersion);
  for (const auto& r : records) {
    if (r.name.size() > UINT16_MAX) fail(ErrorCode::kFormat, "checkpoint record name too long");
    if (r.dims.size() > UINT8_MAX) fail(ErrorCode::kFormat, "checkpoint record rank too large");
    std::size_t count = 1;
    for (auto d : r.dims) count *= d;
    if (count != r.values.size()) {
      fail(ErrorCode::kConsistency, "checkpoint record `" + r.name + "` payload does not match its shape");
    }
    w.put_u16(static_cast<std::uint16_t>(r.name.size()));
    w.put_bytes(r.name);
    w.put_u8(static_cast<std::uint8_t>(r.dims.size()));
    for (auto d : r.dims) w.put_u32(d);
    for (float v : r.values) w.put_f32(v);
  }
  return w.bytes();
}

std::vector<CheckpointRecord> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.remaining() < 6) fail(ErrorCode::kFormat, "CKPT header truncated");
  if (r.get_bytes(4) != std::string_view(kMagic, 4)) fail(ErrorCode::kFormat, "bad CKPT magic");
  const auto version = r.get_u16();
  if (version != kCheckpointVersion) fail(ErrorCode::kFormat, "unsupported CKPT version " + std::to_string(version));
  std::vector<CheckpointRecord> records;
  while (!r.at_end()) {
    CheckpointRecord rec;
    rec.name = r.get_bytes(r.get_u16());
    const auto rank = r.get_u8();
    std::size_t count = 1;
    for (std::uint8_t i = 0; i < rank; ++i) {
      rec.dims.push_back(r.get_u32());
      count *= rec.dims.back();
    }
    if (count * 4 > r.remaining()) fail(ErrorCode::kFormat, "CKPT record `" + rec.name + "` truncated");
    rec.values.resize(count);
    for (auto& v : rec.values) v = r.get_f32();
    records.push_back(std::move(rec));
  }
  return records;
}

void write_checkpoint(const std::filesystem::path& path, std::span<const CheckpointRecord> records) {
  io::write_file(path, encode_checkpoint(records));
}

std::vector<CheckpointRecord> read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

template <typename T>
std::vector<CheckpointRecord> to_records(const std::vector<TensorRef<T>>& tensors) {
  std::vector<CheckpointRecord> out;
  out.reserve(tensors.size());
  for (const auto& ref : tensors) {
    CheckpointRecord rec;
    rec.name = ref.name;
    for (auto d : ref.tensor->shape) rec.dims.push_back(static_cast<std::uint32_t>(d));
    rec.values.assign(ref.tensor->data.begin(), ref.tensor->data.end());
    out.push_back(std::move(rec));
  }
  return out;
}

template <typename T>
void load_records(std::span<const CheckpointRecord> records, const std::vector<TensorRef<T>>& tensors) {
  std::map<std::string, const CheckpointRecord*> by_name;
  for (const auto& r : records) {
    if (!by_name.emplace(r.name, &r).second) {
      fail(ErrorCode::kCompatibility, "checkpoint has duplicate record `" + r.name + "`");
    }
  }
  for (const auto& ref : tensors) {
    const auto it = by_name.find(ref.name);
    if (it == by_name.end()) fail(ErrorCode::kCompatibility, "checkpoint lacks tensor `" + ref.name + "`");
    const CheckpointRecord& rec = *it->second;
    std::vector<std::uint32_t> dims;
    for (auto d : ref.tensor->shape) dims.push_back(static_cast<std::uint32_t>(d));
    if (dims != rec.dims) {
      fail(ErrorCode::kCompatibility, "checkpoint tensor `" + ref.name + "` has shape incompatible with the network");
    }
    ref.tensor->data.assign(rec.values.begin(), rec.values.end());
    by_name.erase(it);
  }
  if (!by_name.empty()) {
    fail(ErrorCode::kCompatibility, "checkpoint has tensor `" + by_name.begin()->first + "` unknown to the network");
  }
}

template std::vector<CheckpointRecord> to_records<float>(const std::vector<TensorRef<float>>&);
template std::vector<CheckpointRecord> to_records<double>(const std::vector<TensorRef<double>>&);
template void load_records<float>(std::span<const CheckpointRecord>, const std::vector<TensorRef<float>>&);
template void load_records<double>(std::span<const CheckpointRecord>, const std::vector<TensorRef<double>>&);

}  // namespace apl
