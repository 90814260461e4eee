#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "spikescan/tensor.hpp"

namespace spikescan {

// Named tensors in the SPKN1 binary layout (all integers little-endian):
//   "SPKN1"                      5 magic bytes
//   repeated until end of file:
//     u32 name_length, name bytes (UTF-8, no terminator)
//     u32 rank (0..3), rank x u64 extents
//     numel x f64 payload (IEEE-754 binary64, little-endian)
// See docs/formats.md.
using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

std::string encode_tensors(const NamedTensors& tensors);
// Throws FormatError on a bad magic, truncated record or rank > 3.
NamedTensors decode_tensors(const std::string& bytes);

// Writes atomically (temp file then rename). Throws IoError.
void save_tensors(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_tensors(const std::filesystem::path& path);

// Looks up `name`; throws FormatError when absent.
const Tensor& find_tensor(const NamedTensors& tensors, const std::string& name);

// Whole-file helpers shared by every writer in the library.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace spikescan
