#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayfl {

/// Malformed IDX input; `offset` is the byte where parsing failed.
class IdxError : public std::runtime_error {
 public:
  IdxError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image
};

/// Big-endian header: magic 0x00000803, count, rows, cols, then unsigned bytes.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);

/// Big-endian header: magic 0x00000801, count, then one byte per label.
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Whole file as bytes; throws std::ios_base::failure when it cannot be read.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Averages factor x factor blocks; trailing rows/columns that do not fill a
/// block are dropped. factor 1 copies.
IdxImages downsample(const IdxImages& images, std::size_t factor);

}  // namespace relayfl
