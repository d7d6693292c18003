#include "relayfl/idx.hpp"

#include <fstream>
#include <iterator>

namespace relayfl {

IdxError::IdxError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (bytes.size() < offset + 4) throw IdxError("truncated header", bytes.size());
  return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
         (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

void expect_magic(std::span<const std::uint8_t> bytes, std::uint32_t magic) {
  const std::uint32_t got = read_be32(bytes, 0);
  if (got != magic) {
    // First differing byte of the 4-byte magic.
    std::size_t at = 0;
    while (at < 3 && bytes[at] == ((magic >> (24 - 8 * at)) & 0xff)) ++at;
    throw IdxError("bad IDX magic", at);
  }
}

void expect_payload(std::span<const std::uint8_t> bytes, std::size_t header, std::size_t payload) {
  if (bytes.size() < header + payload) throw IdxError("payload shorter than header declares", bytes.size());
  if (bytes.size() > header + payload) throw IdxError("trailing bytes after payload", header + payload);
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, kIdxImageMagic);
  IdxImages out;
  out.count = read_be32(bytes, 4);
  out.rows = read_be32(bytes, 8);
  out.cols = read_be32(bytes, 12);
  const std::size_t frame = out.rows * out.cols;
  if (frame != 0 && out.count > bytes.size() / frame) throw IdxError("payload shorter than header declares", bytes.size());
  const std::size_t payload = out.count * frame;
  expect_payload(bytes, 16, payload);
  out.pixels.assign(bytes.begin() + 16, bytes.end());
  return out;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, kIdxLabelMagic);
  const std::size_t count = read_be32(bytes, 4);
  expect_payload(bytes, 8, count);
  return {bytes.begin() + 8, bytes.end()};
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

IdxImages downsample(const IdxImages& images, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("downsample factor must be positive");
  if (factor == 1) return images;
  IdxImages out;
  out.count = images.count;
  out.rows = images.rows / factor;
  out.cols = images.cols / factor;
  out.pixels.resize(out.count * out.rows * out.cols);
  const std::size_t in_size = images.rows * images.cols;
  const std::size_t area = factor * factor;
  for (std::size_t i = 0; i < images.count; ++i) {
    const std::uint8_t* src = images.pixels.data() + i * in_size;
    for (std::size_t r = 0; r < out.rows; ++r) {
      for (std::size_t c = 0; c < out.cols; ++c) {
        std::size_t sum = 0;
        for (std::size_t dr = 0; dr < factor; ++dr) {
          for (std::size_t dc = 0; dc < factor; ++dc) sum += src[(r * factor + dr) * images.cols + c * factor + dc];
        }
        out.pixels[(i * out.rows + r) * out.cols + c] = std::uint8_t((sum + area / 2) / area);
      }
    }
  }
  return out;
}

}  // namespace relayfl
