#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "relayfl/fl_data.hpp"
#include "relayfl/idx.hpp"

using namespace relayfl;

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(std::uint8_t(v >> shift));
}

std::vector<std::uint8_t> image_file(std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                                     std::uint32_t magic = 0x00000803) {
  std::vector<std::uint8_t> b;
  put_be32(b, magic);
  put_be32(b, count);
  put_be32(b, rows);
  put_be32(b, cols);
  for (std::uint32_t i = 0; i < count * rows * cols; ++i) b.push_back(std::uint8_t(i));
  return b;
}

std::vector<std::uint8_t> label_file(std::uint32_t count) {
  std::vector<std::uint8_t> b;
  put_be32(b, 0x00000801);
  put_be32(b, count);
  for (std::uint32_t i = 0; i < count; ++i) b.push_back(std::uint8_t(i % 10));
  return b;
}

std::filesystem::path write_temp(const std::string& name, const std::vector<std::uint8_t>& bytes) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  return path;
}

std::size_t error_offset(auto&& parse) {
  try {
    parse();
  } catch (const IdxError& e) {
    return e.offset();
  }
  FAIL("expected an IdxError");
  return 0;
}

}  // namespace

TEST_CASE("image header 00 00 08 03 is accepted") {
  const auto bytes = image_file(2, 3, 4);
  REQUIRE(bytes[0] == 0x00);
  REQUIRE(bytes[3] == 0x03);
  const IdxImages img = parse_idx_images(bytes);
  CHECK(img.count == 2);
  CHECK(img.rows == 3);
  CHECK(img.cols == 4);
  CHECK(img.pixels.size() == 24);
  CHECK(img.pixels[23] == 23);
}

TEST_CASE("wrong magic is rejected at the differing byte") {
  const auto bytes = image_file(1, 2, 2, 0x00000802);
  CHECK(error_offset([&] { parse_idx_images(bytes); }) == 3);
  CHECK(error_offset([&] { parse_idx_labels(image_file(1, 1, 1)); }) == 3);
  auto swapped = image_file(1, 1, 1, 0x03080000);
  CHECK(error_offset([&] { parse_idx_images(swapped); }) == 0);
  try {
    parse_idx_images(bytes);
  } catch (const IdxError& e) {
    CHECK(std::string(e.what()).find("at byte 3") != std::string::npos);
  }
}

TEST_CASE("length errors carry the byte offset") {
  auto bytes = image_file(3, 2, 2);
  bytes.pop_back();
  CHECK(error_offset([&] { parse_idx_images(bytes); }) == bytes.size());
  bytes = image_file(3, 2, 2);
  bytes.push_back(0);
  CHECK(error_offset([&] { parse_idx_images(bytes); }) == 16 + 12);
  const std::vector<std::uint8_t> stub{0, 0, 8, 3, 0, 0};
  CHECK(error_offset([&] { parse_idx_images(stub); }) == 6);
  // a count that would overflow count * rows * cols
  std::vector<std::uint8_t> huge;
  put_be32(huge, 0x00000803);
  put_be32(huge, 0xffffffff);
  put_be32(huge, 0xffff);
  put_be32(huge, 0xffff);
  CHECK_THROWS_AS(parse_idx_images(huge), IdxError);
}

TEST_CASE("labels parse") {
  const auto labels = parse_idx_labels(label_file(12));
  REQUIRE(labels.size() == 12);
  CHECK(labels[11] == 1);
  auto short_file = label_file(12);
  short_file.resize(15);
  CHECK(error_offset([&] { parse_idx_labels(short_file); }) == 15);
}

TEST_CASE("downsampling averages blocks with rounding") {
  IdxImages img;
  img.count = 1;
  img.rows = 3;
  img.cols = 4;
  img.pixels = {1, 2, 10, 20,  //
                3, 5, 30, 41,  //
                9, 9, 9, 9};
  const IdxImages out = downsample(img, 2);
  CHECK(out.rows == 1);
  CHECK(out.cols == 2);
  // (1+2+3+5)/4 = 2.75 -> 3; (10+20+30+41)/4 = 25.25 -> 25
  CHECK(out.pixels == std::vector<std::uint8_t>{3, 25});
  CHECK(downsample(img, 1).pixels == img.pixels);
  CHECK_THROWS_AS(downsample(img, 0), std::invalid_argument);
}

TEST_CASE("IDX dataset splits disjointly and takes the test set from the tail") {
  // 1x1 images whose only pixel is the sample index
  const auto images = write_temp("relayfl_test_images.idx", image_file(40, 1, 1));
  const auto labels = write_temp("relayfl_test_labels.idx", label_file(40));
  DataConfig cfg;
  cfg.source = "idx";
  cfg.train_images = images.string();
  cfg.train_labels = labels.string();
  cfg.n_devices = 3;
  cfg.samples_per_device = 5;
  cfg.test_samples = 10;
  const Dataset data = load_dataset(cfg);
  std::set<long> seen;
  for (const Samples& d : data.devices) {
    CHECK(d.size() == 5);
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) seen.insert(std::lround(d.features(0, j) * 255));
  }
  for (Eigen::Index j = 0; j < data.test.features.cols(); ++j) seen.insert(std::lround(data.test.features(0, j) * 255));
  CHECK(seen.size() == 25);
  for (std::size_t j = 0; j < data.devices[0].size(); ++j) {
    CHECK(data.devices[0].labels[j] == std::lround(data.devices[0].features(0, Eigen::Index(j)) * 255) % 10);
  }

  cfg.samples_per_device = 20;
  CHECK_THROWS(load_dataset(cfg));
  cfg.train_images = "/nonexistent/images.idx";
  CHECK_THROWS_AS(load_dataset(cfg), std::ios_base::failure);
  std::filesystem::remove(images);
  std::filesystem::remove(labels);
}
