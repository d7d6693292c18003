#include "relayfl/fl_data.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "relayfl/idx.hpp"

namespace relayfl {

namespace {

constexpr std::size_t kSide = 8;

// Coarse 8x8 glyphs. '#' is ink.
constexpr std::array<std::array<std::string_view, kSide>, 10> kGlyphs{{
    {"..####..", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", "..####.."},
    {"...##...", "..###...", ".####...", "...##...", "...##...", "...##...", "...##...", ".######."},
    {"..####..", ".##..##.", ".....##.", "....##..", "...##...", "..##....", ".##.....", ".######."},
    {"..####..", ".##..##.", ".....##.", "...###..", ".....##.", ".....##.", ".##..##.", "..####.."},
    {"....##..", "...###..", "..####..", ".##.##..", "##..##..", "#######.", "....##..", "....##.."},
    {".######.", ".##.....", ".##.....", ".#####..", ".....##.", ".....##.", ".##..##.", "..####.."},
    {"..####..", ".##.....", ".##.....", ".#####..", ".##..##.", ".##..##.", ".##..##.", "..####.."},
    {".######.", ".....##.", "....##..", "....##..", "...##...", "...##...", "..##....", "..##...."},
    {"..####..", ".##..##.", ".##..##.", "..####..", ".##..##.", ".##..##.", ".##..##.", "..####.."},
    {"..####..", ".##..##.", ".##..##.", "..#####.", ".....##.", ".....##.", "....##..", "..###..."},
}};

// Separable [1 2 1] / 4 blur with edge replication.
std::vector<double> blur(const std::vector<double>& img) {
  auto at = [&](const std::vector<double>& v, std::ptrdiff_t r, std::ptrdiff_t c) {
    r = std::clamp<std::ptrdiff_t>(r, 0, kSide - 1);
    c = std::clamp<std::ptrdiff_t>(c, 0, kSide - 1);
    return v[std::size_t(r) * kSide + std::size_t(c)];
  };
  std::vector<double> tmp(img.size()), out(img.size());
  for (std::ptrdiff_t r = 0; r < std::ptrdiff_t(kSide); ++r) {
    for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(kSide); ++c) {
      tmp[std::size_t(r) * kSide + std::size_t(c)] = 0.25 * at(img, r, c - 1) + 0.5 * at(img, r, c) + 0.25 * at(img, r, c + 1);
    }
  }
  for (std::ptrdiff_t r = 0; r < std::ptrdiff_t(kSide); ++r) {
    for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(kSide); ++c) {
      out[std::size_t(r) * kSide + std::size_t(c)] = 0.25 * at(tmp, r - 1, c) + 0.5 * at(tmp, r, c) + 0.25 * at(tmp, r + 1, c);
    }
  }
  return out;
}

// Fisher-Yates driven by our generator, so the permutation is portable.
void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

Samples gather(const Eigen::MatrixXd& x, const std::vector<int>& y, std::span<const std::size_t> idx) {
  Samples s;
  s.features.resize(x.rows(), Eigen::Index(idx.size()));
  s.labels.reserve(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    s.features.col(Eigen::Index(j)) = x.col(Eigen::Index(idx[j]));
    s.labels.push_back(y[idx[j]]);
  }
  return s;
}

// Splits the first N * D_n entries of `order` across devices.
std::vector<Samples> partition(const Eigen::MatrixXd& x, const std::vector<int>& y, std::vector<std::size_t> order,
                               const DataConfig& cfg) {
  const std::size_t n_train = cfg.n_devices * cfg.samples_per_device;
  order.resize(n_train);
  if (cfg.label_skew) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  }
  std::vector<Samples> devices;
  for (std::size_t n = 0; n < cfg.n_devices; ++n) {
    devices.push_back(
        gather(x, y, std::span<const std::size_t>(order).subspan(n * cfg.samples_per_device, cfg.samples_per_device)));
  }
  return devices;
}

Eigen::MatrixXd to_features(const IdxImages& img) {
  const std::size_t frame = img.rows * img.cols;
  Eigen::MatrixXd x(Eigen::Index(frame), Eigen::Index(img.count));
  for (std::size_t i = 0; i < img.count; ++i) {
    for (std::size_t p = 0; p < frame; ++p) x(Eigen::Index(p), Eigen::Index(i)) = img.pixels[i * frame + p] / 255.0;
  }
  return x;
}

void load_pair(const std::string& images, const std::string& labels, std::size_t factor, Eigen::MatrixXd& x,
               std::vector<int>& y) {
  const IdxImages img = downsample(parse_idx_images(read_file_bytes(images)), factor);
  const std::vector<std::uint8_t> lab = parse_idx_labels(read_file_bytes(labels));
  if (lab.size() != img.count) throw std::runtime_error("IDX image and label counts differ: " + images);
  x = to_features(img);
  y.assign(lab.begin(), lab.end());
  for (int v : y) {
    if (v > 9) throw std::runtime_error("IDX label outside 0..9 in " + labels);
  }
}

}  // namespace

void DataConfig::validate() const {
  if (n_devices == 0) throw std::invalid_argument("fl: n_devices must be >= 1");
  if (samples_per_device == 0) throw std::invalid_argument("fl: samples_per_device must be >= 1");
  if (noise < 0.0) throw std::invalid_argument("fl: noise must be >= 0");
  if (downsample == 0) throw std::invalid_argument("fl: downsample must be >= 1");
  if (source != "synthetic" && source != "idx") throw std::invalid_argument("fl: source must be synthetic or idx");
  if (source == "idx" && (train_images.empty() || train_labels.empty())) {
    throw std::invalid_argument("fl: idx source needs train_images and train_labels");
  }
}

std::size_t Dataset::training_samples() const {
  std::size_t total = 0;
  for (const Samples& d : devices) total += d.size();
  return total;
}

std::vector<double> digit_prototype(int digit) {
  if (digit < 0 || digit > 9) throw std::invalid_argument("digit must be in 0..9");
  std::vector<double> img(kSide * kSide);
  for (std::size_t r = 0; r < kSide; ++r) {
    for (std::size_t c = 0; c < kSide; ++c) img[r * kSide + c] = kGlyphs[std::size_t(digit)][r][c] == '#' ? 1.0 : 0.0;
  }
  return blur(img);
}

Dataset synthetic_digits(const DataConfig& cfg) {
  cfg.validate();
  std::array<std::vector<double>, 10> proto;
  for (int d = 0; d < 10; ++d) proto[std::size_t(d)] = digit_prototype(d);

  Rng rng(cfg.seed);
  const std::size_t n_train = cfg.n_devices * cfg.samples_per_device;
  const std::size_t total = n_train + cfg.test_samples;
  Eigen::MatrixXd x(Eigen::Index(kSide * kSide), Eigen::Index(total));
  std::vector<int> y(total);
  for (std::size_t i = 0; i < total; ++i) {
    const int label = int(rng.below(10));
    const double gain = rng.uniform(0.7, 1.3);
    y[i] = label;
    for (std::size_t p = 0; p < kSide * kSide; ++p) {
      x(Eigen::Index(p), Eigen::Index(i)) = gain * proto[std::size_t(label)][p] + rng.normal(0.0, cfg.noise);
    }
  }
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  Dataset data;
  data.devices = partition(x, y, order, cfg);
  std::vector<std::size_t> test(cfg.test_samples);
  std::iota(test.begin(), test.end(), n_train);
  data.test = gather(x, y, test);
  return data;
}

Dataset idx_digits(const DataConfig& cfg) {
  cfg.validate();
  Eigen::MatrixXd x;
  std::vector<int> y;
  load_pair(cfg.train_images, cfg.train_labels, cfg.downsample, x, y);
  const std::size_t n_train = cfg.n_devices * cfg.samples_per_device;
  const bool separate_test = !cfg.test_images.empty();
  const std::size_t needed = n_train + (separate_test ? 0 : cfg.test_samples);
  if (y.size() < needed) throw std::runtime_error("IDX training file has too few samples for the requested split");

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  Dataset data;
  data.devices = partition(x, y, order, cfg);
  if (separate_test) {
    Eigen::MatrixXd tx;
    std::vector<int> ty;
    load_pair(cfg.test_images, cfg.test_labels, cfg.downsample, tx, ty);
    if (tx.rows() != x.rows()) throw std::runtime_error("IDX test images differ in size from training images");
    std::vector<std::size_t> idx(std::min(cfg.test_samples, ty.size()));
    std::iota(idx.begin(), idx.end(), 0);
    data.test = gather(tx, ty, idx);
  } else {
    data.test = gather(x, y, std::span<const std::size_t>(order).subspan(n_train, cfg.test_samples));
  }
  return data;
}

Dataset load_dataset(const DataConfig& cfg) {
  if (cfg.source == "synthetic") return synthetic_digits(cfg);
  if (cfg.source == "idx") return idx_digits(cfg);
  throw std::invalid_argument("unknown dataset source: " + cfg.source);
}

}  // namespace relayfl
