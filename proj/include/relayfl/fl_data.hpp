#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "relayfl/fl_model.hpp"

namespace relayfl {

/// Where training data comes from and how it is split across devices.
struct DataConfig {
  std::string source = "synthetic";  // "synthetic" or "idx"
  std::size_t n_devices = 20;
  std::size_t samples_per_device = 200;  // D_n
  std::size_t test_samples = 1000;
  /// Synthetic mode: per-pixel Gaussian noise added to the blurred prototype.
  double noise = 0.35;
  /// Sort by label before splitting so each device sees few classes.
  bool label_skew = false;
  // IDX mode. Without test files the test split is taken from the unused
  // tail of the shuffled training files.
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::size_t downsample = 1;
  std::uint64_t seed = 7;

  void validate() const;
};

struct Dataset {
  std::vector<Samples> devices;
  Samples test;

  std::size_t inputs() const { return std::size_t(test.features.rows()); }
  std::size_t training_samples() const;
};

/// 8x8 prototype of a digit, blurred, values in [0, 1], row-major.
std::vector<double> digit_prototype(int digit);

/// Blurred prototypes with random gain and Gaussian pixel noise; 64 inputs.
Dataset synthetic_digits(const DataConfig& cfg);

/// IDX image/label files scaled to [0, 1], shuffled with the seed, split D_n per device.
Dataset idx_digits(const DataConfig& cfg);

/// Dispatches on cfg.source; throws std::invalid_argument for an unknown source.
Dataset load_dataset(const DataConfig& cfg);

}  // namespace relayfl
