#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "relayfl/fl_data.hpp"
#include "relayfl/fl_model.hpp"

namespace relayfl {

struct FlConfig {
  std::size_t hidden_units = 50;
  double learning_rate = 1.0;  // mu
  std::size_t local_iterations = 1;   // I_n
  std::size_t global_rounds = 50;     // I_0 for training runs
  /// Devices in outage keep their update out of that round's aggregate.
  bool drop_on_outage = true;
  std::uint64_t seed = 7;  // weight initialisation
  DataConfig data;

  void validate() const;
};

struct RoundResult {
  Eigen::VectorXd model;
  double accuracy = 0.0;
  std::vector<double> losses;  // per participating device, before its local update
  std::size_t participants = 0;
};

/**
 * Broadcasts `global`, runs local_update on every participating device and
 * aggregates in device order. `excluded[n]` drops device n; with every device
 * excluded the global model is carried over unchanged. Accuracy is measured
 * on the held-out split.
 */
RoundResult run_round(const MlpShape& shape, const Eigen::VectorXd& global, const Dataset& data,
                      const FlConfig& cfg, const std::vector<bool>& excluded = {});

struct TrainingHistory {
  std::vector<double> accuracy;     // index 0 is the initial model
  std::vector<double> mean_loss;    // index 0 is the initial model
  std::vector<std::size_t> participants;  // index 0 is 0
  Eigen::VectorXd model;
};

/// Per-round outage flags (one per device); empty means nobody is in outage.
using OutageSchedule = std::function<std::vector<bool>(std::size_t round)>;

/// global_rounds rounds of federated averaging from a seeded initial model.
TrainingHistory train_federated(const Dataset& data, const FlConfig& cfg, const OutageSchedule& outage = {});

/// Mean training loss over all devices, weighted by sample count.
double training_loss(const MlpShape& shape, const Eigen::VectorXd& w, const Dataset& data);

}  // namespace relayfl
