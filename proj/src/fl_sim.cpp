#include "relayfl/fl_sim.hpp"

#include <stdexcept>

namespace relayfl {

void FlConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("fl: learning_rate must be > 0");
  if (hidden_units == 0) throw std::invalid_argument("fl: hidden_units must be >= 1");
  if (local_iterations == 0) throw std::invalid_argument("fl: local_iterations must be >= 1");
  if (global_rounds == 0) throw std::invalid_argument("fl: global_rounds must be >= 1");
  data.validate();
}

RoundResult run_round(const MlpShape& shape, const Eigen::VectorXd& global, const Dataset& data,
                      const FlConfig& cfg, const std::vector<bool>& excluded) {
  std::vector<Eigen::VectorXd> models;
  std::vector<double> sizes;
  RoundResult out;
  for (std::size_t n = 0; n < data.devices.size(); ++n) {
    if (n < excluded.size() && excluded[n]) continue;
    out.losses.push_back(local_loss(shape, global, data.devices[n]));
    models.push_back(local_update(shape, global, data.devices[n], cfg.learning_rate, cfg.local_iterations));
    sizes.push_back(double(data.devices[n].size()));
  }
  out.participants = models.size();
  out.model = models.empty() ? global : aggregate(models, sizes);
  out.accuracy = accuracy(shape, out.model, data.test);
  return out;
}

double training_loss(const MlpShape& shape, const Eigen::VectorXd& w, const Dataset& data) {
  double total = 0.0;
  std::size_t count = 0;
  for (const Samples& d : data.devices) {
    total += local_loss(shape, w, d) * double(d.size());
    count += d.size();
  }
  return count ? total / double(count) : 0.0;
}

TrainingHistory train_federated(const Dataset& data, const FlConfig& cfg, const OutageSchedule& outage) {
  cfg.validate();
  const MlpShape shape{data.inputs(), cfg.hidden_units, 10};
  Rng rng(cfg.seed);
  TrainingHistory h;
  h.model = shape.initial_weights(rng);
  h.accuracy.push_back(accuracy(shape, h.model, data.test));
  h.mean_loss.push_back(training_loss(shape, h.model, data));
  h.participants.push_back(0);
  for (std::size_t r = 1; r <= cfg.global_rounds; ++r) {
    std::vector<bool> excluded;
    if (outage && cfg.drop_on_outage) excluded = outage(r);
    RoundResult res = run_round(shape, h.model, data, cfg, excluded);
    h.model = std::move(res.model);
    h.accuracy.push_back(res.accuracy);
    h.mean_loss.push_back(training_loss(shape, h.model, data));
    h.participants.push_back(res.participants);
  }
  return h;
}

}  // namespace relayfl
