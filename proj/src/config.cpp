#include "relayfl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "relayfl/units.hpp"

namespace relayfl {

namespace {

using json = nlohmann::json;

// Reads the keys of one object and remembers which were used, so leftovers
// can be reported as unknown.
class Block {
 public:
  Block(const json& root, std::string name) : name_(std::move(name)) {
    if (!root.contains(name_)) return;
    node_ = &root.at(name_);
    if (!node_->is_object()) throw ConfigError(name_ + ": expected an object");
  }
  Block(const json* node, std::string name) : node_(node), name_(std::move(name)) {}

  bool has(const char* key) const { return node_ && node_->contains(key); }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!has(key)) return;
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!node_->at(key).is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
    }
    try {
      out = node_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + ": wrong type");
    }
  }

  const json& raw(const char* key) {
    used_.insert(key);
    return node_->at(key);
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!used_.count(key)) throw ConfigError(path(key) + ": unknown key");
    }
  }

 private:
  const json* node_ = nullptr;
  std::string name_;
  std::set<std::string> used_;
};

void read_geometry(const json& root, GeometryConfig& g) {
  Block b(root, "geometry");
  b.get("side_length", g.side_length);
  b.get("n_sensors", g.n_sensors);
  b.get("n_saps", g.n_saps);
  b.get("seed", g.seed);
  if (b.has("pap_position")) {
    const json& p = b.raw("pap_position");
    if (p.is_string() && p.get<std::string>() == "center") {
      g.pap_position.reset();
    } else if (p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number()) {
      g.pap_position = Point2{p[0].get<double>(), p[1].get<double>()};
    } else {
      throw ConfigError(b.path("pap_position") + ": expected \"center\" or [x, y]");
    }
  }
  b.finish();
}

void read_propagation(const json& root, PropagationParams& p) {
  Block b(root, "propagation");
  b.get("carrier_frequency", p.carrier_frequency);
  b.get("reference_distance", p.reference_distance);
  b.get("pathloss_exponent", p.pathloss_exponent);
  b.get("shadowing_sigma_db", p.shadowing_sigma_db);
  b.get("min_distance_clamp", p.min_distance_clamp);
  const bool explicit_loss = b.has("reference_loss_db");
  b.get("reference_loss_db", p.reference_loss_db);
  if (!explicit_loss && p.carrier_frequency > 0.0 && p.reference_distance > 0.0) {
    p.reference_loss_db = PropagationParams::free_space_loss_db(p.reference_distance, p.carrier_frequency);
  }
  b.finish();
}

void read_link(const json& root, LinkSettings& l) {
  Block b(root, "link");
  b.get("noise_psd_dbm_hz", l.noise_psd_dbm_hz);
  b.get("bandwidth", l.bandwidth);
  b.get("packet_bits", l.packet_bits);
  b.get("p_max_dbm", l.p_max_dbm);
  b.finish();
}

void read_timing(const json& root, TimingBudget& t) {
  Block b(root, "timing");
  b.get("total_deadline", t.total_deadline);
  b.get("global_rounds", t.global_rounds);
  b.get("uplink_deadline", t.uplink_deadline);
  b.finish();
}

void read_compute(const json& root, ComputeSettings& c) {
  Block b(root, "compute");
  b.get("cycles_min", c.cycles_min);
  b.get("cycles_max", c.cycles_max);
  b.get("local_samples", c.local_samples);
  b.get("local_iterations", c.local_iterations);
  b.get("max_frequency", c.max_frequency);
  b.get("kappa", c.kappa);
  b.finish();
}

void read_fl(const json& root, FlConfig& f) {
  Block b(root, "fl");
  b.get("hidden_units", f.hidden_units);
  b.get("learning_rate", f.learning_rate);
  b.get("local_iterations", f.local_iterations);
  b.get("global_rounds", f.global_rounds);
  b.get("drop_on_outage", f.drop_on_outage);
  b.get("seed", f.seed);
  DataConfig& d = f.data;
  b.get("source", d.source);
  b.get("n_devices", d.n_devices);
  b.get("samples_per_device", d.samples_per_device);
  b.get("test_samples", d.test_samples);
  b.get("noise", d.noise);
  b.get("label_skew", d.label_skew);
  b.get("train_images", d.train_images);
  b.get("train_labels", d.train_labels);
  b.get("test_images", d.test_images);
  b.get("test_labels", d.test_labels);
  b.get("downsample", d.downsample);
  b.get("data_seed", d.seed);
  b.finish();
}

void read_spca(const json& root, SpcaOptions& s) {
  Block b(root, "spca");
  b.get("eps_rel", s.eps_rel);
  b.get("max_outer", s.max_outer);
  b.get("inner_tol", s.inner_tol);
  b.finish();
}

void read_experiment(const json& root, ExperimentSettings& e) {
  Block b(root, "experiment");
  if (b.has("schemes")) {
    const json& list = b.raw("schemes");
    if (!list.is_array()) throw ConfigError("experiment.schemes: expected a list");
    e.schemes.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_object()) throw ConfigError("experiment.schemes: entries must be objects");
      Block s(&list[i], "experiment.schemes[" + std::to_string(i) + "]");
      Scheme sc;
      s.get("label", sc.label);
      s.get("k", sc.n_saps);
      s.finish();
      e.schemes.push_back(std::move(sc));
    }
  }
  if (b.has("sweep")) {
    const json& sw = b.raw("sweep");
    if (!sw.is_object()) throw ConfigError("experiment.sweep: expected an object");
    Block s(&sw, "experiment.sweep");
    s.get("name", e.sweep_name);
    s.get("values", e.sweep_values);
    s.finish();
  }
  b.get("trials", e.trials);
  b.get("master_seed", e.master_seed);
  b.get("output", e.output);
  b.get("threads", e.threads);
  b.get("joint_fl", e.joint_fl);
  b.finish();
}

void wrap(const char* block, auto&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(block ? std::string(block) + ": " + e.what() : std::string(e.what()));
  }
}

}  // namespace

LinkParams LinkSettings::params() const {
  LinkParams p;
  p.noise_power = noise_power_watts(noise_psd_dbm_hz, bandwidth);
  p.bandwidth = bandwidth;
  p.packet_bits = packet_bits;
  return p;
}

ComputeProfile ComputeSettings::profile(double cycles_per_sample) const {
  ComputeProfile p;
  p.cycles_per_sample = cycles_per_sample;
  p.local_samples = local_samples;
  p.local_iterations = local_iterations;
  p.max_frequency = max_frequency;
  p.cpu_frequency = max_frequency;
  p.kappa = kappa;
  return p;
}

void Config::validate() const {
  wrap("geometry", [&] { geometry.validate(); });
  wrap("propagation", [&] { propagation.validate(); });
  wrap("link", [&] { link.params().validate(); });
  wrap("timing", [&] { timing.validate(); });
  wrap(nullptr, [&] { fl.validate(); });  // messages already carry the block name
  if (!(compute.cycles_min > 0.0) || compute.cycles_max < compute.cycles_min) {
    throw ConfigError("compute: need 0 < cycles_min <= cycles_max");
  }
  if (!(compute.local_samples > 0.0) || !(compute.local_iterations > 0.0) || !(compute.max_frequency > 0.0) ||
      !(compute.kappa > 0.0)) {
    throw ConfigError("compute: local_samples, local_iterations, max_frequency and kappa must be > 0");
  }
  if (!(spca.eps_rel > 0.0) || !(spca.inner_tol > 0.0) || spca.max_outer == 0) {
    throw ConfigError("spca: eps_rel, inner_tol and max_outer must be > 0");
  }
  const ExperimentSettings& e = experiment;
  if (e.trials == 0) throw ConfigError("experiment.trials: must be >= 1");
  if (e.schemes.empty()) throw ConfigError("experiment.schemes: must not be empty");
  std::set<std::string> labels;
  for (const Scheme& s : e.schemes) {
    if (s.label.empty()) throw ConfigError("experiment.schemes: empty label");
    if (!labels.insert(s.label).second) throw ConfigError("experiment.schemes: duplicate label " + s.label);
  }
  if (e.sweep_values.empty()) throw ConfigError("experiment.sweep.values: must not be empty");
  if (e.sweep_name == kSweepDevices) {
    for (double v : e.sweep_values) {
      if (!(v >= 1.0) || v != double(std::size_t(v))) {
        throw ConfigError("experiment.sweep.values: n_sensors values must be integers >= 1");
      }
    }
  } else if (e.sweep_name != kSweepPmax) {
    throw ConfigError("experiment.sweep.name: must be p_max_dbm or n_sensors");
  }
}

Config parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> blocks{"geometry", "propagation", "link",  "timing",
                                            "compute",  "fl",          "spca", "experiment"};
  for (const auto& [key, value] : root.items()) {
    if (!blocks.count(key)) throw ConfigError(key + ": unknown block");
  }
  Config cfg;
  read_geometry(root, cfg.geometry);
  read_propagation(root, cfg.propagation);
  read_link(root, cfg.link);
  read_timing(root, cfg.timing);
  read_compute(root, cfg.compute);
  read_fl(root, cfg.fl);
  read_spca(root, cfg.spca);
  read_experiment(root, cfg.experiment);
  cfg.validate();
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace relayfl
