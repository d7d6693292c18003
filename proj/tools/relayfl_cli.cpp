#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "relayfl/config.hpp"
#include "relayfl/csv.hpp"
#include "relayfl/experiments.hpp"
#include "relayfl/fl_sim.hpp"
#include "relayfl/idx.hpp"
#include "relayfl/rng.hpp"

namespace {

using namespace relayfl;

enum Exit { kOk = 0, kConfigError = 1, kInfeasible = 2, kIoError = 3 };

// Raised for anything that fails while reading inputs or writing outputs.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> trials;
  std::string scheme;
  std::optional<std::size_t> threads;
};

Config load(const Options& o) { return o.config.empty() ? Config{} : load_config(o.config); }

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

void check_written(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoError("failed while writing " + path);
}

const Scheme* find_scheme(const Config& cfg, const std::string& label) {
  for (const Scheme& s : cfg.experiment.schemes) {
    if (s.label == label) return &s;
  }
  throw ConfigError("--scheme: no scheme labelled '" + label + "' in the config");
}

int solve_snapshot(const Options& o) {
  const Config cfg = load(o);
  TrialSetup setup;
  setup.n_sensors = cfg.geometry.n_sensors;
  setup.n_saps = o.scheme.empty() ? cfg.geometry.n_saps : find_scheme(cfg, o.scheme)->n_saps;
  setup.p_max_dbm = cfg.link.p_max_dbm;
  setup.channel_seed = o.seed.value_or(cfg.geometry.seed);
  setup.device_seed = derive_seed(setup.channel_seed, fnv1a("#devices"));
  const Snapshot snap = simulate(cfg, setup);

  std::printf("N=%zu K=%zu seed=%llu P_max=%g dBm\n", setup.n_sensors, setup.n_saps,
              static_cast<unsigned long long>(setup.channel_seed), setup.p_max_dbm);
  std::printf("single-hop %zu, two-hop %zu\n", snap.schedule.single_hop.size(), snap.schedule.two_hop.size());
  std::printf("SPCA %s after %zu outer iterations\n", to_string(snap.spca.status), snap.spca.report.iterations);
  if (!snap.report) {
    std::printf("uplink deadline unattainable at P_max: every device in outage\n");
    return kInfeasible;
  }
  const EnergyLatencyReport& rep = *snap.report;
  std::printf("%6s %5s %14s %14s %12s %8s\n", "device", "relay", "p_device_W", "p_relay_W", "f_Hz", "outage");
  for (std::size_t n = 0; n < setup.n_sensors; ++n) {
    const auto relay = snap.schedule.relay_of[n];
    std::printf("%6zu %5s %14.6e %14.6e %12.6e %8s\n", n, relay ? std::to_string(*relay).c_str() : "-",
                snap.spca.powers.device_power[n], snap.spca.powers.relay_power[n], rep.frequency[n],
                rep.outage[n] ? "yes" : "no");
  }
  const double rounds = cfg.timing.global_rounds;
  std::printf("T_UL %.6e s\n", rep.uplink.total);
  std::printf("E_transmit %.6e J  E_compute %.6e J  E_total %.6e J\n", rounds * rep.transmit.total(),
              rounds * rep.compute_energy_sum(), rep.total);
  std::printf("outage fraction %g\n", rep.outage_frac());

  if (!o.out.empty()) {
    std::ofstream f = open_output(o.out);
    f << "device,relay,p_device_w,p_relay_w,frequency_hz,compute_energy_j,completion_s,outage\n";
    for (std::size_t n = 0; n < setup.n_sensors; ++n) {
      const auto relay = snap.schedule.relay_of[n];
      f << n << ',' << (relay ? std::to_string(*relay) : "") << ',' << format_number(snap.spca.powers.device_power[n])
        << ',' << format_number(snap.spca.powers.relay_power[n]) << ',' << format_number(rep.frequency[n]) << ','
        << format_number(rep.compute_energy[n]) << ',' << format_number(rep.completion[n]) << ','
        << (rep.outage[n] ? 1 : 0) << '\n';
    }
    check_written(f, o.out);
  }
  return kOk;
}

int sweep(const Options& o) {
  Config cfg = load(o);
  if (o.seed) cfg.experiment.master_seed = *o.seed;
  if (o.trials) cfg.experiment.trials = *o.trials;
  if (!o.scheme.empty()) cfg.experiment.schemes = {*find_scheme(cfg, o.scheme)};
  if (!o.out.empty()) cfg.experiment.output = o.out;
  cfg.validate();
  const std::size_t threads = o.threads.value_or(cfg.experiment.threads);

  std::size_t last = 0;
  const auto records = run_sweep(cfg, threads, [&](std::size_t done, std::size_t total) {
    const std::size_t pct = 100 * done / total;
    if (pct >= last + 10 || done == total) {
      std::fprintf(stderr, "\r%zu/%zu trials", done, total);
      last = pct;
    }
  });
  std::fprintf(stderr, "\n");

  std::ofstream f = open_output(cfg.experiment.output);
  write_sweep_csv(f, records);
  check_written(f, cfg.experiment.output);

  std::printf("%-10s %12s %8s %12s %12s %10s\n", "scheme", cfg.experiment.sweep_name.c_str(), "trials", "mean E_J",
              "mean outage", "converged");
  for (const PointSummary& s : summarize(records)) {
    std::printf("%-10s %12g %8zu %12.4e %12.4f %6zu/%zu\n", s.scheme.c_str(), s.sweep_value, s.trials, s.e_total.mean,
                s.outage_frac.mean, s.converged, s.trials);
  }
  std::printf("wrote %s\n", cfg.experiment.output.c_str());
  return kOk;
}

int fl_train(const Options& o) {
  Config cfg = load(o);
  if (o.seed) cfg.fl.seed = *o.seed;
  cfg.validate();
  const Dataset data = load_dataset(cfg.fl.data);
  const TrainingHistory h = train_federated(data, cfg.fl);
  for (std::size_t r = 0; r < h.accuracy.size(); ++r) {
    if (r % 10 == 0 || r + 1 == h.accuracy.size()) {
      std::printf("round %4zu  accuracy %.4f  loss %.5f\n", r, h.accuracy[r], h.mean_loss[r]);
    }
  }
  if (!o.out.empty()) {
    std::ofstream f = open_output(o.out);
    f << "round,accuracy,train_loss,participants\n";
    for (std::size_t r = 0; r < h.accuracy.size(); ++r) {
      f << r << ',' << format_number(h.accuracy[r]) << ',' << format_number(h.mean_loss[r]) << ','
        << h.participants[r] << '\n';
    }
    check_written(f, o.out);
  }
  return kOk;
}

int validate_config(const Options& o) {
  const Config cfg = load(o);
  std::printf("config ok: %zu scheme(s), %zu %s point(s), %zu trial(s)\n", cfg.experiment.schemes.size(),
              cfg.experiment.sweep_values.size(), cfg.experiment.sweep_name.c_str(), cfg.experiment.trials);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relay-assisted federated learning link simulator"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--out", o.out, "Machine-readable CSV output");
    sub->add_option("--trials", o.trials, "Trials per sweep point")->check(CLI::PositiveNumber);
    sub->add_option("--scheme", o.scheme, "Scheme label from the config");
    sub->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  };
  auto* snap = app.add_subcommand("solve-snapshot", "Optimise one channel realization");
  common(snap, false);
  auto* sw = app.add_subcommand("sweep", "Monte Carlo sweep to CSV");
  common(sw, true);
  auto* fl = app.add_subcommand("fl-train", "Federated training, accuracy per round");
  common(fl, true);
  auto* val = app.add_subcommand("validate-config", "Parse and check a config");
  common(val, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*snap) return solve_snapshot(o);
    if (*sw) return sweep(o);
    if (*fl) return fl_train(o);
    return validate_config(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIoError;
  } catch (const IdxError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIoError;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIoError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfigError;
  }
}
