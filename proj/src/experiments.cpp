#include "relayfl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "relayfl/csv.hpp"
#include "relayfl/fl_sim.hpp"
#include "relayfl/rng.hpp"
#include "relayfl/units.hpp"

namespace relayfl {

std::uint64_t trial_seed(std::uint64_t master, std::string_view scheme_label, std::size_t point, std::size_t trial) {
  return derive_seed(derive_seed(derive_seed(master, fnv1a(scheme_label)), point), trial);
}

std::uint64_t device_seed(std::uint64_t master, std::size_t point, std::size_t trial) {
  // '#' cannot start a meaningful scheme label, so this key stays apart from trial_seed.
  return derive_seed(derive_seed(derive_seed(master, fnv1a("#devices")), point), trial);
}

Snapshot simulate(const Config& cfg, const TrialSetup& setup) {
  Snapshot snap;
  GeometryConfig geometry = cfg.geometry;
  geometry.n_sensors = setup.n_sensors;
  geometry.n_saps = setup.n_saps;
  geometry.seed = setup.channel_seed;
  geometry.validate();

  Rng rng(setup.channel_seed);
  snap.positions = place_nodes(geometry, rng);
  snap.channel = draw_channels(snap.positions, cfg.propagation, rng);
  snap.schedule = classify(snap.channel);

  Rng devices(setup.device_seed);
  for (std::size_t n = 0; n < setup.n_sensors; ++n) {
    snap.profiles.push_back(cfg.compute.profile(devices.uniform(cfg.compute.cycles_min, cfg.compute.cycles_max)));
  }

  const LinkParams link = cfg.link.params();
  snap.p_max = dbm_to_watts(setup.p_max_dbm);
  snap.spca = spca_minimize(snap.schedule, snap.channel, link, cfg.timing.uplink_deadline, snap.p_max, cfg.spca);
  if (snap.spca.iterate) {
    snap.report = evaluate_round(snap.schedule, snap.channel, snap.spca.powers, link, snap.profiles, cfg.timing);
  }
  return snap;
}

TrialSetup trial_setup(const Config& cfg, const Scheme& scheme, std::size_t point, std::size_t trial) {
  const ExperimentSettings& e = cfg.experiment;
  TrialSetup s;
  s.n_sensors = cfg.geometry.n_sensors;
  s.n_saps = scheme.n_saps;
  s.p_max_dbm = cfg.link.p_max_dbm;
  const double value = e.sweep_values.at(point);
  if (e.sweep_name == kSweepDevices) {
    s.n_sensors = std::size_t(value);
  } else {
    s.p_max_dbm = value;
  }
  s.channel_seed = trial_seed(e.master_seed, scheme.label, point, trial);
  s.device_seed = device_seed(e.master_seed, point, trial);
  return s;
}

TrialRecord run_trial(const Config& cfg, const Scheme& scheme, std::size_t point, std::size_t trial,
                      const TrialSetup& setup) {
  const Snapshot snap = simulate(cfg, setup);
  TrialRecord r;
  r.scheme = scheme.label;
  r.sweep_name = cfg.experiment.sweep_name;
  r.sweep_value = cfg.experiment.sweep_values.at(point);
  r.trial = trial;
  r.seed = setup.channel_seed;
  r.n_1h = snap.schedule.single_hop.size();
  r.n_2h = snap.schedule.two_hop.size();
  r.spca_status = to_string(snap.spca.status);

  std::vector<bool> outage(setup.n_sensors, true);
  if (snap.report) {
    const EnergyLatencyReport& rep = *snap.report;
    const double rounds = cfg.timing.global_rounds;
    r.e_transmit = rounds * rep.transmit.total();
    r.e_relay = rounds * rep.transmit.relays;
    r.e_compute = rounds * rep.compute_energy_sum();
    r.e_total = rep.total;
    r.t_ul = rep.uplink.total;
    r.outage_frac = rep.outage_frac();
    outage = rep.outage;
  } else {
    // Deadline unattainable at P_max: the round fails for everyone.
    r.outage_frac = 1.0;
  }

  if (cfg.experiment.joint_fl) {
    FlConfig fl = cfg.fl;
    fl.data.n_devices = setup.n_sensors;
    fl.data.seed = derive_seed(setup.device_seed, 1);
    fl.seed = derive_seed(setup.device_seed, 2);
    const Dataset data = load_dataset(fl.data);
    const TrainingHistory h = train_federated(data, fl, [&](std::size_t) { return outage; });
    r.accuracy = h.accuracy.back();
  }
  return r;
}

TrialRecord run_point(const Config& cfg, const Scheme& scheme, std::size_t point, std::size_t trial) {
  return run_trial(cfg, scheme, point, trial, trial_setup(cfg, scheme, point, trial));
}

ColumnStats column_stats(const std::vector<std::optional<double>>& values) {
  ColumnStats s;
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) continue;
    ++s.count;
    sum += *v;
  }
  if (s.count == 0) return s;
  s.mean = sum / double(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (const auto& v : values) {
      if (v) ss += (*v - s.mean) * (*v - s.mean);
    }
    s.stddev = std::sqrt(ss / double(s.count - 1));
  }
  return s;
}

std::vector<PointSummary> summarize(const std::vector<TrialRecord>& records) {
  std::vector<PointSummary> out;
  std::size_t begin = 0;
  while (begin < records.size()) {
    std::size_t end = begin;
    while (end < records.size() && records[end].scheme == records[begin].scheme &&
           records[end].sweep_value == records[begin].sweep_value) {
      ++end;
    }
    std::vector<std::optional<double>> n1, n2, et, ec, etot, tul, out_frac, acc;
    PointSummary s;
    s.scheme = records[begin].scheme;
    s.sweep_name = records[begin].sweep_name;
    s.sweep_value = records[begin].sweep_value;
    s.trials = end - begin;
    for (std::size_t i = begin; i < end; ++i) {
      const TrialRecord& r = records[i];
      if (r.spca_status == "converged") ++s.converged;
      n1.emplace_back(double(r.n_1h));
      n2.emplace_back(double(r.n_2h));
      et.push_back(r.e_transmit);
      ec.push_back(r.e_compute);
      etot.push_back(r.e_total);
      tul.push_back(r.t_ul);
      out_frac.emplace_back(r.outage_frac);
      acc.push_back(r.accuracy);
    }
    s.n_1h = column_stats(n1);
    s.n_2h = column_stats(n2);
    s.e_transmit = column_stats(et);
    s.e_compute = column_stats(ec);
    s.e_total = column_stats(etot);
    s.t_ul = column_stats(tul);
    s.outage_frac = column_stats(out_frac);
    s.accuracy = column_stats(acc);
    out.push_back(std::move(s));
    begin = end;
  }
  return out;
}

std::vector<TrialRecord> run_sweep(const Config& cfg, std::size_t threads, const ProgressCallback& progress) {
  cfg.validate();
  const ExperimentSettings& e = cfg.experiment;
  struct Task {
    std::size_t scheme, point, trial;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < e.schemes.size(); ++s) {
    for (std::size_t p = 0; p < e.sweep_values.size(); ++p) {
      for (std::size_t t = 0; t < e.trials; ++t) tasks.push_back({s, p, t});
    }
  }

  std::vector<TrialRecord> records(tasks.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, tasks.size());

  // Each worker claims the next task and writes its own slot, so the output
  // order is the task order whatever the interleaving.
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        records[i] = run_point(cfg, e.schemes[tasks[i].scheme], tasks[i].point, tasks[i].trial);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = tasks.size();
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(failure_mutex);
        progress(d, tasks.size());
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

namespace {

std::string stats_cell(const ColumnStats& s) {
  if (s.count == 0) return {};
  return format_number(s.mean) + "+-" + format_number(s.stddev);
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << kSweepCsvHeader << '\n';
  for (const TrialRecord& r : records) {
    out << csv_field(r.scheme) << ',' << csv_field(r.sweep_name) << ',' << format_number(r.sweep_value) << ','
        << r.trial << ',' << r.seed << ',' << r.n_1h << ',' << r.n_2h << ',' << format_optional(r.e_transmit) << ','
        << format_optional(r.e_compute) << ',' << format_optional(r.e_total) << ',' << format_optional(r.t_ul) << ','
        << format_number(r.outage_frac) << ',' << r.spca_status << ',' << format_optional(r.accuracy) << '\n';
  }
  for (const PointSummary& s : summarize(records)) {
    out << csv_field(s.scheme) << ',' << csv_field(s.sweep_name) << ',' << format_number(s.sweep_value)
        << ",summary," << s.trials << ',' << stats_cell(s.n_1h) << ',' << stats_cell(s.n_2h) << ','
        << stats_cell(s.e_transmit) << ',' << stats_cell(s.e_compute) << ',' << stats_cell(s.e_total) << ','
        << stats_cell(s.t_ul) << ',' << stats_cell(s.outage_frac) << ',' << s.converged << '/' << s.trials << ','
        << stats_cell(s.accuracy) << '\n';
  }
}

}  // namespace relayfl
