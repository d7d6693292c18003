#include "relayfl/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "relayfl/units.hpp"

namespace relayfl {

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

void GeometryConfig::validate() const {
  if (!(side_length > 0.0)) throw std::invalid_argument("geometry: side_length > 0 required");
  if (n_sensors < 1) throw std::invalid_argument("geometry: N >= 1 required");
  if (pap_position) {
    const auto& p = *pap_position;
    if (p.x < 0.0 || p.x > side_length || p.y < 0.0 || p.y > side_length) {
      throw std::invalid_argument("geometry: pap_position must lie inside the square");
    }
  }
}

double PropagationParams::free_space_loss_db(double distance_m, double carrier_hz) {
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m * carrier_hz / kSpeedOfLight);
}

void PropagationParams::validate() const {
  if (!(carrier_frequency > 0.0)) throw std::invalid_argument("propagation: carrier_frequency > 0 required");
  if (!(reference_distance > 0.0)) throw std::invalid_argument("propagation: reference_distance > 0 required");
  if (!(pathloss_exponent > 0.0)) throw std::invalid_argument("propagation: pathloss_exponent > 0 required");
  if (!(shadowing_sigma_db >= 0.0)) throw std::invalid_argument("propagation: shadowing_sigma >= 0 required");
  if (!(min_distance_clamp > 0.0)) throw std::invalid_argument("propagation: min_distance_clamp > 0 required");
  if (!std::isfinite(reference_loss_db)) throw std::invalid_argument("propagation: reference_loss must be finite");
}

NodePositions place_nodes(const GeometryConfig& cfg, Rng& rng) {
  NodePositions out;
  const double side = cfg.side_length;
  out.pap = cfg.pap_position.value_or(Point2{side / 2.0, side / 2.0});
  out.sensors.reserve(cfg.n_sensors);
  for (std::size_t n = 0; n < cfg.n_sensors; ++n) {
    const double x = rng.uniform(0.0, side);
    const double y = rng.uniform(0.0, side);
    out.sensors.push_back({x, y});
  }
  out.saps.reserve(cfg.n_saps);
  for (std::size_t k = 0; k < cfg.n_saps; ++k) {
    const double x = rng.uniform(0.0, side);
    const double y = rng.uniform(0.0, side);
    out.saps.push_back({x, y});
  }
  return out;
}

double pathloss_db(double distance_m, const PropagationParams& p) {
  const double d = std::max(distance_m, p.min_distance_clamp);
  return p.reference_loss_db + 10.0 * p.pathloss_exponent * std::log10(d / p.reference_distance);
}

double linear_gain(double distance_m, const PropagationParams& p, Rng& rng) {
  const double shadow = p.shadowing_sigma_db > 0.0 ? rng.normal(0.0, p.shadowing_sigma_db) : 0.0;
  return db_to_linear(-(pathloss_db(distance_m, p) + shadow));
}

std::complex<double> rayleigh_coefficient(Rng& rng) {
  const double re = rng.normal();
  const double im = rng.normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

namespace {

std::complex<double> draw_link(const Point2& a, const Point2& b, const PropagationParams& p,
                               Rng& rng) {
  const double gain = linear_gain(distance(a, b), p, rng);
  return std::sqrt(gain) * rayleigh_coefficient(rng);
}

}  // namespace

ChannelRealization draw_channels(const NodePositions& positions, const PropagationParams& p,
                                 Rng& rng) {
  const auto n_sensors = static_cast<Eigen::Index>(positions.sensors.size());
  const auto n_saps = static_cast<Eigen::Index>(positions.saps.size());
  ChannelRealization ch;
  ch.h_p.resize(n_sensors);
  ch.H_s.resize(n_sensors, n_saps);
  ch.h_c.resize(n_saps);
  for (Eigen::Index n = 0; n < n_sensors; ++n) {
    ch.h_p(n) = draw_link(positions.sensors[std::size_t(n)], positions.pap, p, rng);
  }
  for (Eigen::Index n = 0; n < n_sensors; ++n) {
    for (Eigen::Index k = 0; k < n_saps; ++k) {
      ch.H_s(n, k) = draw_link(positions.sensors[std::size_t(n)], positions.saps[std::size_t(k)], p, rng);
    }
  }
  for (Eigen::Index k = 0; k < n_saps; ++k) {
    ch.h_c(k) = draw_link(positions.saps[std::size_t(k)], positions.pap, p, rng);
  }
  return ch;
}

}  // namespace relayfl
