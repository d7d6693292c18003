#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "relayfl/rng.hpp"

namespace relayfl {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

/// Square subnetwork with one primary AP, N sensors and K secondary APs.
struct GeometryConfig {
  double side_length = 3.0;
  std::size_t n_sensors = 20;
  std::size_t n_saps = 4;
  std::optional<Point2> pap_position;  // nullopt: centre of the square
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

struct NodePositions {
  Point2 pap;
  std::vector<Point2> sensors;
  std::vector<Point2> saps;
};

/// Log-distance path loss with log-normal shadowing.
struct PropagationParams {
  double carrier_frequency = 10e9;
  double reference_distance = 1.0;
  double reference_loss_db = free_space_loss_db(1.0, 10e9);
  double pathloss_exponent = 2.2;
  double shadowing_sigma_db = 7.0;
  double min_distance_clamp = 0.1;

  static double free_space_loss_db(double distance_m, double carrier_hz);

  void validate() const;
};

/// One fading draw for every link of the subnetwork.
struct ChannelRealization {
  Eigen::VectorXcd h_p;  // sensor -> pAP, length N
  Eigen::MatrixXcd H_s;  // sensor -> sAP, N x K
  Eigen::VectorXcd h_c;  // sAP -> pAP, length K

  std::size_t n_sensors() const { return static_cast<std::size_t>(h_p.size()); }
  std::size_t n_saps() const { return static_cast<std::size_t>(h_c.size()); }

  double direct_gain(std::size_t n) const { return std::norm(h_p(Eigen::Index(n))); }
  double access_gain(std::size_t n, std::size_t k) const {
    return std::norm(H_s(Eigen::Index(n), Eigen::Index(k)));
  }
  double backhaul_gain(std::size_t k) const { return std::norm(h_c(Eigen::Index(k))); }
};

/// Positions drawn i.i.d. uniform over the square, in the order sensors then sAPs.
NodePositions place_nodes(const GeometryConfig& cfg, Rng& rng);

/// Deterministic part of the loss in dB, distance clamped below.
double pathloss_db(double distance_m, const PropagationParams& p);

/// Large-scale power gain 10^(-(PL(d) + X)/10), X ~ N(0, sigma^2) in dB.
double linear_gain(double distance_m, const PropagationParams& p, Rng& rng);

/// Circularly-symmetric complex normal with unit variance.
std::complex<double> rayleigh_coefficient(Rng& rng);

/**
 * Draws h_p, then H_s row by row, then h_c. Each coefficient is
 * sqrt(large-scale gain) times a unit Rayleigh variate, drawn in that order
 * from the same stream.
 */
ChannelRealization draw_channels(const NodePositions& positions, const PropagationParams& p,
                                 Rng& rng);

}  // namespace relayfl
