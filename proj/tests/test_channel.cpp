#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "relayfl/channel.hpp"
#include "relayfl/rng.hpp"

using namespace relayfl;

TEST_CASE("free-space reference loss at 1 m and 10 GHz") {
  // 20 log10(4 pi d f / c); 4 pi 1e10 / 299792458 = 419.169, so about 52.448 dB
  const double by_hand = 20.0 * std::log10(4.0 * std::numbers::pi * 1e10 / 299792458.0);
  CHECK(PropagationParams::free_space_loss_db(1.0, 10e9) == doctest::Approx(by_hand).epsilon(1e-12));
  CHECK(by_hand == doctest::Approx(52.4478).epsilon(1e-5));
  CHECK(PropagationParams{}.reference_loss_db == doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("log-distance path loss and the distance clamp") {
  PropagationParams p;
  p.reference_loss_db = 50.0;
  p.pathloss_exponent = 2.2;
  CHECK(pathloss_db(1.0, p) == doctest::Approx(50.0));
  CHECK(pathloss_db(10.0, p) == doctest::Approx(72.0));
  CHECK(pathloss_db(2.0, p) == doctest::Approx(50.0 + 22.0 * 0.30102999566398120));
  // below the clamp every distance looks like 0.1 m
  CHECK(pathloss_db(0.001, p) == doctest::Approx(pathloss_db(0.1, p)));
  CHECK(pathloss_db(0.0, p) == doctest::Approx(50.0 - 22.0));
}

TEST_CASE("shadowing-free gain is the inverse path loss") {
  PropagationParams p;
  p.shadowing_sigma_db = 0.0;
  Rng rng(3);
  const double d = 1.7;
  CHECK(linear_gain(d, p, rng) == doctest::Approx(std::pow(10.0, -pathloss_db(d, p) / 10.0)).epsilon(1e-12));
}

TEST_CASE("shadowing has the configured spread in dB") {
  PropagationParams p;
  Rng rng(11);
  const int n = 40000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -10.0 * std::log10(linear_gain(1.0, p, rng)) - p.reference_loss_db;
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.15);
  CHECK(sd == doctest::Approx(7.0).epsilon(0.02));
}

TEST_CASE("Rayleigh coefficient has unit power split evenly between I and Q") {
  Rng rng(5);
  const int n = 40000;
  double power = 0.0, re2 = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto h = rayleigh_coefficient(rng);
    power += std::norm(h);
    re2 += h.real() * h.real();
    cross += h.real() * h.imag();
  }
  CHECK(power / n == doctest::Approx(1.0).epsilon(0.03));
  CHECK(re2 / n == doctest::Approx(0.5).epsilon(0.03));
  CHECK(std::abs(cross / n) < 0.02);
}

TEST_CASE("placement stays inside the square and the pAP defaults to the centre") {
  GeometryConfig g;
  g.n_sensors = 50;
  g.n_saps = 4;
  Rng rng(9);
  const NodePositions pos = place_nodes(g, rng);
  CHECK(pos.sensors.size() == 50);
  CHECK(pos.saps.size() == 4);
  CHECK(pos.pap.x == 1.5);
  CHECK(pos.pap.y == 1.5);
  auto inside = [](const Point2& q) { return q.x >= 0.0 && q.x <= 3.0 && q.y >= 0.0 && q.y <= 3.0; };
  for (const Point2& q : pos.sensors) CHECK(inside(q));
  for (const Point2& q : pos.saps) CHECK(inside(q));

  g.pap_position = Point2{0.5, 2.0};
  Rng again(9);
  CHECK(place_nodes(g, again).pap.x == 0.5);
}

TEST_CASE("geometry validation") {
  GeometryConfig g;
  g.n_sensors = 0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.n_sensors = 3;
  g.side_length = -1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.side_length = 3.0;
  g.pap_position = Point2{4.0, 1.0};
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  g.pap_position.reset();
  g.n_saps = 0;
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("channels are drawn h_p, then H_s by rows, then h_c from one stream") {
  GeometryConfig g;
  g.n_sensors = 3;
  g.n_saps = 2;
  PropagationParams p;
  Rng place(21);
  const NodePositions pos = place_nodes(g, place);

  Rng a(77);
  const ChannelRealization ch = draw_channels(pos, p, a);
  REQUIRE(ch.n_sensors() == 3);
  REQUIRE(ch.n_saps() == 2);

  Rng b(77);
  auto link = [&](const Point2& x, const Point2& y) {
    const double gain = linear_gain(distance(x, y), p, b);
    return std::sqrt(gain) * rayleigh_coefficient(b);
  };
  for (std::size_t n = 0; n < 3; ++n) CHECK(ch.h_p(Eigen::Index(n)) == link(pos.sensors[n], pos.pap));
  for (std::size_t n = 0; n < 3; ++n) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(ch.H_s(Eigen::Index(n), Eigen::Index(k)) == link(pos.sensors[n], pos.saps[k]));
    }
  }
  for (std::size_t k = 0; k < 2; ++k) CHECK(ch.h_c(Eigen::Index(k)) == link(pos.saps[k], pos.pap));
  CHECK(ch.direct_gain(1) == doctest::Approx(std::norm(ch.h_p(1))));
}
