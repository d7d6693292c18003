#include "relayfl/link_rates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relayfl {

void LinkParams::validate() const {
  if (!(noise_power > 0.0)) throw std::invalid_argument("link: noise_power > 0 required");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("link: bandwidth > 0 required");
  if (!(packet_bits > 0.0)) throw std::invalid_argument("link: packet_bits > 0 required");
}

Snr snr_direct(double power, double gain, double noise_power) {
  return Snr{power * gain / noise_power};
}

double rate_direct(Snr g) { return std::log2(1.0 + g.value); }

double rate_hop1(double power, double access_gain, double noise_power) {
  return rate_direct(snr_direct(power, access_gain, noise_power));
}

double rate_hop2_combined(double relay_power, double relay_gain, double device_power,
                          double direct_gain, double noise_power) {
  const double combined = (relay_power * relay_gain + device_power * direct_gain) / noise_power;
  return std::log2(1.0 + combined);
}

double packet_time(double rate, const LinkParams& link) {
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return link.packet_bits / (link.bandwidth * rate);
}

}  // namespace relayfl
