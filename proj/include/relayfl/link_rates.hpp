#pragma once

namespace relayfl {

/// Noise power sigma0^2 (W), bandwidth W (Hz) and packet size s (bits).
struct LinkParams {
  double noise_power = 3.981071705534973e-13;  // -174 dBm/Hz over 100 MHz
  double bandwidth = 100e6;
  double packet_bits = 10e3;

  void validate() const;

  /// s / W, the airtime of one packet at unit spectral efficiency.
  double airtime_per_unit_rate() const { return packet_bits / bandwidth; }
};

/// Linear power ratio; rates below are spectral efficiencies in bits/s/Hz.
struct Snr {
  double value = 0.0;
};

Snr snr_direct(double power, double gain, double noise_power);

double rate_direct(Snr g);

/// Device -> serving sAP, first phase of a two-hop transmission.
double rate_hop1(double power, double access_gain, double noise_power);

/// Second phase: the pAP combines the relay's and the device's received energy.
double rate_hop2_combined(double relay_power, double relay_gain, double device_power,
                          double direct_gain, double noise_power);

/// s / (W r); +inf when the rate is zero.
double packet_time(double rate, const LinkParams& link);

}  // namespace relayfl
