#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "relayfl/config.hpp"
#include "relayfl/units.hpp"

using namespace relayfl;

TEST_CASE("an empty config carries the Table 1 defaults") {
  const Config cfg = parse_config("{}");
  CHECK(cfg.link.packet_bits == 1e4);
  CHECK(cfg.compute.local_samples == 200);
  CHECK(cfg.timing.total_deadline == 6.0);
  CHECK(cfg.timing.uplink_deadline == 4e-3);
  CHECK(cfg.link.bandwidth == 1e8);
  CHECK(cfg.propagation.carrier_frequency == 10e9);
  CHECK(cfg.link.p_max_dbm == 23.0);
  CHECK(cfg.link.noise_psd_dbm_hz == -174.0);
  CHECK(cfg.compute.kappa == 1e-28);
  CHECK(cfg.compute.max_frequency == 1e9);
  CHECK(cfg.compute.cycles_min == 1e4);
  CHECK(cfg.compute.cycles_max == 2e4);
  CHECK(cfg.link.params().noise_power == doctest::Approx(std::pow(10.0, -12.4)));
  CHECK(cfg.experiment.trials == 200);
  REQUIRE(cfg.experiment.schemes.size() == 2);
  CHECK(cfg.experiment.schemes[0].label == "1h");
  CHECK(cfg.experiment.schemes[0].n_saps == 0);
}

TEST_CASE("the shipped configs parse") {
  const std::filesystem::path dir = std::filesystem::path(__FILE__).parent_path().parent_path() / "configs";
  for (const char* name : {"default.json", "fig4_outage.json", "fig5_energy.json", "fl_digits.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(dir / name));
  }
  const Config fig5 = load_config(dir / "fig5_energy.json");
  CHECK(fig5.experiment.sweep_name == kSweepDevices);
  CHECK(fig5.experiment.sweep_values == std::vector<double>{10, 20, 30, 40, 50});
  CHECK(fig5.timing.global_rounds == 130);
  CHECK(fig5.compute.local_iterations == 1);
}

TEST_CASE("values override defaults") {
  const Config cfg = parse_config(R"({
    "geometry": {"n_sensors": 7, "pap_position": [0.5, 1.0]},
    "propagation": {"carrier_frequency": 2.4e9},
    "experiment": {"schemes": [{"label": "a", "k": 2}], "sweep": {"name": "n_sensors", "values": [3, 4]},
                   "trials": 5, "threads": 1},
    "fl": {"source": "synthetic", "learning_rate": 0.5, "data_seed": 11}
  })");
  CHECK(cfg.geometry.n_sensors == 7);
  REQUIRE(cfg.geometry.pap_position);
  CHECK(cfg.geometry.pap_position->x == 0.5);
  // the reference loss follows the carrier unless given explicitly
  CHECK(cfg.propagation.reference_loss_db == doctest::Approx(20.0 * std::log10(4.0 * std::numbers::pi * 2.4e9 / kSpeedOfLight)));
  CHECK(cfg.experiment.schemes[0].n_saps == 2);
  CHECK(cfg.experiment.trials == 5);
  CHECK(cfg.fl.learning_rate == 0.5);
  CHECK(cfg.fl.data.seed == 11);
}

TEST_CASE("malformed configs are rejected with the offending key") {
  auto message = [](const char* text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("accepted");
  };
  CHECK(message("not json").find("valid JSON") != std::string::npos);
  CHECK(message("[1]").find("object") != std::string::npos);
  CHECK(message(R"({"bogus": {}})").find("bogus") != std::string::npos);
  CHECK(message(R"({"link": {"bandwith": 1}})").find("link.bandwith") != std::string::npos);
  CHECK(message(R"({"link": {"bandwidth": "wide"}})").find("link.bandwidth") != std::string::npos);
  CHECK(message(R"({"geometry": {"n_sensors": -3}})").find("geometry.n_sensors") != std::string::npos);
  CHECK(message(R"({"geometry": {"n_sensors": 0}})").find("geometry") != std::string::npos);
  CHECK(message(R"({"experiment": {"trials": 0}})").find("trials") != std::string::npos);
  CHECK(message(R"({"experiment": {"schemes": [{"label": "x", "k": 1}, {"label": "x", "k": 2}]}})")
            .find("duplicate") != std::string::npos);
  CHECK(message(R"({"experiment": {"schemes": []}})").find("schemes") != std::string::npos);
  CHECK(message(R"({"experiment": {"sweep": {"name": "p_max_dbm", "values": []}}})").find("values") !=
        std::string::npos);
  CHECK(message(R"({"experiment": {"sweep": {"name": "n_sensors", "values": [2.5]}}})").find("integers") !=
        std::string::npos);
  CHECK(message(R"({"experiment": {"sweep": {"name": "bandwidth", "values": [1]}}})").find("sweep.name") !=
        std::string::npos);
  CHECK(message(R"({"fl": {"learning_rate": -1}})").find("fl:") == 0);
  CHECK(message(R"({"compute": {"cycles_min": 3e4}})").find("compute") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
