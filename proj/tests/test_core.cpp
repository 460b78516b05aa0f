#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <string>

#include "cmag/config_io.hpp"
#include "cmag/core.hpp"
#include "cmag/rng.hpp"

using namespace cmag;

TEST_CASE("default config matches the documented parameter set") {
  const SimConfig cfg = default_config();
  CHECK(cfg.n_agents == 80);
  CHECK(cfg.ba_m == 3);
  CHECK(cfg.prosocial_mean == Catch::Approx(0.42));
  CHECK(cfg.prosocial_std == Catch::Approx(0.12));
  CHECK(cfg.susceptibility_mean == Catch::Approx(0.55));
  CHECK(cfg.susceptibility_std == Catch::Approx(0.18));
  CHECK(cfg.horizon == 100);
  CHECK(cfg.deploy_interval == 10);
  CHECK(cfg.target_fraction == Catch::Approx(0.12));
  CHECK(cfg.base_decay == Catch::Approx(0.06));
  CHECK(cfg.diffusion_rate == Catch::Approx(0.12));
  CHECK(cfg.exposure_cap == Catch::Approx(5.0));
  CHECK(cfg.n_candidates == 6);
  CHECK(cfg.violation_prob_adversarial == Catch::Approx(0.70));
  CHECK(cfg.violation_prob_benign == Catch::Approx(0.15));
  CHECK(cfg.dose_scale > 0.0);  // calibration knob
  CHECK(cfg.hub_quantile == Catch::Approx(0.75));
  CHECK(cfg.steady_window == 15);

  CHECK(cfg.constitution.forbidden_themes == std::set<Theme>{Theme::fear});
  CHECK(cfg.constitution.forbidden_claims ==
        std::set<ClaimType>{ClaimType::exaggerated, ClaimType::misleading});
  CHECK(cfg.constitution.max_intensity == Catch::Approx(0.80));
  CHECK(cfg.constitution.intensity_penalty == Catch::Approx(0.6));
  CHECK(cfg.constitution.exposure_multiplier == Catch::Approx(0.70));
  CHECK(cfg.constitution.governance_decay == Catch::Approx(0.03));

  CHECK(cfg.dynamics.logit_bias == Catch::Approx(-0.25));
  CHECK(cfg.dynamics.prosocial_gain == Catch::Approx(2.1));
  CHECK(cfg.dynamics.exposure_gain == Catch::Approx(0.85));

  CHECK(cfg.metrics.autonomy_coeff == Catch::Approx(0.18));
  CHECK(cfg.metrics.integrity_coeff == Catch::Approx(0.033));
  CHECK(cfg.metrics.fairness_coeff == Catch::Approx(0.22));
}

TEST_CASE("config validation") {
  CHECK(validate_config(default_config()).ok());

  SimConfig bad = default_config();
  bad.target_fraction = 0.0;
  auto r = validate_config(bad);
  REQUIRE_FALSE(r.ok());
  bool mentions = false;
  for (const auto& v : r.violations)
    if (v.find("target_fraction") != std::string::npos) mentions = true;
  CHECK(mentions);

  SimConfig bad2 = default_config();
  bad2.constitution.exposure_multiplier = 1.5;
  auto r2 = validate_config(bad2);
  REQUIRE_FALSE(r2.ok());
  mentions = false;
  for (const auto& v : r2.violations)
    if (v.find("exposure_multiplier") != std::string::npos) mentions = true;
  CHECK(mentions);
}

TEST_CASE("sigmoid evaluation and shape") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(0.632) == Catch::Approx(0.6529).margin(1e-4));
  CHECK(sigmoid(6.1) == Catch::Approx(0.99776).margin(1e-5));
  CHECK(sigmoid(-0.25) == Catch::Approx(0.4378).margin(1e-4));

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double x = rng.uniform(-10.0, 10.0);
    const double y = x + rng.uniform(0.001, 2.0);
    CHECK(sigmoid(x) < sigmoid(y));
    CHECK(sigmoid(x) + sigmoid(-x) == Catch::Approx(1.0).margin(1e-12));
    CHECK(sigmoid(x) > 0.0);
    CHECK(sigmoid(x) < 1.0);
  }
}

TEST_CASE("intensity bands") {
  CHECK(band_of(0.0) == IntensityBand::low);
  CHECK(band_of(0.39) == IntensityBand::low);
  CHECK(band_of(0.40) == IntensityBand::medium);
  CHECK(band_of(0.69) == IntensityBand::medium);
  CHECK(band_of(0.70) == IntensityBand::high);
  CHECK(band_of(1.0) == IntensityBand::high);

  CHECK(band_contains(IntensityBand::low, 0.2));
  CHECK_FALSE(band_contains(IntensityBand::low, 0.4));
  CHECK(band_contains(IntensityBand::medium, 0.4));
  CHECK(band_contains(IntensityBand::high, 1.0));
  CHECK_FALSE(band_contains(IntensityBand::high, 0.69));
}

TEST_CASE("enum labels round-trip") {
  for (Theme v : kAllThemes)
    CHECK(enum_from_string<Theme>(to_string(v)) == v);
  for (ClaimType v : kAllClaims)
    CHECK(enum_from_string<ClaimType>(to_string(v)) == v);
  for (Targeting v : kAllTargetings)
    CHECK(enum_from_string<Targeting>(to_string(v)) == v);
  for (Timing v : kAllTimings)
    CHECK(enum_from_string<Timing>(to_string(v)) == v);
  for (GovernanceMode v : kAllModes)
    CHECK(enum_from_string<GovernanceMode>(to_string(v)) == v);
  CHECK(enum_from_string<ThreatMode>("adversarial") == ThreatMode::adversarial);
  CHECK(enum_from_string<ThreatMode>("benign") == ThreatMode::benign);
  CHECK_FALSE(enum_from_string<Theme>("dread").has_value());
  CHECK_FALSE(enum_from_string<GovernanceMode>("").has_value());
}

TEST_CASE("config serialization round-trips") {
  Rng rng(101);
  for (int i = 0; i < 25; ++i) {
    SimConfig cfg = default_config();
    cfg.n_agents = 10 + static_cast<int>(rng.uniform_int(200));
    cfg.prosocial_mean = rng.uniform(0.1, 0.9);
    cfg.base_decay = rng.uniform(0.01, 0.2);
    cfg.dose_scale = rng.uniform(0.5, 6.0);
    cfg.constitution.max_intensity = rng.uniform(0.5, 1.0);
    cfg.dynamics.exposure_gain = rng.uniform(0.1, 2.0);
    cfg.metrics.fairness_coeff = rng.uniform(0.05, 0.5);
    cfg.steady_window = 5 + static_cast<int>(rng.uniform_int(20));
    const SimConfig back = config_from_string(config_to_string(cfg));
    REQUIRE(back == cfg);
  }
}

TEST_CASE("config parsing is strict about unknown keys and types") {
  CHECK_THROWS_AS(config_from_string("{\"n_agent\": 80}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_string("{\"constitution\": {\"x\": 1}}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_string("{\"n_agents\": \"eighty\"}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_string("not json"), std::invalid_argument);

  // missing keys keep their defaults
  const SimConfig cfg = config_from_string("{\"n_agents\": 12}");
  CHECK(cfg.n_agents == 12);
  CHECK(cfg.horizon == default_config().horizon);
  CHECK(cfg.constitution == default_config().constitution);
}

TEST_CASE("generator reproducibility and distributions") {
  Rng a(42), b(42), c(43);
  bool diverged = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a.next();
    CHECK(x == b.next());
    if (x != c.next()) diverged = true;
  }
  CHECK(diverged);

  Rng r(5);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 10000.0 == Catch::Approx(0.5).margin(0.02));

  int hits = 0;
  for (int i = 0; i < 10000; ++i)
    if (r.bernoulli(0.3)) ++hits;
  CHECK(hits / 10000.0 == Catch::Approx(0.3).margin(0.02));

  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t v = r.uniform_int(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);

  double nsum = 0.0, nsq = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const double x = r.normal(0.42, 0.12);
    nsum += x;
    nsq += x * x;
  }
  const double mean = nsum / draws;
  const double sd = std::sqrt(nsq / draws - mean * mean);
  CHECK(mean == Catch::Approx(0.42).margin(0.005));
  CHECK(sd == Catch::Approx(0.12).margin(0.005));
}

TEST_CASE("named substreams are stable and distinct") {
  Rng a = derive_stream(9, "candidates", 3);
  Rng b = derive_stream(9, "candidates", 3);
  for (int i = 0; i < 16; ++i) REQUIRE(a.next() == b.next());

  Rng c = derive_stream(9, "candidates", 4);
  Rng d = derive_stream(9, "targeting", 3);
  Rng e = derive_stream(10, "candidates", 3);
  Rng base = derive_stream(9, "candidates", 3);
  bool c_diff = false, d_diff = false, e_diff = false;
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t x = base.next();
    if (x != c.next()) c_diff = true;
    if (x != d.next()) d_diff = true;
    if (x != e.next()) e_diff = true;
  }
  CHECK(c_diff);
  CHECK(d_diff);
  CHECK(e_diff);
}
