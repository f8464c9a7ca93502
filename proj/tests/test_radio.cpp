#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "v2v/errors.hpp"
#include "v2v/radio.hpp"
#include "v2v/units.hpp"

using namespace v2v;

TEST_CASE("pathloss examples") {
  BlockageParams p;
  p.table = {{2.0, 60.0}};
  CHECK(channel_gain_db(1.0, 0, p) == doctest::Approx(60.015));
  CHECK(channel_gain_db(1.0, 7, p) == doctest::Approx(60.015));
  p.table = {{2.66, 68.0}};
  CHECK(channel_gain_db(100.0, 0, p) == doctest::Approx(122.7).epsilon(1e-12));
  const double s = 37.0;
  CHECK(channel_gain_db(2 * s, 0, p) - channel_gain_db(s, 0, p) ==
        doctest::Approx(10 * 2.66 * std::log10(2.0) + 0.015 * s));
  CHECK_THROWS_AS(channel_gain_db(0.0, 0, p), std::domain_error);
}

TEST_CASE("blockage table saturates") {
  BlockageParams p;
  CHECK(&p.at(100) == &p.table.back());
  CHECK(channel_gain_db(50, 3, p) > channel_gain_db(50, 0, p));
}

TEST_CASE("antenna gain examples") {
  const double q = std::numbers::pi / 4;
  CHECK(antenna_gain(q, 0.0, 0.0) == doctest::Approx(8.0));
  const double phi = deg_to_rad(5);
  CHECK(antenna_gain(phi, phi / 2, 0.1) == mainlobe_gain(phi, 0.1));
  CHECK(antenna_gain(phi, -phi / 2, 0.1) == mainlobe_gain(phi, 0.1));
  CHECK(antenna_gain(phi, deg_to_rad(30), 0.1) == 0.1);
  BeamState b;
  b.tx = {phi, 0.0};
  b.rx = {q, 0.0};
  b.error_tx = deg_to_rad(3);
  AntennaConfig cfg;
  CHECK(antenna_gain(b, Endpoint::kTx, cfg) == cfg.sidelobe_gain);
  CHECK(antenna_gain(b, Endpoint::kRx, cfg) == mainlobe_gain(q, cfg.sidelobe_gain));
}

TEST_CASE("antenna energy is conserved") {
  for (double g : {0.0, 0.01, 0.1})
    for (double deg = 1.0; deg <= 360.0; deg += 0.5) {
      const double phi = deg_to_rad(deg);
      CHECK(phi * mainlobe_gain(phi, g) + (kTwoPi - phi) * g == doctest::Approx(kTwoPi).epsilon(1e-12));
    }
}

TEST_CASE("alignment delay examples") {
  AntennaConfig cfg;
  const double psi = cfg.sector_beamwidth;
  CHECK(alignment_delay(psi, psi, cfg, 2.0) == doctest::Approx(0.02));
  const double five = deg_to_rad(5);
  CHECK(alignment_delay(five, five, cfg, 2.0) == doctest::Approx(1.62));
  // On the bound the delay fills the slot and the rate collapses.
  const double edge = std::sqrt(min_beamwidth_product(cfg, 2.0));
  CHECK(alignment_delay(edge, edge, cfg, 2.0) == doctest::Approx(2.0));
  CHECK(link_rate(1000.0, alignment_delay(edge, edge, cfg, 2.0), 2.0, 2.16e9, true) == doctest::Approx(0.0));
  CHECK_THROWS_AS(alignment_delay(edge * 0.9, edge, cfg, 2.0), ConstraintViolation);
}

TEST_CASE("alignment delay decreases in each width") {
  AntennaConfig cfg;
  double last = 1e9;
  for (double deg = 5; deg <= 45; deg += 1) {
    const double tau = alignment_delay(deg_to_rad(deg), deg_to_rad(10), cfg, 2.0);
    CHECK(tau < last);
    last = tau;
  }
}

TEST_CASE("rate examples") {
  CHECK(shannon_rate(0.0, 2.16e9) == 0.0);
  CHECK(link_rate(0.0, 0.5, 2.0, 2.16e9, true) == 0.0);
  CHECK(link_rate(db_to_linear(15), 0.0, 2.0, 2.16e9, false) == doctest::Approx(1.09e10).epsilon(0.005));
  CHECK(link_rate(10.0, 0.5, 2.0, 1e9, true) == doctest::Approx(0.75 * 1e9 * std::log2(11.0)));
  CHECK(link_rate(10.0, 0.5, 2.0, 1e9, false) == doctest::Approx(1e9 * std::log2(11.0)));
}

namespace {

struct Instance {
  std::vector<LinkGeometry> geo;
  std::vector<oracle::Link> ref;
  std::vector<std::vector<double>> gains;
  ChannelMatrix matrix{0};
};

Instance random_instance(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> x(0, 200), y(0, 18), w(deg_to_rad(5), deg_to_rad(45)),
      jitter(-0.05, 0.05), g(1e-12, 1e-8);
  Instance in;
  in.matrix = ChannelMatrix(n);
  in.gains.assign(n, std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const Point a{x(rng), y(rng)};
    const Point b{x(rng), y(rng)};
    const double wt = w(rng);
    const double wr = w(rng);
    // Steering slightly off the partner to exercise both gain branches.
    const double st = bearing(a, b) + jitter(rng);
    const double sr = bearing(b, a) + jitter(rng);
    in.geo.push_back({a, b, {wt, st}, {wr, sr}});
    in.ref.push_back({a.x, a.y, b.x, b.y, wt, st, wr, sr});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      in.gains[i][j] = g(rng);
      in.matrix(i, j) = in.gains[i][j];
    }
  return in;
}

}  // namespace

TEST_CASE("sinr matches the brute-force oracle") {
  RadioConfig radio;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const auto in = random_instance(rng, n);
    const double side = trial % 3 == 0 ? 0.0 : 0.1;
    InterferenceModel model(in.geo, in.matrix, radio, side);
    std::vector<double> tw, rw;
    for (const auto& l : in.geo) {
      tw.push_back(l.tx_beam.width);
      rw.push_back(l.rx_beam.width);
    }
    const auto all = model.sinr_all(tw, rw);
    for (std::size_t k = 0; k < n; ++k) {
      const double expected = oracle::sinr(in.ref, in.gains, k, radio.tx_power_watt(), radio.noise_watt(), side);
      REQUIRE(sinr(in.geo, in.matrix, k, radio, side) == doctest::Approx(expected).epsilon(1e-12));
      REQUIRE(all[k] == model.sinr(k, tw, rw));
    }
  }
}

TEST_CASE("sinr with no interferers is the snr") {
  RadioConfig radio;
  std::mt19937_64 rng(2);
  const auto in = random_instance(rng, 1);
  const double p = radio.tx_power_watt();
  const double g_tx = gain_toward(in.geo[0].tx, in.geo[0].tx_beam, in.geo[0].rx, 0.1);
  const double g_rx = gain_toward(in.geo[0].rx, in.geo[0].rx_beam, in.geo[0].tx, 0.1);
  CHECK(sinr(in.geo, in.matrix, 0, radio, 0.1) ==
        doctest::Approx(p * g_tx * in.gains[0][0] * g_rx / radio.noise_watt()).epsilon(1e-12));
}

TEST_CASE("an interferer in the receiver sidelobe with zero sidelobe gain is invisible") {
  RadioConfig radio;
  const Point a{0, 0}, b{50, 0}, c{50, 40}, d{90, 40};
  LinkGeometry l0{a, b, {deg_to_rad(10), bearing(a, b)}, {deg_to_rad(10), bearing(b, a)}};
  LinkGeometry l1{c, d, {deg_to_rad(10), bearing(c, d)}, {deg_to_rad(10), bearing(d, c)}};
  ChannelMatrix g(2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) g(i, j) = 1e-9;
  const std::vector<LinkGeometry> one{l0};
  const std::vector<LinkGeometry> two{l0, l1};
  ChannelMatrix g1(1);
  g1(0, 0) = 1e-9;
  CHECK(sinr(two, g, 0, radio, 0.0) == sinr(one, g1, 0, radio, 0.0));
}

TEST_CASE("rate does not increase with interferer power") {
  RadioConfig radio;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto in = random_instance(rng, 3);
    const double before = shannon_rate(sinr(in.geo, in.matrix, 0, radio, 0.1), radio.bandwidth_hz);
    in.matrix(1, 0) = in.gains[1][0] * 10;
    const double after = shannon_rate(sinr(in.geo, in.matrix, 0, radio, 0.1), radio.bandwidth_hz);
    CHECK(after <= before);
  }
}

TEST_CASE("single-link rate is monotone in distance without sidelobes") {
  RadioConfig radio;
  BlockageParams p;
  double last = 1e30;
  for (double s = 1; s <= 300; s += 1) {
    const Point a{0, 0}, b{s, 0};
    const std::vector<LinkGeometry> l{{a, b, {0.1, 0.0}, {0.1, std::numbers::pi}}};
    ChannelMatrix g(1);
    g(0, 0) = channel_gain_linear(s, 0, p);
    const double r = shannon_rate(sinr(l, g, 0, radio, 0.0), radio.bandwidth_hz);
    CHECK(r <= last);
    last = r;
  }
}

TEST_CASE("drift: same speed keeps alignment") {
  const Point tx{100, 1.5}, rx{140, 4.5};
  const auto s = drift_beams(tx, rx, 130, 130, 100.0, deg_to_rad(5), deg_to_rad(5));
  CHECK(s.error_tx == doctest::Approx(0.0));
  CHECK(s.error_rx == doctest::Approx(0.0));
}

TEST_CASE("drift matches a bearing-change oracle") {
  const Point tx{100, 1.5}, rx{110, 7.5};
  const double vtx = 140, vrx = 90, dt = 100;
  const auto s = drift_beams(tx, rx, vtx, vrx, dt, deg_to_rad(5), deg_to_rad(45));
  const double dx = (vrx - vtx) / 3.6 * dt / 1000.0;
  const double before = std::atan2(6.0, 10.0);
  const double after = std::atan2(6.0, 10.0 + dx);
  CHECK(s.error_tx == doctest::Approx(after - before).epsilon(1e-12));
  // A 5-degree beam loses the partner once the drift exceeds 2.5 degrees.
  const bool lost = std::abs(after - before) > deg_to_rad(2.5);
  CHECK(lost);
  CHECK(antenna_gain(s, Endpoint::kTx, AntennaConfig{}) == AntennaConfig{}.sidelobe_gain);
  CHECK(antenna_gain(s, Endpoint::kRx, AntennaConfig{}) == mainlobe_gain(deg_to_rad(45), 0.1));
}
