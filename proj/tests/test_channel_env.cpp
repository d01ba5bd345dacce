#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "otafl/channel_env.hpp"

using namespace otafl;

TEST_CASE("place_nodes puts every node inside the square") {
  const Topology topo = place_nodes(7, 500.0, 3, 6, 4);
  CHECK(topo.num_ues() == 3);
  CHECK(topo.num_aps() == 6);
  CHECK(topo.n_rx == 4);
  for (const auto& p : topo.ues) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 500.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 500.0);
  }
  for (const auto& p : topo.aps) {
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 500.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 500.0);
  }
}

TEST_CASE("place_nodes is seeded") {
  const Topology a = place_nodes(7, 500.0, 3, 6);
  const Topology b = place_nodes(7, 500.0, 3, 6);
  const Topology c = place_nodes(8, 500.0, 3, 6);
  bool differs = false;
  for (int k = 0; k < 3; ++k) {
    CHECK(a.ues[k].x == b.ues[k].x);
    CHECK(a.ues[k].y == b.ues[k].y);
    differs = differs || a.ues[k].x != c.ues[k].x;
  }
  for (int l = 0; l < 6; ++l) CHECK(a.aps[l].x == b.aps[l].x);
  CHECK(differs);
}

TEST_CASE("place_nodes rejects degenerate inputs") {
  CHECK_THROWS_AS(place_nodes(1, 500.0, 0, 6), std::invalid_argument);
  CHECK_THROWS_AS(place_nodes(1, 500.0, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(place_nodes(1, 0.0, 3, 6), std::invalid_argument);
  CHECK_THROWS_AS(place_nodes(1, -5.0, 3, 6), std::invalid_argument);
}

TEST_CASE("free-space anchor at one metre, 2.4 GHz") {
  // 20 log10(4 pi d0 f / c)
  const double expected = 20.0 * std::log10(4.0 * std::numbers::pi * 2.4e9 / 299792458.0);
  PathLossParams p;
  CHECK(path_loss_db(1.0, p) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(path_loss_db(1.0, p) == doctest::Approx(40.05).epsilon(1e-3));
}

TEST_CASE("log-distance slope") {
  PathLossParams p;
  p.exponent = 3.0;
  CHECK(path_loss_db(10.0, p) - path_loss_db(1.0, p) == doctest::Approx(30.0).epsilon(1e-12));
  double prev = path_loss_db(1.0, p);
  for (double d = 2.0; d < 1000.0; d *= 1.7) {
    const double now = path_loss_db(d, p);
    CHECK(now > prev);
    prev = now;
  }
}

TEST_CASE("path loss clamps below d0 and rejects non-positive distance") {
  PathLossParams p;
  CHECK(path_loss_db(0.25, p) == path_loss_db(1.0, p));
  CHECK_THROWS_AS(path_loss_db(0.0, p), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_db(-1.0, p), std::invalid_argument);
}

TEST_CASE("large-scale gains are positive and finite at the reference geometry") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Topology topo = place_nodes(seed, 500.0, 3, 6, 4);
    const LargeScaleGains g = large_scale_gains(topo, {});
    CHECK(g.beta.rows() == 3);
    CHECK(g.beta.cols() == 6);
    CHECK((g.beta.array() > 0.0).all());
    CHECK(g.beta.allFinite());
    // Worst case is the square's diagonal.
    CHECK(g.beta.minCoeff() >= db_to_linear(-path_loss_db(500.0 * std::sqrt(2.0), {})) * 0.999);
  }
}

TEST_CASE("coincident UE and AP are clamped to d0") {
  Topology topo;
  topo.area_side = 10.0;
  topo.n_rx = 1;
  topo.ues = {{3.0, 3.0}};
  topo.aps = {{3.0, 3.0}};
  const LargeScaleGains g = large_scale_gains(topo, {});
  CHECK(g.beta(0, 0) == doctest::Approx(db_to_linear(-path_loss_db(1.0, {}))));
}

TEST_CASE("sample_channel is keyed by seed and round") {
  const Topology topo = place_nodes(3, 500.0, 3, 6, 4);
  const LargeScaleGains g = large_scale_gains(topo, {});
  const ChannelRealization a = sample_channel(topo, g, 5, 11);
  const ChannelRealization b = sample_channel(topo, g, 5, 11);
  const ChannelRealization c = sample_channel(topo, g, 6, 11);
  CHECK(a.all_finite());
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 6; ++l) {
      CHECK(a.at(k, l) == b.at(k, l));
      CHECK(a.at(k, l) != c.at(k, l));
    }
  }
  LargeScaleGains wrong{RMat::Ones(2, 6)};
  CHECK_THROWS_AS(sample_channel(topo, wrong, 1, 1), std::invalid_argument);
}

TEST_CASE("Rayleigh power matches beta by Monte Carlo") {
  Topology topo;
  topo.area_side = 100.0;
  topo.n_rx = 4;
  topo.ues = {{10.0, 10.0}, {80.0, 20.0}};
  topo.aps = {{50.0, 50.0}};
  const LargeScaleGains g = large_scale_gains(topo, {});
  const int draws = 100000;
  for (int k = 0; k < 2; ++k) {
    std::vector<double> samples;
    samples.reserve(draws);
    for (int t = 1; t <= draws; ++t) {
      // Only this pair is needed; regenerate per round.
      const auto ch = sample_channel(topo, g, t, 99);
      samples.push_back(ch.at(k, 0).squaredNorm() / topo.n_rx / g.beta(k, 0));
    }
    const auto ms = oracle::mean_se(samples);
    CHECK(std::abs(ms.mean - 1.0) < 3.0 * ms.se);
  }
}

TEST_CASE("consecutive rounds are uncorrelated") {
  Topology topo;
  topo.area_side = 100.0;
  topo.n_rx = 1;
  topo.ues = {{10.0, 10.0}};
  topo.aps = {{50.0, 50.0}};
  LargeScaleGains g{RMat::Ones(1, 1)};
  const int n = 20000;
  std::vector<double> xs, ys;
  for (int t = 1; t <= n; ++t) {
    xs.push_back(sample_channel(topo, g, t, 5).at(0, 0)(0).real());
    ys.push_back(sample_channel(topo, g, t + 1, 5).at(0, 0)(0).real());
  }
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  sx /= n;
  sy /= n;
  for (int i = 0; i < n; ++i) {
    sxy += (xs[i] - sx) * (ys[i] - sy);
    sxx += (xs[i] - sx) * (xs[i] - sx);
    syy += (ys[i] - sy) * (ys[i] - sy);
  }
  const double corr = sxy / std::sqrt(sxx * syy);
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
}
