#include "otafl/channel_env.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "otafl/rng.hpp"

namespace otafl {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

ChannelRealization::ChannelRealization(int num_ues, int num_aps, int n_rx, int round)
    : num_ues_(num_ues), num_aps_(num_aps), n_rx_(n_rx), round_(round) {
  if (num_ues < 1 || num_aps < 1 || n_rx < 1) {
    throw std::invalid_argument("ChannelRealization: dimensions must be positive");
  }
  h_.assign(static_cast<std::size_t>(num_ues) * static_cast<std::size_t>(num_aps),
            CVec::Zero(n_rx));
}

bool ChannelRealization::all_finite() const {
  for (const auto& v : h_) {
    if (!v.allFinite()) return false;
  }
  return true;
}

Topology place_nodes(std::uint64_t seed, double area_side, int num_ues, int num_aps, int n_rx) {
  if (num_ues < 1) throw std::invalid_argument("place_nodes: need at least one UE");
  if (num_aps < 1) throw std::invalid_argument("place_nodes: need at least one AP");
  if (!(area_side > 0.0)) throw std::invalid_argument("place_nodes: area side must be positive");
  if (n_rx < 1) throw std::invalid_argument("place_nodes: need at least one receive antenna");

  auto rng = make_stream(seed, Stream::placement);
  std::uniform_real_distribution<double> coord(0.0, area_side);
  Topology topo;
  topo.area_side = area_side;
  topo.n_rx = n_rx;
  topo.ues.reserve(static_cast<std::size_t>(num_ues));
  topo.aps.reserve(static_cast<std::size_t>(num_aps));
  // UEs first, then APs; x before y.
  for (int k = 0; k < num_ues; ++k) {
    const double x = coord(rng);
    const double y = coord(rng);
    topo.ues.push_back({x, y});
  }
  for (int l = 0; l < num_aps; ++l) {
    const double x = coord(rng);
    const double y = coord(rng);
    topo.aps.push_back({x, y});
  }
  return topo;
}

double path_loss_db(double distance_m, const PathLossParams& params) {
  if (!(distance_m > 0.0)) {
    throw std::invalid_argument("path_loss_db: distance must be positive, got " +
                                std::to_string(distance_m));
  }
  if (!(params.d0 > 0.0) || !(params.carrier_hz > 0.0)) {
    throw std::invalid_argument("path_loss_db: d0 and carrier must be positive");
  }
  const double d = std::max(distance_m, params.d0);
  const double free_space_d0 =
      20.0 * std::log10(4.0 * std::numbers::pi * params.d0 * params.carrier_hz / kSpeedOfLight);
  return free_space_d0 + 10.0 * params.exponent * std::log10(d / params.d0);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

LargeScaleGains large_scale_gains(const Topology& topology, const PathLossParams& params) {
  const int K = topology.num_ues();
  const int L = topology.num_aps();
  LargeScaleGains gains{RMat(K, L)};
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      // Coincident placements are clamped to d0 instead of rejected.
      const double d = std::max(distance(topology.ues[k], topology.aps[l]), params.d0);
      gains.beta(k, l) = db_to_linear(-path_loss_db(d, params));
    }
  }
  return gains;
}

ChannelRealization sample_channel(const Topology& topology, const LargeScaleGains& gains,
                                  int round, std::uint64_t seed) {
  const int K = topology.num_ues();
  const int L = topology.num_aps();
  if (gains.beta.rows() != K || gains.beta.cols() != L) {
    throw std::invalid_argument("sample_channel: gains do not match topology");
  }
  ChannelRealization ch(K, L, topology.n_rx, round);
  auto rng = make_stream(seed, Stream::fading, static_cast<std::uint64_t>(round));
  // CN(0, 1): real and imaginary parts each carry variance 1/2.
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const double amp = std::sqrt(gains.beta(k, l));
      CVec& h = ch.at(k, l);
      for (int n = 0; n < topology.n_rx; ++n) {
        const double re = normal(rng);
        const double im = normal(rng);
        h(n) = amp * cplx(re, im);
      }
    }
  }
  return ch;
}

}  // namespace otafl
