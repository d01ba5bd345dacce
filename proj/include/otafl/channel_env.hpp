#pragma once

#include <cstdint>
#include <vector>

#include "otafl/types.hpp"

namespace otafl {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Static placement of K single-antenna UEs and L APs with N_r antennas each.
struct Topology {
  std::vector<Point> ues;
  std::vector<Point> aps;
  double area_side = 0.0;
  int n_rx = 1;

  int num_ues() const { return static_cast<int>(ues.size()); }
  int num_aps() const { return static_cast<int>(aps.size()); }
};

/// Log-distance model anchored at the free-space loss at d0.
struct PathLossParams {
  double carrier_hz = 2.4e9;
  double d0 = 1.0;
  double exponent = 3.0;
};

/// K x L linear power gains beta_{k,l}.
struct LargeScaleGains {
  RMat beta;
};

/// One round of small-scale x large-scale channels, h_{k,l} in C^{N_r}.
class ChannelRealization {
 public:
  ChannelRealization(int num_ues, int num_aps, int n_rx, int round);

  int num_ues() const { return num_ues_; }
  int num_aps() const { return num_aps_; }
  int n_rx() const { return n_rx_; }
  int round() const { return round_; }

  CVec& at(int k, int l) { return h_[index(k, l)]; }
  const CVec& at(int k, int l) const { return h_[index(k, l)]; }

  bool all_finite() const;

 private:
  std::size_t index(int k, int l) const {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(num_aps_) +
           static_cast<std::size_t>(l);
  }

  int num_ues_;
  int num_aps_;
  int n_rx_;
  int round_;
  std::vector<CVec> h_;
};

inline constexpr double kSpeedOfLight = 299792458.0;

Topology place_nodes(std::uint64_t seed, double area_side, int num_ues, int num_aps,
                     int n_rx = 1);

/// Free-space loss at d0 plus 10 n log10(d / d0). Distances below d0 are clamped.
double path_loss_db(double distance_m, const PathLossParams& params);

double db_to_linear(double db);

LargeScaleGains large_scale_gains(const Topology& topology, const PathLossParams& params);

/// Rayleigh draw h = sqrt(beta) g with g ~ CN(0, I). The stream is keyed by
/// (seed, round) so any round can be regenerated on its own.
ChannelRealization sample_channel(const Topology& topology, const LargeScaleGains& gains,
                                  int round, std::uint64_t seed);

}  // namespace otafl
