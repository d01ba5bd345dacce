#pragma once

#include <optional>
#include <random>
#include <span>

#include "otafl/channel_env.hpp"
#include "otafl/types.hpp"

namespace otafl {

/// Stacked receive combiner v = [r_1; ...; r_L], each r_l of length N_r.
struct BeamformingVector {
  CVec v;
  int n_rx = 1;

  int num_aps() const { return static_cast<int>(v.size()) / n_rx; }
  auto per_ap(int l) const { return v.segment(static_cast<Eigen::Index>(l) * n_rx, n_rx); }

  static BeamformingVector zeros(int n_rx, int num_aps) {
    return {CVec::Zero(static_cast<Eigen::Index>(n_rx) * num_aps), n_rx};
  }
};

/// Transmit powers p and amplitudes p_hat = sqrt(p), kept in lock step.
class PowerAllocation {
 public:
  PowerAllocation() = default;

  static PowerAllocation from_power(RVec p);
  static PowerAllocation from_amplitude(RVec p_hat);

  const RVec& power() const { return p_; }
  const RVec& amplitude() const { return p_hat_; }
  int size() const { return static_cast<int>(p_.size()); }

 private:
  RVec p_;
  RVec p_hat_;
};

/// Per-UE budgets used by the optimizer (already divided through by G^2 / q).
struct PowerBudget {
  RVec p_max;
  RVec p_ave;

  static PowerBudget uniform(int num_ues, double p_ave, double p_max);
  /// P = q * P_raw / G^2 applied elementwise to the raw per-round budgets.
  static PowerBudget from_raw(const RVec& raw_max, const RVec& raw_ave, int q, double G);

  void validate() const;
};

struct NoiseModel {
  double sigma2 = 0.0;  // per-antenna complex noise power, watts

  static NoiseModel from_dbm(double dbm);
};

/// Inputs to the round-indexed weights of the gap surrogate.
struct GapHyper {
  double G = 1.0;
  double S = 1.0;
  double mu = 0.0;
  int omega = 1;
  double eta = 0.05;  // fixed learning rate, eta_t = eta for all t
  int T = 1;
  double N = 0.0;  // reporting only
  double W = 0.0;  // reporting only
  std::optional<double> A_override;
  std::optional<double> B_override;
  std::optional<double> C_override;
};

struct GapCoefficients {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  int t = 1;
  double M = 1.0;
  double J = 1.0;
  double G = 1.0;
  double S = 1.0;
  double mu = 0.0;
  int omega = 1;
  double eta_prev = 0.05;
  double N = 0.0;
  double W = 0.0;
};

GapCoefficients gap_coefficients(const GapHyper& hyper, int t);

/// m_{k,l} = r_l^H h_{k,l} p_hat_k - 1/(LK), and H_k = sum_l r_l^H h_{k,l}.
struct Residuals {
  CMat m;  // K x L
  CVec H;  // K
};

Residuals residuals(const ChannelRealization& channels, const BeamformingVector& bf,
                    const RVec& p_hat);

/// Effective channels H_k alone.
CVec effective_channels(const ChannelRealization& channels, const BeamformingVector& bf);

/// gamma = q sigma^2 ||v||^2.
double noise_penalty(const BeamformingVector& bf, double sigma2, int q);

struct AggregationOutcome {
  CVec z;
  RVec w_bar;
  CVec epsilon;
  CMat m;
  CVec H;
  double gamma = 0.0;

  /// Real part of z, which becomes the next global model.
  RVec global_model() const { return z.real(); }
};

AggregationOutcome aggregate(std::span<const RVec> models, const ChannelRealization& channels,
                             const BeamformingVector& bf, const RVec& p_hat,
                             const NoiseModel& noise, std::mt19937_64& rng);

struct ErrorBounds {
  double bias = 0.0;
  double mse = 0.0;
};

ErrorBounds error_bounds(const CMat& m, double gamma, double G);

/// phi from residuals: A |sum m|^2 + C sum_k |sum_l m_kl|^2 + B gamma.
double phi(const Residuals& res, double gamma, const GapCoefficients& coeffs);

double phi(const ChannelRealization& channels, const BeamformingVector& bf, const RVec& p_hat,
           const GapCoefficients& coeffs, const NoiseModel& noise, int q);

/// The power-dependent part of phi for fixed effective channels:
/// A |sum_k p_hat_k H_k - 1|^2 + C sum_k |p_hat_k H_k - 1/K|^2.
double phi_power_part(const CVec& H, const RVec& p_hat, const GapCoefficients& coeffs);

}  // namespace otafl
