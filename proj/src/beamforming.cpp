#include "otafl/beamforming.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace otafl {

BeamformingInputs build_inputs(const ChannelRealization& channels, const RVec& p_hat) {
  const int K = channels.num_ues();
  const int L = channels.num_aps();
  const int Nr = channels.n_rx();
  if (p_hat.size() != K) throw std::invalid_argument("build_inputs: amplitude vector size");
  const Eigen::Index n = static_cast<Eigen::Index>(Nr) * L;
  BeamformingInputs in{CVec::Zero(n), std::vector<CVec>(static_cast<std::size_t>(K), CVec::Zero(n)),
                       Nr};
  for (int k = 0; k < K; ++k) {
    CVec& uk = in.u_k[static_cast<std::size_t>(k)];
    for (int l = 0; l < L; ++l) {
      uk.segment(static_cast<Eigen::Index>(l) * Nr, Nr) = channels.at(k, l) * p_hat(k);
    }
    in.u += uk;
  }
  return in;
}

double phi_stacked(const BeamformingInputs& in, const CVec& v, const GapCoefficients& coeffs,
                   double sigma2, int q) {
  const double K = static_cast<double>(in.u_k.size());
  double per_user = 0.0;
  for (const auto& uk : in.u_k) per_user += std::norm(v.dot(uk) - 1.0 / K);
  return coeffs.A * std::norm(v.dot(in.u) - 1.0) + coeffs.C * per_user +
         coeffs.B * static_cast<double>(q) * sigma2 * v.squaredNorm();
}

namespace {

// The solution lies in the span of U = [u, u_1, ..., u_K]. Writing v = U x
// with D = diag(A, C, ..., C) reduces the system to
//   (reg D^{-1} + U^H U) x = (1, 1/K, ..., 1/K),
// which stays solvable as the noise term vanishes.
CVec mop_low_rank(const BeamformingInputs& in, const GapCoefficients& coeffs, double reg) {
  const double K = static_cast<double>(in.u_k.size());
  // Terms with a zero weight drop out of both sides.
  std::vector<const CVec*> cols;
  std::vector<double> weight, target;
  if (coeffs.A > 0.0) {
    cols.push_back(&in.u);
    weight.push_back(coeffs.A);
    target.push_back(1.0);
  }
  if (coeffs.C > 0.0) {
    for (const auto& uk : in.u_k) {
      cols.push_back(&uk);
      weight.push_back(coeffs.C);
      target.push_back(1.0 / K);
    }
  }
  const auto m = static_cast<Eigen::Index>(cols.size());
  if (m == 0) return CVec::Zero(in.u.size());
  CMat U(in.u.size(), m);
  CVec rhs(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    U.col(j) = *cols[static_cast<std::size_t>(j)];
    rhs(j) = target[static_cast<std::size_t>(j)];
  }
  CMat small = U.adjoint() * U;
  for (Eigen::Index j = 0; j < m; ++j) small(j, j) += reg / weight[static_cast<std::size_t>(j)];
  return U * small.completeOrthogonalDecomposition().solve(rhs);
}

}  // namespace

BeamformingVector mop_beamformer(const BeamformingInputs& in, const GapCoefficients& coeffs,
                                 double sigma2, int q) {
  const double reg = coeffs.B * static_cast<double>(q) * sigma2;
  if (!(reg > 0.0)) {
    throw std::invalid_argument("mop_beamformer: B q sigma^2 must be positive");
  }
  const Eigen::Index n = in.u.size();
  const double K = static_cast<double>(in.u_k.size());

  CMat system = CMat::Identity(n, n) * reg;
  system.selfadjointView<Eigen::Lower>().rankUpdate(in.u, coeffs.A);
  CVec rhs = coeffs.A * in.u;
  for (const auto& uk : in.u_k) {
    system.selfadjointView<Eigen::Lower>().rankUpdate(uk, coeffs.C);
    rhs += (coeffs.C / K) * uk;
  }
  Eigen::LLT<CMat, Eigen::Lower> llt(system);
  if (llt.info() == Eigen::Success) {
    CVec v = llt.solve(rhs);
    const CVec residual = system.selfadjointView<Eigen::Lower>() * v - rhs;
    if (residual.norm() <= 1e-10 * rhs.norm()) return {std::move(v), in.n_rx};
  }
  return {mop_low_rank(in, coeffs, reg), in.n_rx};
}

BeamformingVector mrc_beamformer(const ChannelRealization& channels, const LargeScaleGains& gains,
                                 const RVec& p_hat, const GapCoefficients& coeffs, double sigma2,
                                 int q) {
  const int K = channels.num_ues();
  const int L = channels.num_aps();
  const int Nr = channels.n_rx();
  if (gains.beta.rows() != K || gains.beta.cols() != L) {
    throw std::invalid_argument("mrc_beamformer: gains do not match channels");
  }
  BeamformingVector d = BeamformingVector::zeros(Nr, L);
  for (int l = 0; l < L; ++l) {
    auto seg = d.v.segment(static_cast<Eigen::Index>(l) * Nr, Nr);
    for (int k = 0; k < K; ++k) {
      if (!(gains.beta(k, l) > 0.0)) throw std::invalid_argument("mrc_beamformer: beta must be > 0");
      seg += channels.at(k, l) / gains.beta(k, l);
    }
  }
  const double dnorm2 = d.v.squaredNorm();
  if (!(dnorm2 > 0.0)) {
    std::cerr << "warning: mrc_beamformer: zero combining direction, using v = 0\n";
    return d;
  }

  // phi(c d) is a real quadratic in c; take its stationary point.
  const BeamformingInputs in = build_inputs(channels, p_hat);
  const cplx alpha = d.v.dot(in.u);
  double curvature = coeffs.A * std::norm(alpha) +
                     coeffs.B * static_cast<double>(q) * sigma2 * dnorm2;
  double linear = coeffs.A * alpha.real();
  for (const auto& uk : in.u_k) {
    const cplx ak = d.v.dot(uk);
    curvature += coeffs.C * std::norm(ak);
    linear += coeffs.C / K * ak.real();
  }
  d.v *= linear / curvature;
  return d;
}

}  // namespace otafl
