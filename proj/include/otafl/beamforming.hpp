#pragma once

#include <vector>

#include "otafl/channel_env.hpp"
#include "otafl/ota_link.hpp"

namespace otafl {

/// u = stack_l(sum_k h_{k,l} p_hat_k) and u_k = stack_l(h_{k,l} p_hat_k).
struct BeamformingInputs {
  CVec u;
  std::vector<CVec> u_k;
  int n_rx = 1;
};

BeamformingInputs build_inputs(const ChannelRealization& channels, const RVec& p_hat);

/// phi in stacked form:
/// A |v^H u - 1|^2 + C sum_k |v^H u_k - 1/K|^2 + B q sigma^2 ||v||^2.
double phi_stacked(const BeamformingInputs& in, const CVec& v, const GapCoefficients& coeffs,
                   double sigma2, int q);

/// Closed-form minimizer of phi over v. Solves
///   (A u u^H + C sum_k u_k u_k^H + B q sigma^2 I) v = A u + (C/K) sum_k u_k
/// with a Cholesky factorization of the Hermitian positive definite system,
/// falling back to the equivalent reduced system on span{u, u_k} when the
/// factorization fails or leaves a residual above 1e-10 relative.
BeamformingVector mop_beamformer(const BeamformingInputs& in, const GapCoefficients& coeffs,
                                 double sigma2, int q);

/// Matched-filter direction d_l = sum_k h_{k,l} / beta_{k,l}, scaled by the
/// exact minimizer of phi along the line {c d : c real}.
BeamformingVector mrc_beamformer(const ChannelRealization& channels, const LargeScaleGains& gains,
                                 const RVec& p_hat, const GapCoefficients& coeffs, double sigma2,
                                 int q);

}  // namespace otafl
