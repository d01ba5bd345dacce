#include "otafl/ota_link.hpp"

#include <cmath>
#include <stdexcept>

#include "otafl/rng.hpp"

namespace otafl {

PowerAllocation PowerAllocation::from_power(RVec p) {
  if ((p.array() < 0.0).any()) throw std::invalid_argument("PowerAllocation: negative power");
  PowerAllocation out;
  out.p_hat_ = p.array().sqrt();
  out.p_ = std::move(p);
  return out;
}

PowerAllocation PowerAllocation::from_amplitude(RVec p_hat) {
  if ((p_hat.array() < 0.0).any()) {
    throw std::invalid_argument("PowerAllocation: negative amplitude");
  }
  PowerAllocation out;
  out.p_ = p_hat.array().square();
  out.p_hat_ = std::move(p_hat);
  return out;
}

PowerBudget PowerBudget::uniform(int num_ues, double p_ave, double p_max) {
  PowerBudget b{RVec::Constant(num_ues, p_max), RVec::Constant(num_ues, p_ave)};
  b.validate();
  return b;
}

PowerBudget PowerBudget::from_raw(const RVec& raw_max, const RVec& raw_ave, int q, double G) {
  if (!(G > 0.0)) throw std::invalid_argument("PowerBudget::from_raw: G must be positive");
  const double scale = static_cast<double>(q) / (G * G);
  PowerBudget b{raw_max * scale, raw_ave * scale};
  b.validate();
  return b;
}

void PowerBudget::validate() const {
  if (p_max.size() != p_ave.size() || p_max.size() == 0) {
    throw std::invalid_argument("PowerBudget: size mismatch");
  }
  for (Eigen::Index k = 0; k < p_max.size(); ++k) {
    if (!(p_ave(k) > 0.0) || !(p_ave(k) <= p_max(k))) {
      throw std::invalid_argument("PowerBudget: need 0 < p_ave <= p_max for every UE");
    }
  }
}

NoiseModel NoiseModel::from_dbm(double dbm) { return {1e-3 * std::pow(10.0, dbm / 10.0)}; }

GapCoefficients gap_coefficients(const GapHyper& hyper, int t) {
  if (t < 1 || t > hyper.T) throw std::invalid_argument("gap_coefficients: need 1 <= t <= T");
  if (!(hyper.eta > 0.0) || hyper.omega < 1) {
    throw std::invalid_argument("gap_coefficients: need eta > 0 and omega >= 1");
  }
  GapCoefficients c;
  c.t = t;
  c.G = hyper.G;
  c.S = hyper.S;
  c.mu = hyper.mu;
  c.omega = hyper.omega;
  c.eta_prev = hyper.eta;
  c.N = hyper.N;
  c.W = hyper.W;

  auto contraction = [&](int) { return 1.0 - (hyper.omega - 1) * hyper.mu * hyper.eta; };
  c.M = contraction(t);
  // J_t = prod_{i=t}^{T} M_i / M_t
  double prod = 1.0;
  for (int i = t; i <= hyper.T; ++i) prod *= contraction(i);
  c.J = prod / c.M;

  const double G2 = hyper.G * hyper.G;
  c.A = c.J * G2 / (2.0 * c.eta_prev);
  c.B = hyper.S * hyper.S * c.eta_prev * hyper.omega + hyper.S;
  c.C = c.B * G2;
  if (hyper.A_override) c.A = *hyper.A_override;
  if (hyper.B_override) c.B = *hyper.B_override;
  if (hyper.C_override) c.C = *hyper.C_override;
  return c;
}

CVec effective_channels(const ChannelRealization& channels, const BeamformingVector& bf) {
  const int K = channels.num_ues();
  const int L = channels.num_aps();
  if (bf.n_rx != channels.n_rx() || bf.v.size() != static_cast<Eigen::Index>(L) * bf.n_rx) {
    throw std::invalid_argument("effective_channels: beamformer does not match channels");
  }
  CVec H = CVec::Zero(K);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) H(k) += bf.per_ap(l).dot(channels.at(k, l));
  }
  return H;
}

Residuals residuals(const ChannelRealization& channels, const BeamformingVector& bf,
                    const RVec& p_hat) {
  const int K = channels.num_ues();
  const int L = channels.num_aps();
  if (p_hat.size() != K) throw std::invalid_argument("residuals: amplitude vector size");
  if (bf.n_rx != channels.n_rx() || bf.v.size() != static_cast<Eigen::Index>(L) * bf.n_rx) {
    throw std::invalid_argument("residuals: beamformer does not match channels");
  }
  const double target = 1.0 / (static_cast<double>(L) * K);
  Residuals res{CMat(K, L), CVec::Zero(K)};
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      // Eigen's dot conjugates the first argument: r_l^H h_{k,l}.
      const cplx g = bf.per_ap(l).dot(channels.at(k, l));
      res.H(k) += g;
      res.m(k, l) = g * p_hat(k) - target;
    }
  }
  return res;
}

double noise_penalty(const BeamformingVector& bf, double sigma2, int q) {
  return static_cast<double>(q) * sigma2 * bf.v.squaredNorm();
}

AggregationOutcome aggregate(std::span<const RVec> models, const ChannelRealization& channels,
                             const BeamformingVector& bf, const RVec& p_hat,
                             const NoiseModel& noise, std::mt19937_64& rng) {
  const int K = channels.num_ues();
  const int L = channels.num_aps();
  const int Nr = channels.n_rx();
  if (static_cast<int>(models.size()) != K) {
    throw std::invalid_argument("aggregate: need one model per UE");
  }
  const Eigen::Index q = models.front().size();
  for (const auto& w : models) {
    if (w.size() != q) throw std::invalid_argument("aggregate: models differ in length");
  }

  Residuals res = residuals(channels, bf, p_hat);
  AggregationOutcome out;
  out.z = CVec::Zero(q);
  out.w_bar = RVec::Zero(q);
  for (int k = 0; k < K; ++k) {
    out.z += (res.H(k) * p_hat(k)) * models[static_cast<std::size_t>(k)].cast<cplx>();
    out.w_bar += models[static_cast<std::size_t>(k)];
  }
  out.w_bar /= static_cast<double>(K);

  if (noise.sigma2 > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * noise.sigma2));
    // One N_r x q noise block per AP; column j carries symbol j.
    for (int l = 0; l < L; ++l) {
      const auto r = bf.per_ap(l);
      for (Eigen::Index j = 0; j < q; ++j) {
        cplx acc = 0.0;
        for (int n = 0; n < Nr; ++n) {
          const double re = normal(rng);
          const double im = normal(rng);
          acc += std::conj(r(n)) * cplx(re, im);
        }
        out.z(j) += acc;
      }
    }
  }
  out.epsilon = out.z - out.w_bar.cast<cplx>();
  out.m = std::move(res.m);
  out.H = std::move(res.H);
  out.gamma = noise_penalty(bf, noise.sigma2, static_cast<int>(q));
  return out;
}

ErrorBounds error_bounds(const CMat& m, double gamma, double G) {
  if (!(G > 0.0)) throw std::invalid_argument("error_bounds: G must be positive");
  const double G2 = G * G;
  return {G2 * std::norm(m.sum()), G2 * m.rowwise().sum().squaredNorm() + gamma};
}

double phi(const Residuals& res, double gamma, const GapCoefficients& coeffs) {
  return coeffs.A * std::norm(res.m.sum()) + coeffs.C * res.m.rowwise().sum().squaredNorm() +
         coeffs.B * gamma;
}

double phi(const ChannelRealization& channels, const BeamformingVector& bf, const RVec& p_hat,
           const GapCoefficients& coeffs, const NoiseModel& noise, int q) {
  return phi(residuals(channels, bf, p_hat), noise_penalty(bf, noise.sigma2, q), coeffs);
}

double phi_power_part(const CVec& H, const RVec& p_hat, const GapCoefficients& coeffs) {
  const double K = static_cast<double>(H.size());
  const CVec aligned = H.cwiseProduct(p_hat.cast<cplx>());
  double per_user = 0.0;
  for (Eigen::Index k = 0; k < aligned.size(); ++k) per_user += std::norm(aligned(k) - 1.0 / K);
  return coeffs.A * std::norm(aligned.sum() - 1.0) + coeffs.C * per_user;
}

}  // namespace otafl
