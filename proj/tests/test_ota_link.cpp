#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "otafl/beamforming.hpp"
#include "otafl/ota_link.hpp"
#include "otafl/rng.hpp"

using namespace otafl;

namespace {

ChannelRealization random_channels(std::mt19937_64& rng, int K, int L, int Nr, double scale = 1.0) {
  ChannelRealization ch(K, L, Nr, 1);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) ch.at(k, l) = oracle::random_cvec(rng, Nr, scale);
  }
  return ch;
}

BeamformingVector random_bf(std::mt19937_64& rng, int Nr, int L, double scale = 1.0) {
  return {oracle::random_cvec(rng, static_cast<Eigen::Index>(Nr) * L, scale), Nr};
}

RVec random_amplitudes(std::mt19937_64& rng, int K) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  RVec p(K);
  for (int k = 0; k < K; ++k) p(k) = u(rng);
  return p;
}

// Channels and amplitudes with r_l^H h_{k,l} p_hat_k = 1/(LK) for all k, l.
struct Aligned {
  ChannelRealization ch;
  BeamformingVector bf;
  RVec p_hat;
};

Aligned aligned_instance(int K, int L, int Nr) {
  Aligned a{ChannelRealization(K, L, Nr, 1), BeamformingVector::zeros(Nr, L), RVec(K)};
  for (int l = 0; l < L; ++l) a.bf.v(static_cast<Eigen::Index>(l) * Nr) = 1.0;
  for (int k = 0; k < K; ++k) {
    a.p_hat(k) = 0.5 + 0.25 * k;
    for (int l = 0; l < L; ++l) {
      CVec h = CVec::Zero(Nr);
      h(0) = 1.0 / (static_cast<double>(L) * K * a.p_hat(k));
      if (Nr > 1) h(1) = cplx(0.3, -0.7);  // orthogonal to r_l, must not matter
      a.ch.at(k, l) = h;
    }
  }
  return a;
}

GapHyper unit_hyper() {
  GapHyper h;
  h.G = 1.0;
  h.S = 1.0;
  h.eta = 0.05;
  h.T = 10;
  return h;
}

}  // namespace

TEST_CASE("power allocation keeps amplitudes and powers consistent") {
  RVec p(3);
  p << 0.3, 0.0, 0.49;
  const auto a = PowerAllocation::from_power(p);
  for (int k = 0; k < 3; ++k) {
    CHECK(a.amplitude()(k) * a.amplitude()(k) == doctest::Approx(p(k)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(PowerAllocation::from_power(-p), std::invalid_argument);
  CHECK_THROWS_AS(PowerAllocation::from_amplitude(-p), std::invalid_argument);
}

TEST_CASE("power budgets") {
  const auto b = PowerBudget::uniform(3, 0.3, 0.5);
  CHECK(b.p_ave == RVec::Constant(3, 0.3));
  CHECK_THROWS_AS(PowerBudget::uniform(3, 0.6, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(PowerBudget::uniform(3, 0.0, 0.5), std::invalid_argument);
  const auto raw = PowerBudget::from_raw(RVec::Constant(2, 0.5), RVec::Constant(2, 0.3), 10, 2.0);
  CHECK(raw.p_max(0) == doctest::Approx(10 * 0.5 / 4.0));
  CHECK(raw.p_ave(1) == doctest::Approx(10 * 0.3 / 4.0));
}

TEST_CASE("noise power from dBm") {
  CHECK(NoiseModel::from_dbm(-101.0).sigma2 == doctest::Approx(7.943282347242789e-14).epsilon(1e-12));
  CHECK(NoiseModel::from_dbm(30.0).sigma2 == doctest::Approx(1.0));
}

TEST_CASE("residuals: zero combiner") {
  std::mt19937_64 rng(1);
  const auto ch = random_channels(rng, 3, 6, 4);
  const auto res = residuals(ch, BeamformingVector::zeros(4, 6), random_amplitudes(rng, 3));
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 6; ++l) CHECK(res.m(k, l) == cplx(-1.0 / 18.0, 0.0));
  }
  CHECK(res.H.isZero());
}

TEST_CASE("residuals: perfect alignment and scalar identity") {
  const Aligned a = aligned_instance(3, 6, 4);
  const auto res = residuals(a.ch, a.bf, a.p_hat);
  CHECK(res.m.cwiseAbs().maxCoeff() < 1e-15);

  ChannelRealization one(1, 1, 1, 1);
  one.at(0, 0)(0) = 1.0;
  BeamformingVector r{CVec::Ones(1), 1};
  const auto s = residuals(one, r, RVec::Ones(1));
  CHECK(s.m(0, 0) == cplx(0.0, 0.0));
  CHECK(s.H(0) == cplx(1.0, 0.0));
}

TEST_CASE("residuals and effective channel agree") {
  std::mt19937_64 rng(2);
  const auto ch = random_channels(rng, 3, 6, 4);
  const auto bf = random_bf(rng, 4, 6);
  const RVec p = random_amplitudes(rng, 3);
  const auto res = residuals(ch, bf, p);
  const CVec H = effective_channels(ch, bf);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(res.H(k) - H(k)) < 1e-14);
    CHECK(std::abs(res.m.row(k).sum() - (H(k) * p(k) - 1.0 / 3.0)) < 1e-13);
  }
}

TEST_CASE("aggregate is exact over a perfect noiseless channel") {
  const Aligned a = aligned_instance(3, 6, 4);
  std::vector<RVec> models{RVec::LinSpaced(10, 0, 1), RVec::LinSpaced(10, 2, -1),
                           RVec::Constant(10, 0.4)};
  std::mt19937_64 rng(0);
  const auto out = aggregate(models, a.ch, a.bf, a.p_hat, NoiseModel{0.0}, rng);
  CHECK((out.z - out.w_bar.cast<cplx>()).norm() < 1e-12);
  CHECK(out.epsilon.norm() < 1e-12);
  CHECK((out.global_model() - (models[0] + models[1] + models[2]) / 3.0).norm() < 1e-12);
}

TEST_CASE("single-user noiseless error is the residual sum times the model") {
  std::mt19937_64 rng(4);
  const auto ch = random_channels(rng, 1, 3, 2);
  const auto bf = random_bf(rng, 2, 3);
  const RVec p = RVec::Constant(1, 0.7);
  const std::vector<RVec> models{RVec::LinSpaced(5, -1, 2)};
  std::mt19937_64 nrng(0);
  const auto out = aggregate(models, ch, bf, p, NoiseModel{0.0}, nrng);
  const cplx delta = out.m.sum();
  CHECK((out.epsilon - delta * models[0].cast<cplx>()).norm() < 1e-12);
}

TEST_CASE("pure noise error energy matches gamma") {
  std::mt19937_64 rng(5);
  const auto ch = random_channels(rng, 3, 6, 4);
  const auto bf = random_bf(rng, 4, 6);
  const RVec p = random_amplitudes(rng, 3);
  const NoiseModel noise{0.2};
  const int q = 10;
  const std::vector<RVec> models(3, RVec::Zero(q));
  std::vector<double> e2;
  for (int draw = 0; draw < 10000; ++draw) {
    auto nrng = make_stream(1, Stream::montecarlo, static_cast<std::uint64_t>(draw));
    e2.push_back(aggregate(models, ch, bf, p, noise, nrng).epsilon.squaredNorm());
  }
  const auto ms = oracle::mean_se(e2);
  const double gamma = noise_penalty(bf, noise.sigma2, q);
  CHECK(std::abs(ms.mean - gamma) < 3.0 * ms.se);
}

TEST_CASE("mean error with identical models is the residual sum times the model") {
  std::mt19937_64 rng(6);
  const auto ch = random_channels(rng, 3, 2, 2);
  const auto bf = random_bf(rng, 2, 2);
  const RVec p = random_amplitudes(rng, 3);
  const RVec w = RVec::LinSpaced(4, 1, -1);
  const std::vector<RVec> models(3, w);
  const int draws = 10000;
  CVec mean = CVec::Zero(4);
  std::vector<std::vector<double>> per_coord(4);
  for (int draw = 0; draw < draws; ++draw) {
    auto nrng = make_stream(2, Stream::montecarlo, static_cast<std::uint64_t>(draw));
    const CVec e = aggregate(models, ch, bf, p, NoiseModel{0.5}, nrng).epsilon;
    for (int j = 0; j < 4; ++j) per_coord[j].push_back(e(j).real());
  }
  const cplx delta = residuals(ch, bf, p).m.sum();
  for (int j = 0; j < 4; ++j) {
    const auto ms = oracle::mean_se(per_coord[j]);
    CHECK(std::abs(ms.mean - (delta * w(j)).real()) < 3.0 * ms.se);
  }
}

TEST_CASE("error bounds closed cases") {
  const CMat zero = CMat::Zero(3, 6);
  const auto b = error_bounds(zero, 0.7, 2.0);
  CHECK(b.bias == 0.0);
  CHECK(b.mse == 0.7);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    CMat m(3, 6);
    for (int k = 0; k < 3; ++k) m.row(k) = oracle::random_cvec(rng, 6).transpose();
    CHECK(error_bounds(m, 0.3, 1.5).mse >= 0.3);
  }
  CHECK_THROWS_AS(error_bounds(zero, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("mse bound is attained by orthogonal equal-norm models") {
  std::mt19937_64 rng(8);
  const int K = 3, L = 4, Nr = 2, q = 6;
  const auto ch = random_channels(rng, K, L, Nr);
  const auto bf = random_bf(rng, Nr, L, 0.5);
  const RVec p = random_amplitudes(rng, K);
  const double G = 1.3;
  std::vector<RVec> models;
  for (int k = 0; k < K; ++k) {
    RVec w = RVec::Zero(q);
    w(2 * k) = G;  // orthogonal supports
    models.push_back(w);
  }
  const NoiseModel noise{0.05};
  std::vector<double> e2;
  for (int draw = 0; draw < 10000; ++draw) {
    auto nrng = make_stream(3, Stream::montecarlo, static_cast<std::uint64_t>(draw));
    e2.push_back(aggregate(models, ch, bf, p, noise, nrng).epsilon.squaredNorm());
  }
  const auto ms = oracle::mean_se(e2);
  const auto res = residuals(ch, bf, p);
  const auto bound = error_bounds(res.m, noise_penalty(bf, noise.sigma2, q), G);
  CHECK(std::abs(ms.mean - bound.mse) < 3.0 * ms.se);
}

TEST_CASE("phi closed cases") {
  const GapCoefficients c = gap_coefficients(unit_hyper(), 1);
  const Aligned a = aligned_instance(3, 6, 4);
  CHECK(phi(a.ch, a.bf, a.p_hat, c, NoiseModel{0.0}, 10) < 1e-28);

  std::mt19937_64 rng(9);
  const auto ch = random_channels(rng, 3, 6, 4);
  const double at_zero =
      phi(ch, BeamformingVector::zeros(4, 6), random_amplitudes(rng, 3), c, NoiseModel{0.1}, 10);
  CHECK(at_zero == doctest::Approx(c.A + c.C / 3.0).epsilon(1e-14));
}

TEST_CASE("phi: residual form, stacked form and definition agree") {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_real_distribution<double> coef(0.01, 20.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int K = dim(rng), L = dim(rng), Nr = dim(rng);
    const auto ch = random_channels(rng, K, L, Nr);
    const auto bf = random_bf(rng, Nr, L);
    const RVec p = random_amplitudes(rng, K);
    GapCoefficients c;
    c.A = coef(rng);
    c.B = coef(rng);
    c.C = coef(rng);
    const double sigma2 = coef(rng) * 0.01;
    const int q = 10;
    const double from_m = phi(ch, bf, p, c, NoiseModel{sigma2}, q);
    const double stacked = phi_stacked(build_inputs(ch, p), bf.v, c, sigma2, q);

    std::vector<std::vector<CVec>> h(static_cast<std::size_t>(K));
    std::vector<CVec> r;
    for (int l = 0; l < L; ++l) r.push_back(bf.per_ap(l));
    for (int k = 0; k < K; ++k) {
      for (int l = 0; l < L; ++l) h[k].push_back(ch.at(k, l));
    }
    const double direct = oracle::phi_by_definition(
        h, r, std::vector<double>(p.data(), p.data() + K), c.A, c.B, c.C, sigma2, q);
    CHECK(std::abs(from_m - stacked) <= 1e-12 * std::abs(stacked));
    CHECK(std::abs(from_m - direct) <= 1e-12 * std::abs(direct));
  }
}

TEST_CASE("gap coefficients") {
  GapHyper h = unit_hyper();
  h.omega = 1;
  h.mu = 0.7;
  for (int t = 1; t <= h.T; ++t) {
    const auto c = gap_coefficients(h, t);
    CHECK(c.M == 1.0);
    CHECK(c.J == 1.0);
    CHECK(c.A == doctest::Approx(10.0));
    CHECK(c.B == doctest::Approx(1.05));
    CHECK(c.C == doctest::Approx(1.05));
  }
  GapHyper h3 = h;
  h3.G = 3.0;
  CHECK(gap_coefficients(h3, 2).A == doctest::Approx(9.0 * gap_coefficients(h, 2).A));

  // J_t = prod_{i=t}^T M_i / M_t with a constant M.
  GapHyper multi = h;
  multi.omega = 3;
  multi.mu = 0.5;
  multi.T = 6;
  const double M = 1.0 - 2 * 0.5 * 0.05;
  for (int t = 1; t <= 6; ++t) {
    const auto c = gap_coefficients(multi, t);
    CHECK(c.M == doctest::Approx(M));
    CHECK(c.J == doctest::Approx(std::pow(M, 6 - t)));
    CHECK(c.B == doctest::Approx(1.0 * 0.05 * 3 + 1.0));
    CHECK(c.A == doctest::Approx(c.J / (2 * 0.05)));
  }

  GapHyper o = h;
  o.A_override = 2.0;
  o.C_override = 0.5;
  const auto c = gap_coefficients(o, 1);
  CHECK(c.A == 2.0);
  CHECK(c.B == doctest::Approx(1.05));
  CHECK(c.C == 0.5);
  CHECK_THROWS_AS(gap_coefficients(h, 0), std::invalid_argument);
  CHECK_THROWS_AS(gap_coefficients(h, h.T + 1), std::invalid_argument);
}
