#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code paths it is used to check.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

/// Central-difference gradient of a real function of a real vector.
inline RVec fd_gradient(const std::function<double(const RVec&)>& f, const RVec& x, double h) {
  RVec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    RVec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Central-difference gradient over [Re v; Im v] of a real function of a complex vector.
inline RVec fd_gradient_complex(const std::function<double(const CVec&)>& f, const CVec& v,
                                double h) {
  const Eigen::Index n = v.size();
  RVec g(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int part = 0; part < 2; ++part) {
      const cplx step = part == 0 ? cplx(h, 0.0) : cplx(0.0, h);
      CVec vp = v, vm = v;
      vp(i) += step;
      vm(i) -= step;
      g(part * n + i) = (f(vp) - f(vm)) / (2.0 * h);
    }
  }
  return g;
}

struct GridMin {
  double x = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

/// Evaluates f on `points` evenly spaced nodes of [lo, hi] (endpoints included).
inline GridMin grid_minimize(const std::function<double(double)>& f, double lo, double hi,
                             int points) {
  GridMin best;
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const double v = f(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

/// Direct transcription of the per-round surrogate, summing over every (k, l)
/// with explicit loops. h[k][l] is the channel, r[l] the combiner.
inline double phi_by_definition(const std::vector<std::vector<CVec>>& h,
                                const std::vector<CVec>& r, const std::vector<double>& p_hat,
                                double A, double B, double C, double sigma2, int q) {
  const std::size_t K = h.size();
  const std::size_t L = r.size();
  cplx total = 0.0;
  double per_user = 0.0;
  double gamma = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    cplx user = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
      cplx inner = 0.0;
      for (Eigen::Index n = 0; n < r[l].size(); ++n) inner += std::conj(r[l](n)) * h[k][l](n);
      const cplx m = inner * p_hat[k] - 1.0 / static_cast<double>(L * K);
      user += m;
      total += m;
    }
    per_user += std::norm(user);
  }
  for (std::size_t l = 0; l < L; ++l) gamma += q * sigma2 * r[l].squaredNorm();
  return A * std::norm(total) + C * per_user + B * gamma;
}

/// Mean and standard error of a sample.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

inline CVec random_cvec(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale * std::sqrt(0.5));
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(normal(rng), normal(rng));
  return v;
}

}  // namespace oracle
