#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "otafl/types.hpp"

namespace otafl {

/// Label rule tau = c2 * x(2) + c5 * x(5) + noise_scale * z, with 1-based indices.
struct LabelRule {
  double coef_2 = 1.0;
  double coef_5 = 3.0;
  double noise_scale = 0.2;
};

struct RidgeDataset {
  RMat inputs;  // D x q, one sample per row
  RVec labels;  // length D
  RVec noise;   // the z draw behind each label
  int owner = 0;

  int size() const { return static_cast<int>(labels.size()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
};

struct TaskHyperparams {
  double rho = 5e-5;
  double eta = 0.05;
  int omega = 1;
  int q = 10;
  int batch_size = 0;  // 0 means full batch
};

double ridge_label(const Eigen::Ref<const RVec>& x, double z, const LabelRule& rule = {});

/// Inputs are i.i.d. standard normal. Requires q >= 5.
RidgeDataset generate_dataset(std::uint64_t seed, int num_samples, int q, int owner = 0,
                              const LabelRule& rule = {});

double local_loss(const RVec& w, const RidgeDataset& data, double rho);
RVec local_gradient(const RVec& w, const RidgeDataset& data, double rho);

/// Omega gradient steps from w_global. With batch_size > 0 each epoch draws a
/// minibatch (without replacement) from `rng`, which must then be non-null.
RVec local_update(const RVec& w_global, const RidgeDataset& data, const TaskHyperparams& hyper,
                  std::mt19937_64* rng = nullptr);

/// F(w) = (1/D_tot) sum_k D_k F_k(w).
double global_loss(const RVec& w, std::span<const RidgeDataset> datasets, double rho);
RVec global_gradient(const RVec& w, std::span<const RidgeDataset> datasets, double rho);

struct OptimalSolution {
  RVec w;
  double loss = 0.0;
};

/// Exact minimizer of the pooled ridge objective via the normal equations.
OptimalSolution optimal_loss(std::span<const RidgeDataset> datasets, double rho);

}  // namespace otafl
