#include "otafl/ridge_task.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "otafl/rng.hpp"

namespace otafl {

namespace {

void check_dims(const RVec& w, const RidgeDataset& data) {
  if (w.size() != data.inputs.cols()) {
    throw std::invalid_argument("ridge: model dimension does not match data");
  }
}

}  // namespace

double ridge_label(const Eigen::Ref<const RVec>& x, double z, const LabelRule& rule) {
  if (x.size() < 5) throw std::invalid_argument("ridge_label: need q >= 5");
  return rule.coef_2 * x(1) + rule.coef_5 * x(4) + rule.noise_scale * z;
}

RidgeDataset generate_dataset(std::uint64_t seed, int num_samples, int q, int owner,
                              const LabelRule& rule) {
  if (q < 5) throw std::invalid_argument("generate_dataset: label rule needs q >= 5");
  if (num_samples < 1) throw std::invalid_argument("generate_dataset: need at least one sample");

  auto rng = make_stream(seed, Stream::data, static_cast<std::uint64_t>(owner));
  std::normal_distribution<double> normal(0.0, 1.0);
  RidgeDataset data{RMat(num_samples, q), RVec(num_samples), RVec(num_samples), owner};
  for (int i = 0; i < num_samples; ++i) {
    for (int j = 0; j < q; ++j) data.inputs(i, j) = normal(rng);
    data.noise(i) = normal(rng);
    data.labels(i) = ridge_label(data.inputs.row(i).transpose(), data.noise(i), rule);
  }
  return data;
}

double local_loss(const RVec& w, const RidgeDataset& data, double rho) {
  check_dims(w, data);
  const RVec r = data.inputs * w - data.labels;
  return 0.5 * r.squaredNorm() / data.size() + rho * w.squaredNorm();
}

RVec local_gradient(const RVec& w, const RidgeDataset& data, double rho) {
  check_dims(w, data);
  const RVec r = data.inputs * w - data.labels;
  return data.inputs.transpose() * r / data.size() + 2.0 * rho * w;
}

RVec local_update(const RVec& w_global, const RidgeDataset& data, const TaskHyperparams& hyper,
                  std::mt19937_64* rng) {
  check_dims(w_global, data);
  RVec w = w_global;
  const bool minibatch = hyper.batch_size > 0 && hyper.batch_size < data.size();
  if (minibatch && rng == nullptr) {
    throw std::invalid_argument("local_update: minibatch training needs an rng stream");
  }
  std::vector<int> order;
  if (minibatch) {
    order.resize(static_cast<std::size_t>(data.size()));
    std::iota(order.begin(), order.end(), 0);
  }
  for (int epoch = 0; epoch < hyper.omega; ++epoch) {
    if (!minibatch) {
      w -= hyper.eta * local_gradient(w, data, hyper.rho);
      continue;
    }
    std::shuffle(order.begin(), order.end(), *rng);
    RVec grad = RVec::Zero(w.size());
    for (int i = 0; i < hyper.batch_size; ++i) {
      const auto x = data.inputs.row(order[static_cast<std::size_t>(i)]);
      grad += x.transpose() * (x.dot(w) - data.labels(order[static_cast<std::size_t>(i)]));
    }
    w -= hyper.eta * (grad / hyper.batch_size + 2.0 * hyper.rho * w);
  }
  return w;
}

double global_loss(const RVec& w, std::span<const RidgeDataset> datasets, double rho) {
  double weighted = 0.0;
  long total = 0;
  for (const auto& d : datasets) {
    weighted += d.size() * local_loss(w, d, rho);
    total += d.size();
  }
  if (total == 0) throw std::invalid_argument("global_loss: no data");
  return weighted / static_cast<double>(total);
}

RVec global_gradient(const RVec& w, std::span<const RidgeDataset> datasets, double rho) {
  RVec grad = RVec::Zero(w.size());
  long total = 0;
  for (const auto& d : datasets) {
    grad += d.size() * local_gradient(w, d, rho);
    total += d.size();
  }
  if (total == 0) throw std::invalid_argument("global_gradient: no data");
  return grad / static_cast<double>(total);
}

OptimalSolution optimal_loss(std::span<const RidgeDataset> datasets, double rho) {
  if (datasets.empty()) throw std::invalid_argument("optimal_loss: no data");
  const int q = datasets.front().dim();
  RMat gram = RMat::Zero(q, q);
  RVec rhs = RVec::Zero(q);
  long total = 0;
  for (const auto& d : datasets) {
    if (d.dim() != q) throw std::invalid_argument("optimal_loss: mixed dimensions");
    gram += d.inputs.transpose() * d.inputs;
    rhs += d.inputs.transpose() * d.labels;
    total += d.size();
  }
  if (total == 0) throw std::invalid_argument("optimal_loss: no data");
  gram /= static_cast<double>(total);
  rhs /= static_cast<double>(total);
  gram.diagonal().array() += 2.0 * rho;

  Eigen::LDLT<RMat> ldlt(gram);
  const double min_pivot = ldlt.vectorD().minCoeff();
  const double scale = std::max(1.0, ldlt.vectorD().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || !(min_pivot > 1e-12 * scale)) {
    throw std::runtime_error("optimal_loss: normal equations are singular (rho = 0 with rank-deficient data)");
  }
  OptimalSolution sol;
  sol.w = ldlt.solve(rhs);
  sol.loss = global_loss(sol.w, datasets, rho);
  return sol;
}

}  // namespace otafl
