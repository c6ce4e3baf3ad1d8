#include "fwtm/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "fwtm/objectives.hpp"

namespace fwtm {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool relative_change_below(double previous, double current, double tol) {
  const double change = std::abs(current - previous);
  if (std::abs(previous) < 1e-12) return change < tol;
  return change / std::abs(previous) < tol;
}

void normalize(std::vector<double>& v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= sum;
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw Error(ErrorKind::InvalidArgument, "digamma needs a finite positive argument");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number series: 1/12, 1/120, 1/252, 1/240, 1/132, 691/32760
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * 691.0 / 32760)))));
  return result + std::log(x) - 0.5 * inv - series;
}

InferenceReport folding_in(const Document& doc, const TopicMatrix& beta,
                           const SolverConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const auto likelihood = ml_objective(doc, beta);
  const std::size_t k_count = beta.num_topics();
  const double length = doc.length();

  std::vector<double> theta(k_count, 1.0 / double(k_count)), grad(k_count);
  double current = likelihood->value(theta);
  int iterations = 0;
  if (k_count > 1) {
    while (iterations < cfg.max_iters) {
      // theta_k * df/dtheta_k = sum_j d_j * (expected count of topic k at term j)
      likelihood->gradient(theta, grad);
      for (std::size_t k = 0; k < k_count; ++k) theta[k] *= grad[k] / length;
      normalize(theta);
      ++iterations;
      const double previous = current;
      current = likelihood->value(theta);
      if (std::isnan(current)) throw Error(ErrorKind::NumericFailure, "folding-in diverged");
      if (relative_change_below(previous, current, cfg.rel_tol)) break;
    }
  }

  InferenceReport report;
  report.theta = TopicProportion::from_dense(theta);
  report.iterations = iterations;
  report.objective = current;
  report.nnz = report.theta.nnz();
  report.elapsed = seconds_since(started);
  return report;
}

InferenceReport vb_infer(const Document& doc, const TopicMatrix& beta,
                         std::span<const double> alpha, const SolverConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const std::size_t k_count = beta.num_topics();
  if (alpha.size() != k_count)
    throw Error(ErrorKind::InvalidArgument, "alpha must have one entry per topic");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a))
      throw Error(ErrorKind::InvalidArgument, "alpha must be positive, got " + std::to_string(a));
  if (doc.min_vocab_size() > beta.vocab_size())
    throw Error(ErrorKind::InvalidArgument, "document term id exceeds topic vocabulary size");
  const auto likelihood = ml_objective(doc, beta);

  std::vector<double> gamma(k_count), next(k_count), weight(k_count), phi(k_count);
  for (std::size_t k = 0; k < k_count; ++k) gamma[k] = alpha[k] + doc.length() / double(k_count);

  int iterations = 0;
  if (k_count > 1) {
    while (iterations < cfg.max_iters) {
      // Shifted by the max so small gammas cannot underflow every weight.
      for (std::size_t k = 0; k < k_count; ++k) weight[k] = digamma(gamma[k]);
      const double top = *std::max_element(weight.begin(), weight.end());
      for (double& w : weight) w = std::exp(w - top);
      std::copy(alpha.begin(), alpha.end(), next.begin());
      for (const auto& e : doc.entries()) {
        double norm = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          phi[k] = beta(k, e.term) * weight[k];
          norm += phi[k];
        }
        for (std::size_t k = 0; k < k_count; ++k) next[k] += e.count * phi[k] / norm;
      }
      double change = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) change += std::abs(next[k] - gamma[k]) / gamma[k];
      change /= double(k_count);
      gamma.swap(next);
      ++iterations;
      if (std::isnan(change)) throw Error(ErrorKind::NumericFailure, "VB update produced NaN");
      if (change < cfg.rel_tol) break;
    }
  }

  std::vector<double> theta = gamma;
  normalize(theta);
  InferenceReport report;
  report.theta = TopicProportion::from_dense(theta);
  report.iterations = iterations;
  report.objective = likelihood->value(theta);
  report.nnz = report.theta.nnz();
  report.elapsed = seconds_since(started);
  return report;
}

}  // namespace fwtm
