#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fwtm/core_model.hpp"

namespace fwtm {

enum class Domain {
  FullSimplex,   ///< finite everywhere on the closed simplex
  InteriorOnly,  ///< undefined where some (penalized) coordinate is zero
};

/// Values of log() below this are evaluated at kInteriorClamp instead.
inline constexpr double kInteriorClamp = 1e-12;

/// g(a) = f((1 - a) * theta + a * s) for a fixed iterate theta and target s.
/// A restriction may refer to its objective and must not outlive it.
class LineRestriction {
 public:
  virtual ~LineRestriction() = default;
  virtual double value(double alpha) const = 0;
  virtual double derivative(double alpha) const = 0;
};

/// A concave, differentiable function over (a subset of) the K-simplex.
///
/// Points are passed densely. Implementations must be safe to call
/// concurrently from several threads.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t num_topics() const = 0;
  virtual Domain domain() const = 0;
  virtual double value(std::span<const double> theta) const = 0;
  virtual void gradient(std::span<const double> theta, std::span<double> out) const = 0;

  std::vector<double> gradient(std::span<const double> theta) const {
    std::vector<double> g(num_topics());
    gradient(theta, g);
    return g;
  }

  /// f(e_k) for every k. The default evaluates value() at each vertex.
  virtual std::vector<double> vertex_values() const;

  /// Restriction of f to the segment from theta to s. The default
  /// materializes the point and calls value()/gradient(); concrete
  /// objectives override it with cheaper closed forms.
  virtual std::unique_ptr<LineRestriction> restrict_to(std::span<const double> theta,
                                                       std::span<const double> target) const;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// Gaussian prior on x = log(theta) for the correlated topic model.
class CtmPrior {
 public:
  /// Throws InvalidArgument unless `precision` is symmetric (1e-9) and
  /// positive definite, and `mean` (if given) has matching size.
  explicit CtmPrior(Eigen::MatrixXd precision, std::optional<Eigen::VectorXd> mean = {});

  std::size_t num_topics() const noexcept { return std::size_t(precision_.rows()); }
  const Eigen::MatrixXd& precision() const noexcept { return precision_; }
  const std::optional<Eigen::VectorXd>& mean() const noexcept { return mean_; }
  bool zero_mean() const noexcept { return !mean_.has_value(); }

  /// log(theta) - mu (mu = 0 when absent); theta must be strictly positive.
  Eigen::VectorXd centered_log(std::span<const double> theta) const;

 private:
  Eigen::MatrixXd precision_;
  std::optional<Eigen::VectorXd> mean_;
};

/// f(theta) = sum_{j in I_d} d_j log sum_k theta_k beta_kj.
ObjectivePtr ml_objective(const Document& doc, const TopicMatrix& beta);

/// base + lambda * h.
ObjectivePtr penalized_objective(ObjectivePtr base, ObjectivePtr h, double lambda);

/// h(theta) = sum_k (alpha_k - 1) log theta_k; requires alpha_k >= 1.
ObjectivePtr dirichlet_log_prior(std::span<const double> alpha);

/// h(theta) = -1/2 (log theta - mu)^T Sigma^{-1} (log theta - mu).
ObjectivePtr ctm_log_prior(const CtmPrior& prior);

/// Log-likelihood plus Dirichlet log-prior. Rejects alpha_k < 1 with
/// NonconcavePrior.
ObjectivePtr lda_map_objective(const Document& doc, const TopicMatrix& beta,
                               std::span<const double> alpha);

/// Log-likelihood plus logistic-normal log-prior, built directly (not via
/// penalized_objective). Concave on the whole interior for a zero-mean prior;
/// with a mean it is concave only where log theta_k <= mu_k, which is the
/// region fw_solve_capped enforces.
ObjectivePtr ctm_map_objective(const Document& doc, const TopicMatrix& beta,
                               const CtmPrior& prior);

/// Hessian of the logistic-normal log-prior at an interior theta:
/// -diag(1/theta) [P - diag(P z)] diag(1/theta), z = log theta - mu.
Eigen::MatrixXd ctm_penalty_hessian(std::span<const double> theta, const CtmPrior& prior);

}  // namespace fwtm
