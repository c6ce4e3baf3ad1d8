#include "fwtm/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fwtm {
namespace {

double clamped_log(double x) { return std::log(std::max(x, kInteriorClamp)); }

void require_size(std::span<const double> v, std::size_t k, const char* what) {
  if (v.size() != k)
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " has size " +
                                                std::to_string(v.size()) + ", expected " +
                                                std::to_string(k));
}

// Log-likelihood of one document restricted to its observed terms. Topic
// columns for those terms are copied out so each evaluation is O(K * |I_d|)
// with contiguous access.
class MixtureLikelihood {
 public:
  MixtureLikelihood(const Document& doc, const TopicMatrix& beta)
      : num_topics_(beta.num_topics()), num_terms_(doc.num_terms()) {
    if (doc.empty()) throw Error(ErrorKind::InvalidArgument, "document has no terms");
    if (doc.min_vocab_size() > beta.vocab_size())
      throw Error(ErrorKind::InvalidArgument,
                  "document term id exceeds topic vocabulary size " +
                      std::to_string(beta.vocab_size()));
    counts_.reserve(num_terms_);
    for (const auto& e : doc.entries()) counts_.push_back(e.count);
    columns_.resize(num_topics_ * num_terms_);
    for (std::size_t k = 0; k < num_topics_; ++k)
      for (std::size_t j = 0; j < num_terms_; ++j)
        columns_[k * num_terms_ + j] = beta(k, doc.entries()[j].term);
  }

  std::size_t num_topics() const { return num_topics_; }
  std::size_t num_terms() const { return num_terms_; }
  std::span<const double> counts() const { return counts_; }

  // x_j = sum_k theta_k beta_{k, term_j}
  std::vector<double> mixture(std::span<const double> theta) const {
    std::vector<double> x(num_terms_, 0.0);
    for (std::size_t k = 0; k < num_topics_; ++k) {
      const double w = theta[k];
      if (w == 0.0) continue;
      const double* col = &columns_[k * num_terms_];
      for (std::size_t j = 0; j < num_terms_; ++j) x[j] += w * col[j];
    }
    return x;
  }

  double value_from_mixture(std::span<const double> x) const {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < num_terms_; ++j) acc += counts_[j] * std::log(x[j]);
    return double(acc);
  }

  double value(std::span<const double> theta) const { return value_from_mixture(mixture(theta)); }

  void add_gradient(std::span<const double> theta, std::span<double> out) const {
    auto x = mixture(theta);
    for (std::size_t j = 0; j < num_terms_; ++j) x[j] = counts_[j] / x[j];
    for (std::size_t k = 0; k < num_topics_; ++k) {
      const double* col = &columns_[k * num_terms_];
      double g = 0.0;
      for (std::size_t j = 0; j < num_terms_; ++j) g += col[j] * x[j];
      out[k] += g;
    }
  }

  std::vector<double> vertex_values() const {
    std::vector<double> out(num_topics_);
    for (std::size_t k = 0; k < num_topics_; ++k)
      out[k] = value_from_mixture({&columns_[k * num_terms_], num_terms_});
    return out;
  }

 private:
  std::size_t num_topics_;
  std::size_t num_terms_;
  std::vector<double> counts_;
  std::vector<double> columns_;  // K x |I_d|, row-major
};

class LikelihoodLine final : public LineRestriction {
 public:
  LikelihoodLine(const MixtureLikelihood& lik, std::span<const double> theta,
                 std::span<const double> target)
      : counts_(lik.counts().begin(), lik.counts().end()),
        from_(lik.mixture(theta)),
        to_(lik.mixture(target)) {}

  double value(double a) const override {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < counts_.size(); ++j)
      acc += counts_[j] * std::log((1.0 - a) * from_[j] + a * to_[j]);
    return double(acc);
  }
  double derivative(double a) const override {
    double acc = 0.0;
    for (std::size_t j = 0; j < counts_.size(); ++j)
      acc += counts_[j] * (to_[j] - from_[j]) / ((1.0 - a) * from_[j] + a * to_[j]);
    return acc;
  }

 private:
  std::vector<double> counts_, from_, to_;
};

class GenericLine final : public LineRestriction {
 public:
  GenericLine(const Objective& f, std::span<const double> theta, std::span<const double> target)
      : f_(f), from_(theta.begin(), theta.end()), to_(target.begin(), target.end()) {}

  double value(double a) const override { return f_.value(point(a)); }
  double derivative(double a) const override {
    auto p = point(a);
    auto g = f_.gradient(p);
    double acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] * (to_[k] - from_[k]);
    return acc;
  }

 private:
  std::vector<double> point(double a) const {
    std::vector<double> p(from_.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = (1.0 - a) * from_[k] + a * to_[k];
    return p;
  }

  const Objective& f_;
  std::vector<double> from_, to_;
};

class SumLine final : public LineRestriction {
 public:
  SumLine(std::unique_ptr<LineRestriction> a, std::unique_ptr<LineRestriction> b, double weight)
      : a_(std::move(a)), b_(std::move(b)), weight_(weight) {}
  double value(double t) const override { return a_->value(t) + weight_ * b_->value(t); }
  double derivative(double t) const override {
    return a_->derivative(t) + weight_ * b_->derivative(t);
  }

 private:
  std::unique_ptr<LineRestriction> a_, b_;
  double weight_;
};

// ------------------------------------------------------------- ML objective

class MlObjective final : public Objective {
 public:
  MlObjective(const Document& doc, const TopicMatrix& beta) : lik_(doc, beta) {}

  std::size_t num_topics() const override { return lik_.num_topics(); }
  Domain domain() const override { return Domain::FullSimplex; }
  double value(std::span<const double> theta) const override {
    require_size(theta, num_topics(), "theta");
    return lik_.value(theta);
  }
  void gradient(std::span<const double> theta, std::span<double> out) const override {
    require_size(theta, num_topics(), "theta");
    std::fill(out.begin(), out.end(), 0.0);
    lik_.add_gradient(theta, out);
  }
  std::vector<double> vertex_values() const override { return lik_.vertex_values(); }
  std::unique_ptr<LineRestriction> restrict_to(std::span<const double> theta,
                                               std::span<const double> target) const override {
    return std::make_unique<LikelihoodLine>(lik_, theta, target);
  }

 private:
  MixtureLikelihood lik_;
};

// --------------------------------------------------------- Dirichlet prior

class DirichletPrior final : public Objective {
 public:
  explicit DirichletPrior(std::span<const double> alpha) {
    if (alpha.empty()) throw Error(ErrorKind::InvalidArgument, "alpha must not be empty");
    coef_.reserve(alpha.size());
    for (double a : alpha) {
      if (!std::isfinite(a)) throw Error(ErrorKind::InvalidArgument, "alpha must be finite");
      if (a < 1.0)
        throw Error(ErrorKind::NonconcavePrior,
                    "alpha_k = " + std::to_string(a) + " < 1 makes MAP inference nonconcave");
      coef_.push_back(a - 1.0);
    }
    interior_ = std::any_of(coef_.begin(), coef_.end(), [](double c) { return c > 0.0; });
  }

  std::size_t num_topics() const override { return coef_.size(); }
  Domain domain() const override { return interior_ ? Domain::InteriorOnly : Domain::FullSimplex; }

  double value(std::span<const double> theta) const override {
    check(theta);
    double acc = 0.0;
    for (std::size_t k = 0; k < coef_.size(); ++k)
      if (coef_[k] != 0.0) acc += coef_[k] * clamped_log(theta[k]);
    return acc;
  }
  void gradient(std::span<const double> theta, std::span<double> out) const override {
    check(theta);
    for (std::size_t k = 0; k < coef_.size(); ++k)
      out[k] = coef_[k] != 0.0 ? coef_[k] / theta[k] : 0.0;
  }
  std::unique_ptr<LineRestriction> restrict_to(std::span<const double> theta,
                                               std::span<const double> target) const override {
    check(theta);
    return std::make_unique<Line>(coef_, theta, target);
  }

 private:
  class Line final : public LineRestriction {
   public:
    Line(const std::vector<double>& coef, std::span<const double> from, std::span<const double> to)
        : coef_(coef), from_(from.begin(), from.end()), to_(to.begin(), to.end()) {}
    double value(double a) const override {
      double acc = 0.0;
      for (std::size_t k = 0; k < coef_.size(); ++k)
        if (coef_[k] != 0.0) acc += coef_[k] * clamped_log((1.0 - a) * from_[k] + a * to_[k]);
      return acc;
    }
    double derivative(double a) const override {
      double acc = 0.0;
      for (std::size_t k = 0; k < coef_.size(); ++k)
        if (coef_[k] != 0.0)
          acc += coef_[k] * (to_[k] - from_[k]) / ((1.0 - a) * from_[k] + a * to_[k]);
      return acc;
    }

   private:
    std::vector<double> coef_, from_, to_;
  };

  void check(std::span<const double> theta) const {
    require_size(theta, coef_.size(), "theta");
    for (std::size_t k = 0; k < coef_.size(); ++k)
      if (coef_[k] != 0.0 && !(theta[k] > 0.0))
        throw Error(ErrorKind::DomainViolation,
                    "Dirichlet log-prior undefined at theta_" + std::to_string(k) + " = 0");
  }

  std::vector<double> coef_;
  bool interior_ = false;
};

// ---------------------------------------------------- logistic-normal prior

void require_interior(std::span<const double> theta, const char* what) {
  for (std::size_t k = 0; k < theta.size(); ++k)
    if (!(theta[k] > 0.0))
      throw Error(ErrorKind::DomainViolation,
                  std::string(what) + " undefined at theta_" + std::to_string(k) + " = 0");
}

// -1/2 z^T P z with z = log(theta) - mu, and its gradient -(1/theta) * (P z).
double ctm_penalty_value(const CtmPrior& prior, std::span<const double> theta) {
  Eigen::VectorXd z = prior.centered_log(theta);
  return -0.5 * z.dot(prior.precision() * z);
}

void ctm_penalty_gradient(const CtmPrior& prior, std::span<const double> theta,
                          std::span<double> out) {
  Eigen::VectorXd pz = prior.precision() * prior.centered_log(theta);
  for (std::size_t k = 0; k < theta.size(); ++k) out[k] = -pz[Eigen::Index(k)] / theta[k];
}

class CtmPenaltyLine final : public LineRestriction {
 public:
  CtmPenaltyLine(const CtmPrior& prior, std::span<const double> from, std::span<const double> to)
      : prior_(prior), from_(from.begin(), from.end()), to_(to.begin(), to.end()) {}
  double value(double a) const override {
    auto p = point(a);
    return ctm_penalty_value(prior_, p);
  }
  double derivative(double a) const override {
    auto p = point(a);
    std::vector<double> g(p.size());
    ctm_penalty_gradient(prior_, p, g);
    double acc = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] * (to_[k] - from_[k]);
    return acc;
  }

 private:
  std::vector<double> point(double a) const {
    std::vector<double> p(from_.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = (1.0 - a) * from_[k] + a * to_[k];
    require_interior(p, "logistic-normal log-prior");
    return p;
  }
  const CtmPrior& prior_;
  std::vector<double> from_, to_;
};

class CtmLogPrior final : public Objective {
 public:
  explicit CtmLogPrior(CtmPrior prior) : prior_(std::move(prior)) {}
  std::size_t num_topics() const override { return prior_.num_topics(); }
  Domain domain() const override { return Domain::InteriorOnly; }
  double value(std::span<const double> theta) const override {
    require_size(theta, num_topics(), "theta");
    require_interior(theta, "logistic-normal log-prior");
    return ctm_penalty_value(prior_, theta);
  }
  void gradient(std::span<const double> theta, std::span<double> out) const override {
    require_size(theta, num_topics(), "theta");
    require_interior(theta, "logistic-normal log-prior");
    ctm_penalty_gradient(prior_, theta, out);
  }
  std::unique_ptr<LineRestriction> restrict_to(std::span<const double> theta,
                                               std::span<const double> target) const override {
    return std::make_unique<CtmPenaltyLine>(prior_, theta, target);
  }

 private:
  CtmPrior prior_;
};

class CtmMapObjective final : public Objective {
 public:
  CtmMapObjective(const Document& doc, const TopicMatrix& beta, CtmPrior prior)
      : lik_(doc, beta), prior_(std::move(prior)) {
    if (prior_.num_topics() != lik_.num_topics())
      throw Error(ErrorKind::InvalidArgument, "prior dimension does not match topic count");
  }
  std::size_t num_topics() const override { return lik_.num_topics(); }
  Domain domain() const override { return Domain::InteriorOnly; }
  double value(std::span<const double> theta) const override {
    require_size(theta, num_topics(), "theta");
    require_interior(theta, "CTM objective");
    return lik_.value(theta) + ctm_penalty_value(prior_, theta);
  }
  void gradient(std::span<const double> theta, std::span<double> out) const override {
    require_size(theta, num_topics(), "theta");
    require_interior(theta, "CTM objective");
    ctm_penalty_gradient(prior_, theta, out);
    lik_.add_gradient(theta, out);
  }
  std::unique_ptr<LineRestriction> restrict_to(std::span<const double> theta,
                                               std::span<const double> target) const override {
    return std::make_unique<SumLine>(std::make_unique<LikelihoodLine>(lik_, theta, target),
                                     std::make_unique<CtmPenaltyLine>(prior_, theta, target), 1.0);
  }

 private:
  MixtureLikelihood lik_;
  CtmPrior prior_;
};

// ---------------------------------------------------------------- penalized

class PenalizedObjective final : public Objective {
 public:
  PenalizedObjective(ObjectivePtr base, ObjectivePtr h, double lambda)
      : base_(std::move(base)), h_(std::move(h)), lambda_(lambda) {}

  std::size_t num_topics() const override { return base_->num_topics(); }
  Domain domain() const override {
    return base_->domain() == Domain::InteriorOnly || h_->domain() == Domain::InteriorOnly
               ? Domain::InteriorOnly
               : Domain::FullSimplex;
  }
  double value(std::span<const double> theta) const override {
    double v = base_->value(theta);
    return lambda_ > 0.0 ? v + lambda_ * h_->value(theta) : v;
  }
  void gradient(std::span<const double> theta, std::span<double> out) const override {
    base_->gradient(theta, out);
    if (lambda_ == 0.0) return;
    std::vector<double> hg(out.size());
    h_->gradient(theta, hg);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += lambda_ * hg[k];
  }
  std::vector<double> vertex_values() const override {
    auto v = base_->vertex_values();
    if (lambda_ == 0.0) return v;
    auto hv = h_->vertex_values();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += lambda_ * hv[k];
    return v;
  }
  std::unique_ptr<LineRestriction> restrict_to(std::span<const double> theta,
                                               std::span<const double> target) const override {
    auto base_line = base_->restrict_to(theta, target);
    if (lambda_ == 0.0) return base_line;
    return std::make_unique<SumLine>(std::move(base_line), h_->restrict_to(theta, target),
                                     lambda_);
  }

 private:
  ObjectivePtr base_, h_;
  double lambda_;
};

}  // namespace

// -------------------------------------------------------------- Objective

std::vector<double> Objective::vertex_values() const {
  const std::size_t k_count = num_topics();
  std::vector<double> out(k_count), e(k_count, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    e[k] = 1.0;
    out[k] = value(e);
    e[k] = 0.0;
  }
  return out;
}

std::unique_ptr<LineRestriction> Objective::restrict_to(std::span<const double> theta,
                                                        std::span<const double> target) const {
  return std::make_unique<GenericLine>(*this, theta, target);
}

// --------------------------------------------------------------- CtmPrior

CtmPrior::CtmPrior(Eigen::MatrixXd precision, std::optional<Eigen::VectorXd> mean)
    : precision_(std::move(precision)), mean_(std::move(mean)) {
  if (precision_.rows() == 0 || precision_.rows() != precision_.cols())
    throw Error(ErrorKind::InvalidArgument, "precision matrix must be square and non-empty");
  if (!precision_.allFinite())
    throw Error(ErrorKind::InvalidArgument, "precision matrix must be finite");
  if ((precision_ - precision_.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "precision matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(precision_);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::InvalidArgument, "precision matrix is not positive definite");
  if (mean_ && (mean_->size() != precision_.rows() || !mean_->allFinite()))
    throw Error(ErrorKind::InvalidArgument, "prior mean has wrong size or non-finite entries");
}

Eigen::VectorXd CtmPrior::centered_log(std::span<const double> theta) const {
  Eigen::VectorXd z(precision_.rows());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = clamped_log(theta[std::size_t(k)]);
  if (mean_) z -= *mean_;
  return z;
}

// -------------------------------------------------------------- factories

ObjectivePtr ml_objective(const Document& doc, const TopicMatrix& beta) {
  return std::make_shared<MlObjective>(doc, beta);
}

ObjectivePtr penalized_objective(ObjectivePtr base, ObjectivePtr h, double lambda) {
  if (!base || !h) throw Error(ErrorKind::InvalidArgument, "null objective");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::InvalidArgument, "penalty weight must be finite and >= 0");
  if (base->num_topics() != h->num_topics())
    throw Error(ErrorKind::InvalidArgument, "base and penalty disagree on K");
  return std::make_shared<PenalizedObjective>(std::move(base), std::move(h), lambda);
}

ObjectivePtr dirichlet_log_prior(std::span<const double> alpha) {
  return std::make_shared<DirichletPrior>(alpha);
}

ObjectivePtr ctm_log_prior(const CtmPrior& prior) { return std::make_shared<CtmLogPrior>(prior); }

ObjectivePtr lda_map_objective(const Document& doc, const TopicMatrix& beta,
                               std::span<const double> alpha) {
  require_size(alpha, beta.num_topics(), "alpha");
  auto prior = dirichlet_log_prior(alpha);
  return penalized_objective(ml_objective(doc, beta), std::move(prior), 1.0);
}

ObjectivePtr ctm_map_objective(const Document& doc, const TopicMatrix& beta,
                               const CtmPrior& prior) {
  return std::make_shared<CtmMapObjective>(doc, beta, prior);
}

Eigen::MatrixXd ctm_penalty_hessian(std::span<const double> theta, const CtmPrior& prior) {
  require_size(theta, prior.num_topics(), "theta");
  require_interior(theta, "CTM penalty Hessian");
  const Eigen::Index k_count = prior.precision().rows();
  Eigen::VectorXd inv(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) inv[k] = 1.0 / theta[std::size_t(k)];
  Eigen::VectorXd pz = prior.precision() * prior.centered_log(theta);
  Eigen::MatrixXd inner = prior.precision();
  inner.diagonal() -= pz;
  return -(inv.asDiagonal() * inner * inv.asDiagonal());
}

}  // namespace fwtm
