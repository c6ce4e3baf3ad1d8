#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fwtm/core_model.hpp"

namespace fwtm {

enum class MStepKind {
  /// beta_kj ~ sum_d d_j p(k | d, j); monotone EM.
  Responsibility,
  /// beta_kj ~ sum_d d_j theta_dk; no monotonicity guarantee.
  Hard,
};

struct TrainConfig {
  std::size_t num_topics = 0;
  int em_iters = 50;
  double em_rel_tol = 1e-4;
  SolverConfig inner;
  double smoothing = 1e-10;
  std::uint64_t seed = 0;
  int threads = 1;
  MStepKind m_step = MStepKind::Responsibility;

  void validate() const;
};

struct TrainResult {
  TopicMatrix beta;
  /// Corpus log-likelihood after each E-step.
  std::vector<double> log_likelihood;
  /// Topic proportions from the last E-step (under the beta it used).
  std::vector<TopicProportion> thetas;
};

/// EM with Frank-Wolfe ML inference as the E-step.
///
/// Each E-step keeps a document's previous proportions when they still score
/// higher than the fresh solve under the updated topics, so the likelihood
/// trace cannot drop because of solver tolerance. Work is split into
/// `threads` fixed document ranges whose statistics are merged in range
/// order; results depend only on the seed and the thread count.
TrainResult train(const Corpus& corpus, const TrainConfig& cfg);

/// sum_d sum_j d_j log sum_k theta_dk beta_kj
double corpus_log_likelihood(const Corpus& corpus, const TopicMatrix& beta,
                             const std::vector<TopicProportion>& thetas);

struct SyntheticConfig {
  std::size_t num_topics = 10;
  std::size_t vocab_size = 200;
  std::size_t num_docs = 500;
  std::size_t doc_length = 100;
  /// Symmetric Dirichlet parameter for per-document proportions.
  double doc_concentration = 0.1;
  /// Symmetric Dirichlet parameter for topic-word distributions.
  double topic_concentration = 0.1;
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  Corpus corpus;
  TopicMatrix beta;
  std::vector<std::vector<double>> theta;  // dense, one per document
};

/// Samples topics, proportions and multinomial word counts; reproducible
/// under the seed.
SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& cfg);

/// Draws fresh documents from existing topics (e.g. a held-out set).
SyntheticCorpus sample_documents(const TopicMatrix& beta, std::size_t num_docs,
                                 std::size_t doc_length, double doc_concentration,
                                 std::uint64_t seed);

}  // namespace fwtm
