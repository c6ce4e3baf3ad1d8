#include "fwtm/learning.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "fwtm/fw_solver.hpp"
#include "fwtm/objectives.hpp"

namespace fwtm {
namespace {

struct RangeStats {
  std::vector<double> counts;  // K x V
  long double log_likelihood = 0.0L;
};

std::vector<double> dirichlet_sample(std::mt19937_64& rng, std::size_t dim, double concentration) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> out(dim);
  double sum = 0.0;
  while (!(sum > 0.0)) {
    sum = 0.0;
    for (double& x : out) sum += (x = gamma(rng));
  }
  for (double& x : out) x /= sum;
  return out;
}

void e_step_range(const Corpus& corpus, const TopicMatrix& beta, const TrainConfig& cfg,
                  std::size_t first, std::size_t last, std::vector<TopicProportion>& thetas,
                  RangeStats& stats) {
  const std::size_t k_count = beta.num_topics(), v_count = beta.vocab_size();
  stats.counts.assign(k_count * v_count, 0.0);
  stats.log_likelihood = 0.0L;
  for (std::size_t d = first; d < last; ++d) {
    const Document& doc = corpus[d];
    const auto f = ml_objective(doc, beta);
    auto solved = fw_solve(*f, cfg.inner);
    TopicProportion theta = std::move(solved.report.theta);
    double value = solved.report.objective;
    if (thetas[d].num_topics() == k_count) {
      const double kept = f->value(thetas[d].dense());
      if (kept > value) {
        value = kept;
        theta = thetas[d];
      }
    }
    stats.log_likelihood += value;

    for (const auto& e : doc.entries()) {
      if (cfg.m_step == MStepKind::Hard) {
        for (const auto& t : theta.entries())
          stats.counts[t.topic * v_count + e.term] += e.count * t.weight;
        continue;
      }
      double mix = 0.0;
      for (const auto& t : theta.entries()) mix += t.weight * beta(t.topic, e.term);
      for (const auto& t : theta.entries())
        stats.counts[t.topic * v_count + e.term] += e.count * t.weight * beta(t.topic, e.term) / mix;
    }
    thetas[d] = std::move(theta);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (num_topics < 1) throw Error(ErrorKind::InvalidConfig, "need at least one topic");
  if (em_iters < 1) throw Error(ErrorKind::InvalidConfig, "em_iters must be >= 1");
  if (!(em_rel_tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "em_rel_tol must be positive");
  if (!(smoothing > 0.0)) throw Error(ErrorKind::InvalidConfig, "smoothing must be positive");
  if (threads < 1) throw Error(ErrorKind::InvalidConfig, "threads must be >= 1");
  inner.validate();
}

double corpus_log_likelihood(const Corpus& corpus, const TopicMatrix& beta,
                             const std::vector<TopicProportion>& thetas) {
  if (thetas.size() != corpus.size())
    throw Error(ErrorKind::InvalidArgument, "need one topic proportion per document");
  long double total = 0.0L;
  for (std::size_t d = 0; d < corpus.size(); ++d)
    total += ml_objective(corpus[d], beta)->value(thetas[d].dense());
  return double(total);
}

TrainResult train(const Corpus& corpus, const TrainConfig& cfg) {
  cfg.validate();
  if (corpus.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty corpus");
  const std::size_t k_count = cfg.num_topics, v_count = corpus.vocab_size();
  const std::size_t num_docs = corpus.size();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> init(0.0, 1.0);
  std::vector<double> values(k_count * v_count);
  for (double& x : values) x = init(rng) + 1e-3;
  TopicMatrix beta = TopicMatrix::from_rows(k_count, v_count, std::move(values));

  const std::size_t workers = std::min<std::size_t>(std::size_t(cfg.threads), num_docs);
  std::vector<RangeStats> stats(workers);
  std::vector<TopicProportion> thetas(num_docs);
  TrainResult result;

  for (int iter = 0; iter < cfg.em_iters; ++iter) {
    auto run = [&](std::size_t w) {
      e_step_range(corpus, beta, cfg, w * num_docs / workers, (w + 1) * num_docs / workers,
                   thetas, stats[w]);
    };
    if (workers == 1) {
      run(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }

    long double ll = 0.0L;
    for (const auto& s : stats) ll += s.log_likelihood;
    const double previous = result.log_likelihood.empty() ? 0.0 : result.log_likelihood.back();
    result.log_likelihood.push_back(double(ll));
    if (iter > 0 && std::abs(double(ll) - previous) / std::abs(previous) < cfg.em_rel_tol) break;
    if (iter + 1 == cfg.em_iters) break;

    std::vector<double> next(k_count * v_count, cfg.smoothing);
    for (const auto& s : stats)
      for (std::size_t i = 0; i < next.size(); ++i) next[i] += s.counts[i];
    beta = TopicMatrix::from_rows(k_count, v_count, std::move(next));
  }

  result.beta = std::move(beta);
  result.thetas = std::move(thetas);
  return result;
}

SyntheticCorpus sample_documents(const TopicMatrix& beta, std::size_t num_docs,
                                 std::size_t doc_length, double doc_concentration,
                                 std::uint64_t seed) {
  if (num_docs < 1 || doc_length < 1)
    throw Error(ErrorKind::InvalidArgument, "need at least one document of positive length");
  if (!(doc_concentration > 0.0))
    throw Error(ErrorKind::InvalidArgument, "Dirichlet concentration must be positive");
  const std::size_t k_count = beta.num_topics();
  std::mt19937_64 rng(seed);
  std::vector<std::discrete_distribution<std::size_t>> word_given_topic;
  word_given_topic.reserve(k_count);
  for (std::size_t k = 0; k < k_count; ++k)
    word_given_topic.emplace_back(beta.row(k).begin(), beta.row(k).end());

  std::vector<Document> docs;
  std::vector<std::vector<double>> thetas;
  docs.reserve(num_docs);
  thetas.reserve(num_docs);
  std::vector<double> counts(beta.vocab_size());
  for (std::size_t d = 0; d < num_docs; ++d) {
    auto theta = dirichlet_sample(rng, k_count, doc_concentration);
    std::discrete_distribution<std::size_t> topic(theta.begin(), theta.end());
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t n = 0; n < doc_length; ++n) counts[word_given_topic[topic(rng)](rng)] += 1.0;
    std::vector<TermCount> entries;
    for (std::size_t j = 0; j < counts.size(); ++j)
      if (counts[j] > 0.0) entries.push_back({j, counts[j]});
    docs.emplace_back(std::move(entries));
    thetas.push_back(std::move(theta));
  }
  return {Corpus(Vocabulary::anonymous(beta.vocab_size()), std::move(docs)), beta,
          std::move(thetas)};
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& cfg) {
  if (cfg.num_topics < 1 || cfg.vocab_size < 1)
    throw Error(ErrorKind::InvalidArgument, "need K >= 1 and V >= 1");
  if (!(cfg.topic_concentration > 0.0))
    throw Error(ErrorKind::InvalidArgument, "Dirichlet concentration must be positive");
  if (cfg.num_docs < 1 || cfg.doc_length < 1)
    throw Error(ErrorKind::InvalidArgument, "need at least one document of positive length");
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> rows;
  rows.reserve(cfg.num_topics * cfg.vocab_size);
  for (std::size_t k = 0; k < cfg.num_topics; ++k) {
    auto row = dirichlet_sample(rng, cfg.vocab_size, cfg.topic_concentration);
    rows.insert(rows.end(), row.begin(), row.end());
  }
  auto beta = TopicMatrix::from_rows(cfg.num_topics, cfg.vocab_size, std::move(rows));
  return sample_documents(beta, cfg.num_docs, cfg.doc_length, cfg.doc_concentration, rng());
}

}  // namespace fwtm
