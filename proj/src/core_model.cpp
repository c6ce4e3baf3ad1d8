#include "fwtm/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fwtm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::DomainViolation: return "domain-violation";
    case ErrorKind::NonconcavePrior: return "nonconcave-prior";
    case ErrorKind::NumericFailure: return "numeric-failure";
    case ErrorKind::InfeasibleRegion: return "infeasible-region";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::FormatError: return "format-error";
    case ErrorKind::BoundsError: return "bounds-error";
    case ErrorKind::UnsupportedVersion: return "unsupported-version";
    case ErrorKind::ValidationError: return "validation-error";
  }
  return "unknown";
}

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw Error(ErrorKind::InvalidArgument, "vocabulary must not be empty");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!index_.emplace(terms_[i], i).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate vocabulary term '" + terms_[i] + "'");
  }
}

Vocabulary Vocabulary::anonymous(std::size_t size) {
  std::vector<std::string> terms;
  terms.reserve(size);
  for (std::size_t i = 0; i < size; ++i) terms.push_back("w" + std::to_string(i));
  return Vocabulary(std::move(terms));
}

std::optional<std::size_t> Vocabulary::id(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ------------------------------------------------------------------ Document

Document::Document(std::vector<TermCount> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!(e.count > 0.0) || !std::isfinite(e.count))
      throw Error(ErrorKind::InvalidArgument,
                  "document count for term " + std::to_string(e.term) + " must be positive");
    if (i > 0 && entries_[i - 1].term == e.term)
      throw Error(ErrorKind::InvalidArgument, "duplicate term " + std::to_string(e.term));
    length_ += e.count;
  }
}

// -------------------------------------------------------------------- Corpus

Corpus::Corpus(Vocabulary vocabulary, std::vector<Document> documents)
    : vocabulary_(std::move(vocabulary)), documents_(std::move(documents)) {
  if (vocabulary_.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty vocabulary");
  if (documents_.empty()) throw Error(ErrorKind::InvalidArgument, "corpus has no documents");
  for (std::size_t d = 0; d < documents_.size(); ++d) {
    if (documents_[d].empty())
      throw Error(ErrorKind::InvalidArgument, "document " + std::to_string(d) + " is empty");
    if (documents_[d].min_vocab_size() > vocabulary_.size())
      throw Error(ErrorKind::BoundsError,
                  "document " + std::to_string(d) + " uses a term outside the vocabulary");
  }
}

double Corpus::total_length() const noexcept {
  double total = 0.0;
  for (const auto& d : documents_) total += d.length();
  return total;
}

// --------------------------------------------------------------- TopicMatrix

TopicMatrix TopicMatrix::from_rows(std::size_t num_topics, std::size_t vocab_size,
                                   std::vector<double> row_major) {
  if (num_topics == 0 || vocab_size == 0)
    throw Error(ErrorKind::InvalidArgument, "topic matrix needs K >= 1 and V >= 1");
  if (row_major.size() != num_topics * vocab_size)
    throw Error(ErrorKind::InvalidArgument, "topic matrix data has wrong size");
  for (std::size_t k = 0; k < num_topics; ++k) {
    std::span<double> row(row_major.data() + k * vocab_size, vocab_size);
    double sum = 0.0;
    for (double& x : row) {
      if (!std::isfinite(x) || x < 0.0)
        throw Error(ErrorKind::InvalidArgument, "topic " + std::to_string(k) +
                                                    " has a negative or non-finite entry");
      sum += x;
    }
    if (!(sum > 0.0))
      throw Error(ErrorKind::InvalidArgument, "topic " + std::to_string(k) + " is all zero");
    // Second pass re-applies the floor: renormalizing can push floored entries
    // just under it. The resulting row-sum error is O(V * floor^2).
    for (double& x : row) x = std::max(x / sum, kTopicFloor);
    sum = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& x : row) x = std::max(x / sum, kTopicFloor);
  }
  return TopicMatrix(num_topics, vocab_size, std::move(row_major));
}

TopicMatrix TopicMatrix::unchecked(std::size_t num_topics, std::size_t vocab_size,
                                   std::vector<double> row_major) {
  if (row_major.size() != num_topics * vocab_size)
    throw Error(ErrorKind::InvalidArgument, "topic matrix data has wrong size");
  return TopicMatrix(num_topics, vocab_size, std::move(row_major));
}

TopicMatrix TopicMatrix::uniform(std::size_t num_topics, std::size_t vocab_size) {
  if (num_topics == 0 || vocab_size == 0)
    throw Error(ErrorKind::InvalidArgument, "topic matrix needs K >= 1 and V >= 1");
  return TopicMatrix(num_topics, vocab_size,
                     std::vector<double>(num_topics * vocab_size, 1.0 / double(vocab_size)));
}

// ----------------------------------------------------------- TopicProportion

TopicProportion::TopicProportion(std::size_t num_topics, std::vector<TopicWeight> entries)
    : num_topics_(num_topics), entries_(std::move(entries)) {
  if (num_topics_ == 0) throw Error(ErrorKind::InvalidArgument, "topic proportion needs K >= 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.topic >= num_topics_)
      throw Error(ErrorKind::BoundsError, "topic id " + std::to_string(e.topic) + " out of range");
    if (i > 0 && entries_[i - 1].topic >= e.topic)
      throw Error(ErrorKind::InvalidArgument, "topic ids must be strictly increasing");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw Error(ErrorKind::InvalidArgument, "topic weights must be positive");
    sum += e.weight;
  }
  if (std::abs(sum - 1.0) > kSimplexTol)
    throw Error(ErrorKind::InvalidArgument, "topic weights sum to " + std::to_string(sum));
}

TopicProportion TopicProportion::from_dense(std::span<const double> dense) {
  std::vector<TopicWeight> entries;
  for (std::size_t k = 0; k < dense.size(); ++k)
    if (dense[k] > 0.0) entries.push_back({k, dense[k]});
  return TopicProportion(dense.size(), std::move(entries));
}

TopicProportion TopicProportion::vertex(std::size_t num_topics, std::size_t topic) {
  return TopicProportion(num_topics, {{topic, 1.0}});
}

double TopicProportion::weight(std::size_t topic) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), topic,
                             [](const TopicWeight& e, std::size_t t) { return e.topic < t; });
  return (it != entries_.end() && it->topic == topic) ? it->weight : 0.0;
}

std::vector<double> TopicProportion::dense() const {
  std::vector<double> out(num_topics_, 0.0);
  for (const auto& e : entries_) out[e.topic] = e.weight;
  return out;
}

// -------------------------------------------------------------- SolverConfig

void SolverConfig::validate() const {
  if (max_iters < 0) throw Error(ErrorKind::InvalidConfig, "max_iters must be non-negative");
  if (!(rel_tol > 0.0)) throw Error(ErrorKind::InvalidConfig, "rel_tol must be positive");
  if (max_nnz && *max_nnz < 1) throw Error(ErrorKind::InvalidConfig, "max_nnz must be >= 1");
  if (!(line_search_tol > 0.0))
    throw Error(ErrorKind::InvalidConfig, "line_search_tol must be positive");
  if (line_search_max_steps < 1)
    throw Error(ErrorKind::InvalidConfig, "line_search_max_steps must be >= 1");
}

int SolverConfig::iteration_limit() const {
  return max_nnz ? std::min(max_iters, *max_nnz - 1) : max_iters;
}

// ---------------------------------------------------------------- operations

TopicProportion simplex_barycenter(std::size_t num_topics) {
  if (num_topics == 0) throw Error(ErrorKind::InvalidArgument, "barycenter needs K >= 1");
  std::vector<TopicWeight> entries(num_topics);
  const double w = 1.0 / double(num_topics);
  for (std::size_t k = 0; k < num_topics; ++k) entries[k] = {k, w};
  return TopicProportion(num_topics, std::move(entries));
}

std::vector<std::string> validate_topic_matrix(const TopicMatrix& beta) {
  std::vector<std::string> violations;
  const std::size_t k_count = beta.num_topics(), v_count = beta.vocab_size();
  if (k_count == 0 || v_count == 0 || beta.data().size() != k_count * v_count) {
    violations.emplace_back("shape");
    return violations;
  }
  bool finite = true, positive = true, sums = true;
  for (std::size_t k = 0; k < k_count; ++k) {
    double sum = 0.0;
    for (double x : beta.row(k)) {
      if (!std::isfinite(x)) finite = false;
      else if (x < kTopicFloor) positive = false;
      sum += x;
    }
    if (!(std::abs(sum - 1.0) <= kSimplexTol)) sums = false;
  }
  if (!finite) violations.emplace_back("finite");
  if (!positive) violations.emplace_back("positivity");
  if (!sums) violations.emplace_back("row-sum");
  return violations;
}

void require_valid(const TopicMatrix& beta) {
  auto violations = validate_topic_matrix(beta);
  if (violations.empty()) return;
  std::string msg = "topic matrix violates:";
  for (const auto& v : violations) msg += " " + v;
  throw Error(ErrorKind::ValidationError, msg);
}

}  // namespace fwtm
