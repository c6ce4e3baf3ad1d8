#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fwtm/error.hpp"

namespace fwtm {

/// Positivity floor applied to every topic-word probability.
inline constexpr double kTopicFloor = 1e-10;
/// Tolerance on simplex sums (topic rows and topic proportions).
inline constexpr double kSimplexTol = 1e-9;

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms);

  /// Vocabulary of `size` placeholder terms "w0", "w1", ...
  static Vocabulary anonymous(std::size_t size);

  std::size_t size() const noexcept { return terms_.size(); }
  const std::string& term(std::size_t id) const { return terms_.at(id); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  std::optional<std::size_t> id(const std::string& term) const;

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct TermCount {
  std::size_t term;
  double count;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

/// Sparse bag-of-words document. Entries are sorted by term id and every
/// count is strictly positive.
class Document {
 public:
  Document() = default;
  /// Entries may arrive in any order; duplicates are an error.
  explicit Document(std::vector<TermCount> entries);

  std::span<const TermCount> entries() const noexcept { return entries_; }
  std::size_t num_terms() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Sum of counts, ||d||_1.
  double length() const noexcept { return length_; }
  /// One past the largest term id (0 for an empty document).
  std::size_t min_vocab_size() const noexcept {
    return entries_.empty() ? 0 : entries_.back().term + 1;
  }

 private:
  std::vector<TermCount> entries_;
  double length_ = 0.0;
};

class Corpus {
 public:
  Corpus(Vocabulary vocabulary, std::vector<Document> documents);

  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  std::size_t vocab_size() const noexcept { return vocabulary_.size(); }
  std::span<const Document> documents() const noexcept { return documents_; }
  std::size_t size() const noexcept { return documents_.size(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  double total_length() const noexcept;

 private:
  Vocabulary vocabulary_;
  std::vector<Document> documents_;
};

/// K topics over V terms, stored row-major (row k is topic k).
class TopicMatrix {
 public:
  TopicMatrix() = default;

  /// Rows are floored at kTopicFloor and renormalized. Throws on non-finite
  /// or negative input or on an all-zero row.
  static TopicMatrix from_rows(std::size_t num_topics, std::size_t vocab_size,
                               std::vector<double> row_major);

  /// Wraps the values as given, without flooring. Meant for diagnostics and
  /// for tests that need an invalid matrix; check with validate_topic_matrix.
  static TopicMatrix unchecked(std::size_t num_topics, std::size_t vocab_size,
                               std::vector<double> row_major);

  static TopicMatrix uniform(std::size_t num_topics, std::size_t vocab_size);

  std::size_t num_topics() const noexcept { return num_topics_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  double operator()(std::size_t topic, std::size_t term) const {
    return data_[topic * vocab_size_ + term];
  }
  std::span<const double> row(std::size_t topic) const {
    return {data_.data() + topic * vocab_size_, vocab_size_};
  }
  std::span<const double> data() const noexcept { return data_; }

 private:
  TopicMatrix(std::size_t k, std::size_t v, std::vector<double> data)
      : num_topics_(k), vocab_size_(v), data_(std::move(data)) {}

  std::size_t num_topics_ = 0;
  std::size_t vocab_size_ = 0;
  std::vector<double> data_;
};

struct TopicWeight {
  std::size_t topic;
  double weight;
};

/// Sparse point on the K-simplex; only nonzero weights are stored.
class TopicProportion {
 public:
  TopicProportion() = default;
  /// Validates: ids strictly increasing and < num_topics, weights > 0,
  /// weights sum to 1 within kSimplexTol.
  TopicProportion(std::size_t num_topics, std::vector<TopicWeight> entries);

  /// Keeps the strictly positive coordinates of a dense vector.
  static TopicProportion from_dense(std::span<const double> dense);
  static TopicProportion vertex(std::size_t num_topics, std::size_t topic);

  std::size_t num_topics() const noexcept { return num_topics_; }
  std::span<const TopicWeight> entries() const noexcept { return entries_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  double weight(std::size_t topic) const;
  std::vector<double> dense() const;

 private:
  std::size_t num_topics_ = 0;
  std::vector<TopicWeight> entries_;
};

enum class StartPoint { BestVertex, Barycenter };

struct SolverConfig {
  int max_iters = 1000;
  double rel_tol = 1e-6;
  /// Sparsity cap; the solver stops after max_nnz - 1 iterations.
  std::optional<int> max_nnz;
  StartPoint start = StartPoint::BestVertex;
  double line_search_tol = 1e-10;
  int line_search_max_steps = 60;

  void validate() const;
  /// Number of iterations actually permitted, combining max_iters and max_nnz.
  int iteration_limit() const;
};

struct InferenceReport {
  TopicProportion theta;
  int iterations = 0;
  double objective = 0.0;
  double elapsed = 0.0;  // seconds
  std::size_t nnz = 0;
};

TopicProportion simplex_barycenter(std::size_t num_topics);

/// Returns the violated invariants ("shape", "finite", "positivity",
/// "row-sum"), each at most once, in that order. Empty means valid.
std::vector<std::string> validate_topic_matrix(const TopicMatrix& beta);

/// Throws ValidationError listing the violations, if any.
void require_valid(const TopicMatrix& beta);

}  // namespace fwtm
