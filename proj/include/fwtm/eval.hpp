#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fwtm/core_model.hpp"
#include "fwtm/objectives.hpp"

namespace fwtm {

using InferenceFn = std::function<InferenceReport(const Document&)>;
using ObjectiveFactory = std::function<ObjectivePtr(const Document&)>;

struct DocumentRow {
  std::size_t doc = 0;
  double log_likelihood = 0.0;  ///< log P(d) under the inferred theta
  double objective = 0.0;       ///< the inference procedure's own objective
  double length = 0.0;
  std::size_t nnz = 0;
  int iterations = 0;
  TopicProportion theta;
};

struct EvalReport {
  double perplexity = 0.0;
  double mean_sparsity = 0.0;
  double mean_nnz = 0.0;
  double total_time = 0.0;  ///< wall-clock seconds for inference over the set
  std::vector<DocumentRow> rows;
};

/// Runs `infer` on every document and scores the result:
/// perplexity = exp(-sum_d log P(d) / sum_d ||d||_1).
/// With threads > 1 documents are split into fixed ranges; rows and sums are
/// still produced in document order.
EvalReport evaluate(const Corpus& testset, const TopicMatrix& beta, const InferenceFn& infer,
                    int threads = 1);

double perplexity(const Corpus& testset, const TopicMatrix& beta, const InferenceFn& infer);

/// Fraction of nonzero components, nnz / K.
double sparsity(const TopicProportion& theta, std::size_t num_topics);

struct TradeoffRow {
  int cap = 0;  ///< sparsity cap (max_nnz) used for this row
  EvalReport report;
};

/// One evaluation per cap with SolverConfig::max_nnz = cap. Caps must be
/// strictly increasing and positive.
std::vector<TradeoffRow> tradeoff_sweep(const Corpus& testset, const TopicMatrix& beta,
                                        const ObjectiveFactory& objective,
                                        std::span<const int> caps, const SolverConfig& cfg,
                                        int threads = 1);

enum class Method { FrankWolfe, FoldingIn, VariationalBayes };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct MethodRow {
  Method method;
  EvalReport report;
};

/// FW on the likelihood, folding-in and VB, all under the same stopping
/// rule from `cfg`. `alpha` is only used by VB.
std::vector<MethodRow> compare_methods(const Corpus& testset, const TopicMatrix& beta,
                                       std::span<const double> alpha, const SolverConfig& cfg,
                                       std::span<const Method> methods, int threads = 1);

/// Header: method,cap,perplexity,sparsity,mean_nnz,seconds
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const std::string& method, int cap,
                      const EvalReport& report);

}  // namespace fwtm
