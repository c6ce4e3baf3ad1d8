#include "fwtm/eval.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <thread>

#include "fwtm/baselines.hpp"
#include "fwtm/fw_solver.hpp"

namespace fwtm {

EvalReport evaluate(const Corpus& testset, const TopicMatrix& beta, const InferenceFn& infer,
                    int threads) {
  if (testset.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty test set");
  if (threads < 1) throw Error(ErrorKind::InvalidConfig, "threads must be >= 1");
  const std::size_t num_docs = testset.size();
  const std::size_t k_count = beta.num_topics();
  EvalReport report;
  report.rows.resize(num_docs);

  auto run_range = [&](std::size_t first, std::size_t last) {
    for (std::size_t d = first; d < last; ++d) {
      auto inferred = infer(testset[d]);
      auto& row = report.rows[d];
      row.doc = d;
      row.objective = inferred.objective;
      row.length = testset[d].length();
      row.nnz = inferred.theta.nnz();
      row.iterations = inferred.iterations;
      row.theta = std::move(inferred.theta);
    }
  };

  const auto started = std::chrono::steady_clock::now();
  const std::size_t workers = std::min<std::size_t>(std::size_t(threads), num_docs);
  if (workers == 1) {
    run_range(0, num_docs);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back(run_range, w * num_docs / workers, (w + 1) * num_docs / workers);
  }
  report.total_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  // Scoring is outside the timed region.
  long double log_prob = 0.0L, length = 0.0L, nnz = 0.0L;
  for (auto& row : report.rows) {
    row.log_likelihood = ml_objective(testset[row.doc], beta)->value(row.theta.dense());
    log_prob += row.log_likelihood;
    length += row.length;
    nnz += row.nnz;
  }
  report.perplexity = double(std::exp(-log_prob / length));
  report.mean_nnz = double(nnz / num_docs);
  report.mean_sparsity = report.mean_nnz / double(k_count);
  return report;
}

double perplexity(const Corpus& testset, const TopicMatrix& beta, const InferenceFn& infer) {
  return evaluate(testset, beta, infer).perplexity;
}

double sparsity(const TopicProportion& theta, std::size_t num_topics) {
  if (num_topics == 0) throw Error(ErrorKind::InvalidArgument, "K must be positive");
  return double(theta.nnz()) / double(num_topics);
}

std::vector<TradeoffRow> tradeoff_sweep(const Corpus& testset, const TopicMatrix& beta,
                                        const ObjectiveFactory& objective,
                                        std::span<const int> caps, const SolverConfig& cfg,
                                        int threads) {
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (caps[i] < 1) throw Error(ErrorKind::InvalidArgument, "caps must be positive");
    if (i > 0 && caps[i] <= caps[i - 1])
      throw Error(ErrorKind::InvalidArgument, "caps must be strictly increasing");
  }
  std::vector<TradeoffRow> rows;
  rows.reserve(caps.size());
  for (int cap : caps) {
    SolverConfig capped = cfg;
    capped.max_nnz = cap;
    auto infer = [&](const Document& d) { return fw_solve(*objective(d), capped).report; };
    rows.push_back({cap, evaluate(testset, beta, infer, threads)});
  }
  return rows;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::FrankWolfe: return "fw";
    case Method::FoldingIn: return "folding";
    case Method::VariationalBayes: return "vb";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "fw") return Method::FrankWolfe;
  if (name == "folding") return Method::FoldingIn;
  if (name == "vb") return Method::VariationalBayes;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + name + "'");
}

std::vector<MethodRow> compare_methods(const Corpus& testset, const TopicMatrix& beta,
                                       std::span<const double> alpha, const SolverConfig& cfg,
                                       std::span<const Method> methods, int threads) {
  std::vector<MethodRow> rows;
  for (Method m : methods) {
    InferenceFn infer;
    switch (m) {
      case Method::FrankWolfe:
        infer = [&](const Document& d) { return fw_solve(*ml_objective(d, beta), cfg).report; };
        break;
      case Method::FoldingIn:
        infer = [&](const Document& d) { return folding_in(d, beta, cfg); };
        break;
      case Method::VariationalBayes:
        infer = [&](const Document& d) { return vb_infer(d, beta, alpha, cfg); };
        break;
    }
    rows.push_back({m, evaluate(testset, beta, infer, threads)});
  }
  return rows;
}

void write_report_header(std::ostream& out) {
  out << "method,cap,perplexity,sparsity,mean_nnz,seconds\n";
}

void write_report_row(std::ostream& out, const std::string& method, int cap,
                      const EvalReport& report) {
  const auto old_precision = out.precision(17);
  out << method << ',' << cap << ',' << report.perplexity << ',' << report.mean_sparsity << ','
      << report.mean_nnz << ',' << report.total_time << '\n';
  out.precision(old_precision);
}

}  // namespace fwtm
