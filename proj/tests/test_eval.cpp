#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fwtm/eval.hpp"
#include "fwtm/fw_solver.hpp"
#include "fwtm/learning.hpp"
#include "test_support.hpp"

using namespace fwtm;
using namespace fwtm::testing;

namespace {

InferenceFn fw_ml(const TopicMatrix& beta, SolverConfig cfg = {}) {
  return [&beta, cfg](const Document& d) { return fw_solve(*ml_objective(d, beta), cfg).report; };
}

SyntheticCorpus small_synthetic(std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.num_topics = 6;
  cfg.vocab_size = 50;
  cfg.num_docs = 40;
  cfg.doc_length = 30;
  cfg.seed = seed;
  return generate_synthetic_corpus(cfg);
}

}  // namespace

TEST_CASE("uniform topics give perplexity V") {
  std::mt19937_64 rng(1);
  for (std::size_t v_count : {5u, 37u, 100u}) {
    std::vector<Document> docs;
    for (int d = 0; d < 12; ++d) docs.push_back(random_document(rng, v_count));
    Corpus corpus(Vocabulary::anonymous(v_count), std::move(docs));
    auto beta = TopicMatrix::uniform(4, v_count);
    CHECK(std::abs(perplexity(corpus, beta, fw_ml(beta)) - double(v_count)) <= 1e-9);
  }
}

TEST_CASE("single repeated term gives perplexity 1/p") {
  auto beta = TopicMatrix::from_rows(1, 3, {0.2, 0.5, 0.3});
  Corpus corpus(Vocabulary::anonymous(3), {Document({{1, 7.0}})});
  CHECK(perplexity(corpus, beta, fw_ml(beta)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("perplexity matches a straight-line computation") {
  auto data = small_synthetic(4);
  auto report = evaluate(data.corpus, data.beta, fw_ml(data.beta));
  double log_prob = 0.0, length = 0.0, nnz = 0.0;
  for (std::size_t d = 0; d < data.corpus.size(); ++d) {
    const auto& doc = data.corpus[d];
    for (const auto& e : doc.entries()) length += e.count;
    log_prob += straight_log_likelihood(doc, data.beta, report.rows[d].theta.dense());
    nnz += double(report.rows[d].theta.nnz());
    CHECK(report.rows[d].doc == d);
  }
  CHECK(relative_close(report.perplexity, std::exp(-log_prob / length), 1e-9));
  CHECK(report.mean_nnz == doctest::Approx(nnz / 40.0).epsilon(1e-12));
  CHECK(report.mean_sparsity == doctest::Approx(nnz / 40.0 / 6.0).epsilon(1e-12));
  CHECK(report.perplexity >= 1.0);
  CHECK(report.total_time >= 0.0);

  // Fixed ranges keep the result independent of the worker count.
  auto threaded = evaluate(data.corpus, data.beta, fw_ml(data.beta), 4);
  CHECK(threaded.perplexity == report.perplexity);
  for (std::size_t d = 0; d < data.corpus.size(); ++d)
    CHECK(threaded.rows[d].theta.dense() == report.rows[d].theta.dense());
}

TEST_CASE("sparsity") {
  CHECK(sparsity(TopicProportion::vertex(10, 3), 10) == 0.1);
  CHECK(sparsity(simplex_barycenter(7), 7) == 1.0);
  CHECK(thrown_kind([] { sparsity(TopicProportion::vertex(1, 0), 0); }) == ErrorKind::InvalidArgument);

  auto data = small_synthetic(5);
  SolverConfig cfg;
  cfg.max_iters = 4;
  auto report = evaluate(data.corpus, data.beta, fw_ml(data.beta, cfg));
  for (const auto& row : report.rows) CHECK(sparsity(row.theta, 6) <= 5.0 / 6.0);
}

TEST_CASE("tradeoff_sweep") {
  auto data = small_synthetic(6);
  auto factory = [&](const Document& d) { return ml_objective(d, data.beta); };
  SolverConfig cfg;

  const std::vector<int> one{1};
  auto single = tradeoff_sweep(data.corpus, data.beta, factory, one, cfg);
  REQUIRE(single.size() == 1);
  CHECK(single[0].report.mean_sparsity == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  for (const auto& row : single[0].report.rows) CHECK(row.nnz == 1);

  const std::vector<int> caps{1, 2, 4, 6};
  auto rows = tradeoff_sweep(data.corpus, data.beta, factory, caps, cfg, 2);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].cap == caps[i]);
    CHECK(rows[i].report.mean_nnz <= double(caps[i]));
    if (i == 0) continue;
    CHECK(rows[i].report.perplexity <= rows[i - 1].report.perplexity * (1 + 1e-12));
    for (std::size_t d = 0; d < data.corpus.size(); ++d)
      CHECK(rows[i].report.rows[d].objective >= rows[i - 1].report.rows[d].objective);
  }

  const std::vector<int> unsorted{2, 2};
  CHECK(thrown_kind([&] { tradeoff_sweep(data.corpus, data.beta, factory, unsorted, cfg); }) ==
        ErrorKind::InvalidArgument);
  const std::vector<int> zero{0};
  CHECK(thrown_kind([&] { tradeoff_sweep(data.corpus, data.beta, factory, zero, cfg); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("compare_methods") {
  auto data = small_synthetic(7);
  const std::vector<double> alpha(6, 0.1);
  const std::vector<Method> all{Method::FrankWolfe, Method::FoldingIn, Method::VariationalBayes};
  auto rows = compare_methods(data.corpus, data.beta, alpha, SolverConfig{}, all);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].method == Method::FrankWolfe);
  CHECK(rows[0].report.mean_sparsity < 1.0);
  CHECK(rows[2].report.mean_sparsity == 1.0);
  for (const auto& row : rows) CHECK(row.report.perplexity < 50.0);

  // With a single topic every method returns theta = (1).
  auto one_topic = TopicMatrix::uniform(1, 50);
  auto single = compare_methods(data.corpus, one_topic, std::vector<double>{0.1}, SolverConfig{}, all);
  CHECK(single[0].report.perplexity == single[1].report.perplexity);
  CHECK(single[1].report.perplexity == single[2].report.perplexity);

  CHECK(parse_method("vb") == Method::VariationalBayes);
  CHECK(method_name(parse_method("folding")) == "folding");
  CHECK(thrown_kind([] { parse_method("cgs"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("true topics beat the uniform model on held-out documents") {
  SyntheticConfig cfg;
  cfg.num_topics = 10;
  cfg.vocab_size = 200;
  cfg.num_docs = 50;
  cfg.doc_length = 100;
  auto data = generate_synthetic_corpus(cfg);
  auto held_out = sample_documents(data.beta, 50, 100, cfg.doc_concentration, 1234);
  CHECK(perplexity(held_out.corpus, data.beta, fw_ml(data.beta)) < 200.0);
}

TEST_CASE("report CSV") {
  std::ostringstream out;
  write_report_header(out);
  EvalReport r;
  r.perplexity = 12.5;
  r.mean_sparsity = 0.25;
  r.mean_nnz = 2.5;
  r.total_time = 0.125;
  write_report_row(out, "fw", 1000, r);
  CHECK(out.str() == "method,cap,perplexity,sparsity,mean_nnz,seconds\nfw,1000,12.5,0.25,2.5,0.125\n");
  CHECK(thrown_kind([] {
          evaluate(Corpus(Vocabulary::anonymous(1), {Document({{0, 1.0}})}), TopicMatrix::uniform(1, 1),
                   [](const Document&) { return InferenceReport{}; }, 0);
        }) == ErrorKind::InvalidConfig);
}
