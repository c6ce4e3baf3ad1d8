#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fwtm/fw_solver.hpp"
#include "fwtm/objectives.hpp"
#include "test_support.hpp"

using namespace fwtm;
using namespace fwtm::testing;

namespace {

TopicMatrix separable_topics() { return TopicMatrix::from_rows(2, 2, {1.0, 0.0, 0.0, 1.0}); }

bool on_simplex(std::span<const double> theta) {
  double sum = 0.0;
  for (double x : theta) {
    if (x < 0.0) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

// Objective with no analytic line restriction, forcing the generic path.
class Quadratic final : public Objective {
 public:
  explicit Quadratic(std::vector<double> center) : center_(std::move(center)) {}
  std::size_t num_topics() const override { return center_.size(); }
  Domain domain() const override { return Domain::FullSimplex; }
  double value(std::span<const double> theta) const override {
    double v = 0.0;
    for (std::size_t k = 0; k < center_.size(); ++k) v -= (theta[k] - center_[k]) * (theta[k] - center_[k]);
    return v;
  }
  void gradient(std::span<const double> theta, std::span<double> out) const override {
    for (std::size_t k = 0; k < center_.size(); ++k) out[k] = -2.0 * (theta[k] - center_[k]);
  }

 private:
  std::vector<double> center_;
};

class NanObjective final : public Objective {
 public:
  std::size_t num_topics() const override { return 2; }
  Domain domain() const override { return Domain::FullSimplex; }
  double value(std::span<const double> theta) const override { return theta[1] > 0.0 ? NAN : 0.0; }
  void gradient(std::span<const double>, std::span<double> out) const override {
    out[0] = 0.0;
    out[1] = 1.0;
  }
};

}  // namespace

TEST_CASE("separable topics reach the closed-form optimum") {
  auto f = ml_objective(Document({{0, 3.0}, {1, 1.0}}), separable_topics());
  SolverConfig cfg;
  cfg.rel_tol = 1e-12;
  auto result = fw_solve(*f, cfg);
  CHECK(result.report.theta.weight(0) == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(result.report.theta.weight(1) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(result.report.objective == doctest::Approx(3 * std::log(0.75) + std::log(0.25)).epsilon(1e-10));
}

TEST_CASE("best-vertex start") {
  auto beta = TopicMatrix::from_rows(2, 2, {0.9, 0.1, 0.1, 0.9});
  auto f = ml_objective(Document({{0, 3.0}, {1, 1.0}}), beta);
  SolverConfig cfg;
  cfg.max_iters = 1;
  auto result = fw_solve(*f, cfg);
  REQUIRE(!result.trace.empty());
  CHECK(result.trace[0].vertex == 0);
  CHECK(result.trace[0].nnz == 1);
  CHECK(result.trace[0].objective == doctest::Approx(3 * std::log(0.9) + std::log(0.1)).epsilon(1e-12));
  CHECK(result.trace[0].objective == doctest::Approx(-2.6184).epsilon(1e-4));

  // Equal vertex values: the lowest index wins.
  auto tie = ml_objective(Document({{0, 1.0}}), TopicMatrix::uniform(3, 2));
  CHECK(fw_solve(*tie, cfg).trace[0].vertex == 0);
}

TEST_CASE("final objective is within 1e-3 of the grid oracle") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> k_dist(2, 4), v_dist(5, 20);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t k_count = k_dist(rng), v_count = v_dist(rng);
    auto beta = random_topics(rng, k_count, v_count);
    auto doc = random_document(rng, v_count);
    auto f = ml_objective(doc, beta);
    SolverConfig cfg;
    cfg.rel_tol = 1e-10;
    auto solved = fw_solve(*f, cfg);
    auto grid = grid_search_max([&](std::span<const double> t) { return straight_log_likelihood(doc, beta, t); },
                                k_count);
    CHECK_MESSAGE(solved.report.objective >= grid.value - 1e-3, "K=" << k_count << " V=" << v_count);
  }
}

TEST_CASE("line_search") {
  SolverConfig cfg;
  auto quad = [](double a) { return -(a - 0.3) * (a - 0.3); };
  auto quad_d = [](double a) { return -2.0 * (a - 0.3); };
  CHECK(std::abs(line_search(quad, quad_d, cfg) - 0.3) <= 1e-10);
  CHECK(std::abs(line_search(quad, {}, cfg) - 0.3) <= 1e-6);

  CHECK(line_search([](double a) { return a; }, [](double) { return 1.0; }, cfg) == 1.0);
  CHECK(line_search([](double a) { return -a; }, [](double) { return -1.0; }, cfg) == 0.0);
  CHECK(line_search([](double a) { return a; }, {}, cfg) == 1.0);
  CHECK(line_search([](double a) { return -a; }, {}, cfg) == 0.0);

  // Without the upper end, an increasing function stops just short of 1.
  const double near_one = line_search([](double a) { return a; }, [](double) { return 1.0; }, cfg, false);
  CHECK(near_one < 1.0);
  CHECK(near_one > 1.0 - 1e-9);

  CHECK(thrown_kind([&] { line_search([](double) { return 0.0; }, [](double) { return NAN; }, cfg); }) ==
        ErrorKind::NumericFailure);
  CHECK(thrown_kind([&] { line_search([](double) { return NAN; }, {}, cfg); }) == ErrorKind::NumericFailure);
}

TEST_CASE("generic line restriction and NaN objectives") {
  Quadratic f({0.2, 0.5, 0.3});
  SolverConfig cfg;
  cfg.rel_tol = 1e-14;
  auto result = fw_solve(f, cfg);
  CHECK(result.report.objective > -1e-4);
  CHECK(thrown_kind([&] { fw_solve(NanObjective{}, SolverConfig{}); }) == ErrorKind::NumericFailure);
}

TEST_CASE("capped_simplex_argmax") {
  const std::vector<double> half(3, 0.5);
  CHECK(capped_simplex_argmax(std::vector<double>{3, 2, 1}, half) == std::vector<double>{0.5, 0.5, 0.0});
  // Ties go to the lowest index.
  CHECK(capped_simplex_argmax(std::vector<double>{1, 1, 1}, std::vector<double>{0.6, 0.6, 0.6}) ==
        std::vector<double>{0.6, 0.4, 0.0});

  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> k_dist(1, 6);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> cap_dist(0.05, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k_count = k_dist(rng);
    std::vector<double> c(k_count), caps(k_count);
    double mass = 0.0;
    do {
      mass = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) mass += (caps[k] = cap_dist(rng));
      if (k_count == 1) caps[0] = mass = 1.0;
    } while (mass < 1.0);
    for (double& x : c) x = normal(rng);
    auto s = capped_simplex_argmax(c, caps);
    double value = 0.0, sum = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      CHECK(s[k] <= caps[k]);
      value += c[k] * s[k];
      sum += s[k];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(value - capped_lp_brute_force(c, caps)) <= 1e-9);
  }
}

TEST_CASE("fw_solve_capped") {
  std::mt19937_64 rng(303);
  SUBCASE("unit caps reproduce fw_solve exactly") {
    for (int trial = 0; trial < 20; ++trial) {
      auto beta = random_topics(rng, 5, 12);
      auto f = ml_objective(random_document(rng, 12), beta);
      const std::vector<double> ones(5, 1.0);
      for (auto start : {StartPoint::BestVertex, StartPoint::Barycenter}) {
        SolverConfig cfg;
        cfg.start = start;
        auto plain = fw_solve(*f, cfg);
        auto capped = fw_solve_capped(*f, ones, cfg);
        REQUIRE(plain.trace.size() == capped.trace.size());
        for (std::size_t i = 0; i < plain.trace.size(); ++i) {
          CHECK(plain.trace[i].objective == capped.trace[i].objective);
          CHECK(plain.trace[i].alpha == capped.trace[i].alpha);
          CHECK(plain.trace[i].vertex == capped.trace[i].vertex);
        }
        CHECK(plain.report.theta.dense() == capped.report.theta.dense());
      }
    }
  }

  SUBCASE("iterates respect the caps") {
    for (int trial = 0; trial < 20; ++trial) {
      auto beta = random_topics(rng, 4, 10);
      auto f = ml_objective(random_document(rng, 10), beta);
      const std::vector<double> caps{0.3, 0.3, 0.3, 0.3};
      for (auto start : {StartPoint::BestVertex, StartPoint::Barycenter}) {
        SolverConfig cfg;
        cfg.start = start;
        auto result = fw_solve_capped(*f, caps, cfg);
        auto theta = result.report.theta.dense();
        CHECK(on_simplex(theta));
        for (std::size_t k = 0; k < 4; ++k) CHECK(theta[k] <= caps[k] + 1e-12);
        for (std::size_t i = 1; i < result.trace.size(); ++i)
          CHECK(result.trace[i].objective >= result.trace[i - 1].objective);
      }
    }
  }

  SUBCASE("errors") {
    auto f = ml_objective(Document({{0, 1.0}}), TopicMatrix::uniform(3, 2));
    CHECK(thrown_kind([&] { fw_solve_capped(*f, std::vector<double>{0.3, 0.3, 0.3}, SolverConfig{}); }) ==
          ErrorKind::InfeasibleRegion);
    CHECK(thrown_kind([&] { fw_solve_capped(*f, std::vector<double>{1.0, 1.0}, SolverConfig{}); }) ==
          ErrorKind::InvalidArgument);
  }
}

TEST_CASE("interior-only objectives need a barycenter start") {
  std::mt19937_64 rng(404);
  auto beta = random_topics(rng, 3, 6);
  auto doc = random_document(rng, 6);
  auto f = ctm_map_objective(doc, beta, CtmPrior(random_nonnegative_spd(rng, 3)));
  CHECK(thrown_kind([&] { fw_solve(*f, SolverConfig{}); }) == ErrorKind::InvalidConfig);

  SolverConfig cfg;
  cfg.start = StartPoint::Barycenter;
  auto result = fw_solve(*f, cfg);
  CHECK(on_simplex(result.report.theta.dense()));
  for (std::size_t i = 1; i < result.trace.size(); ++i)
    CHECK(result.trace[i].objective >= result.trace[i - 1].objective);

  auto lda = lda_map_objective(doc, beta, std::vector<double>{1.5, 1.5, 1.5});
  auto lda_result = fw_solve(*lda, cfg);
  CHECK(lda_result.report.nnz == 3);
}

TEST_CASE("solver properties on random instances") {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<std::size_t> k_dist(2, 30), v_dist(5, 40);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k_count = k_dist(rng), v_count = v_dist(rng);
    auto beta = random_topics(rng, k_count, v_count);
    auto f = ml_objective(random_document(rng, v_count), beta);

    SolverConfig cfg;
    cfg.rel_tol = 1e-10;
    auto result = fw_solve(*f, cfg);
    const auto& trace = result.trace;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      CHECK(trace[i].iteration == int(i));
      CHECK(trace[i].nnz <= i + 1);
      if (i > 0) CHECK(trace[i].objective >= trace[i - 1].objective);
    }
    CHECK(result.report.nnz <= std::size_t(result.report.iterations) + 1);
    CHECK(on_simplex(result.report.theta.dense()));

    // A shorter run is a bitwise prefix of a longer one.
    SolverConfig short_cfg = cfg, long_cfg = cfg;
    short_cfg.max_iters = 3;
    long_cfg.max_iters = 100;
    auto short_run = fw_solve(*f, short_cfg), long_run = fw_solve(*f, long_cfg);
    REQUIRE(short_run.trace.size() <= long_run.trace.size());
    for (std::size_t i = 0; i < short_run.trace.size(); ++i) {
      CHECK(short_run.trace[i].objective == long_run.trace[i].objective);
      CHECK(short_run.trace[i].alpha == long_run.trace[i].alpha);
      CHECK(short_run.trace[i].vertex == long_run.trace[i].vertex);
    }
    CHECK(long_run.report.objective >= short_run.report.objective);

    for (int cap : {1, 2, 4}) {
      SolverConfig capped = cfg;
      capped.max_nnz = cap;
      auto r = fw_solve(*f, capped);
      CHECK(r.report.nnz <= std::size_t(cap));
      CHECK(r.report.iterations <= cap - 1);
    }
  }
}

TEST_CASE("degenerate sizes and the trace CSV") {
  auto single = ml_objective(Document({{1, 2.0}}), TopicMatrix::uniform(1, 3));
  auto result = fw_solve(*single, SolverConfig{});
  CHECK(result.report.theta.weight(0) == 1.0);
  CHECK(result.report.nnz == 1);

  SolverConfig cfg;
  cfg.max_nnz = 1;
  std::mt19937_64 rng(606);
  auto f = ml_objective(random_document(rng, 8), random_topics(rng, 5, 8));
  auto one = fw_solve(*f, cfg);
  CHECK(one.report.iterations == 0);
  CHECK(one.report.nnz == 1);

  auto two = fw_solve(*ml_objective(Document({{0, 3.0}, {1, 1.0}}), separable_topics()), SolverConfig{});
  std::ostringstream csv;
  write_trace_csv(csv, two.trace);
  std::istringstream lines(csv.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "iteration,objective,nnz,vertex,alpha");
  CHECK(first.rfind("0,", 0) == 0);
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows + 1 == two.trace.size());
}
