#include "fwtm/fw_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

namespace fwtm {
namespace {

constexpr double kPruneBelow = 1e-15;

double checked(double x, const char* what) {
  if (std::isnan(x)) throw Error(ErrorKind::NumericFailure, std::string(what) + " is NaN");
  return x;
}

bool converged(double previous, double current, double rel_tol) {
  const double change = std::abs(current - previous);
  if (std::abs(previous) < 1e-12) return change < rel_tol;
  return change / std::abs(previous) < rel_tol;
}

std::size_t argmax_lowest(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    checked(v[k], "objective component");
    if (v[k] > v[best]) best = k;
  }
  return best;
}

std::size_t count_nonzero(std::span<const double> theta) {
  return std::size_t(std::count_if(theta.begin(), theta.end(), [](double x) { return x > 0.0; }));
}

// theta <- (1 - a) theta + a s, then drop underflowed weights.
void convex_update(std::vector<double>& theta, std::span<const double> target, double a) {
  bool pruned = false;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    theta[k] = (1.0 - a) * theta[k] + a * target[k];
    if (theta[k] != 0.0 && theta[k] < kPruneBelow) {
      theta[k] = 0.0;
      pruned = true;
    }
  }
  if (pruned) {
    const double sum = std::accumulate(theta.begin(), theta.end(), 0.0);
    for (double& x : theta) x /= sum;
  }
}

// Picks the ascent target for the current gradient; returns the index
// recorded in the trace.
using DirectionOracle = std::function<long(std::span<const double> grad, std::vector<double>& s)>;

SolveResult run_frank_wolfe(const Objective& f, std::vector<double> theta, long start_vertex,
                            const DirectionOracle& oracle, const SolverConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t k_count = theta.size();
  const bool upper_end = f.domain() == Domain::FullSimplex;
  const int limit = cfg.iteration_limit();

  SolveResult result;
  double current = checked(f.value(theta), "objective");
  result.trace.push_back({0, current, count_nonzero(theta), start_vertex, 0.0});

  std::vector<double> grad(k_count), target(k_count);
  int iterations = 0;
  while (iterations < limit) {
    f.gradient(theta, grad);
    for (double g : grad) checked(g, "gradient");
    const long vertex = oracle(grad, target);

    auto line = f.restrict_to(theta, target);
    const double step = line_search([&](double a) { return line->value(a); },
                                    [&](double a) { return line->derivative(a); }, cfg, upper_end);
    if (step <= 0.0) break;  // no ascent along the best direction: stationary

    std::vector<double> next = theta;
    convex_update(next, target, step);
    const double value = checked(f.value(next), "objective");
    // Exact arithmetic guarantees ascent; reject a step that rounding made worse.
    if (value < current) break;

    ++iterations;
    theta = std::move(next);
    const double previous = current;
    current = value;
    result.trace.push_back({iterations, current, count_nonzero(theta), vertex, step});
    if (converged(previous, current, cfg.rel_tol)) break;
  }

  auto& report = result.report;
  report.theta = TopicProportion::from_dense(theta);
  report.iterations = iterations;
  report.objective = current;
  report.nnz = report.theta.nnz();
  report.elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

void check_start(const Objective& f, const SolverConfig& cfg) {
  cfg.validate();
  if (f.num_topics() == 0) throw Error(ErrorKind::InvalidArgument, "objective has K = 0");
  if (f.domain() == Domain::InteriorOnly && cfg.start == StartPoint::BestVertex)
    throw Error(ErrorKind::InvalidConfig,
                "objective is undefined on the simplex boundary; use a barycenter start");
}

}  // namespace

double line_search(const std::function<double(double)>& g,
                   const std::function<double(double)>& derivative, const SolverConfig& cfg,
                   bool upper_end_allowed) {
  const double tol = cfg.line_search_tol;
  const int max_steps = cfg.line_search_max_steps;

  if (derivative) {
    if (checked(derivative(0.0), "line derivative") <= 0.0) return 0.0;
    if (upper_end_allowed && checked(derivative(1.0), "line derivative") >= 0.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int step = 0; step < max_steps && hi - lo > tol; ++step) {
      const double mid = 0.5 * (lo + hi);
      if (checked(derivative(mid), "line derivative") > 0.0) lo = mid;
      else hi = mid;
    }
    // g' > 0 at lo, so by concavity g(lo) >= g(0).
    return lo;
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double g1 = checked(g(x1), "line value"), g2 = checked(g(x2), "line value");
  for (int step = 0; step < max_steps && hi - lo > tol; ++step) {
    if (g1 < g2) {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + kInvPhi * (hi - lo);
      g2 = checked(g(x2), "line value");
    } else {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - kInvPhi * (hi - lo);
      g1 = checked(g(x1), "line value");
    }
  }
  double best = g1 >= g2 ? x1 : x2;
  double best_value = std::max(g1, g2);
  if (const double g0 = checked(g(0.0), "line value"); g0 >= best_value) {
    best = 0.0;
    best_value = g0;
  }
  if (upper_end_allowed && checked(g(1.0), "line value") > best_value) best = 1.0;
  return best;
}

SolveResult fw_solve(const Objective& f, const SolverConfig& cfg) {
  check_start(f, cfg);
  const std::size_t k_count = f.num_topics();

  std::vector<double> theta(k_count, 0.0);
  long start_vertex = -1;
  if (cfg.start == StartPoint::BestVertex) {
    const auto values = f.vertex_values();
    start_vertex = long(argmax_lowest(values));
    theta[std::size_t(start_vertex)] = 1.0;
  } else {
    std::fill(theta.begin(), theta.end(), 1.0 / double(k_count));
  }

  auto to_vertex = [](std::span<const double> grad, std::vector<double>& s) {
    const std::size_t best = argmax_lowest(grad);
    std::fill(s.begin(), s.end(), 0.0);
    s[best] = 1.0;
    return long(best);
  };
  return run_frank_wolfe(f, std::move(theta), start_vertex, to_vertex, cfg);
}

std::vector<double> capped_simplex_argmax(std::span<const double> c,
                                          std::span<const double> caps) {
  if (c.size() != caps.size())
    throw Error(ErrorKind::InvalidArgument, "cost and cap vectors differ in size");
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });
  std::vector<double> s(c.size(), 0.0);
  double remaining = 1.0;
  for (std::size_t k : order) {
    if (remaining <= 0.0) break;
    const double mass = std::min(caps[k], remaining);
    s[k] = mass;
    remaining -= mass;
  }
  return s;
}

SolveResult fw_solve_capped(const Objective& f, std::span<const double> caps,
                            const SolverConfig& cfg) {
  check_start(f, cfg);
  const std::size_t k_count = f.num_topics();
  if (caps.size() != k_count)
    throw Error(ErrorKind::InvalidArgument, "caps must have one entry per topic");
  for (double u : caps)
    if (!(u > 0.0 && u <= 1.0))
      throw Error(ErrorKind::InvalidArgument, "caps must lie in (0, 1]");
  const double cap_mass = std::accumulate(caps.begin(), caps.end(), 0.0);
  if (cap_mass < 1.0)
    throw Error(ErrorKind::InfeasibleRegion,
                "caps sum to " + std::to_string(cap_mass) + " < 1; region is empty");

  std::vector<double> theta(k_count, 0.0);
  long start_vertex = -1;
  if (cfg.start == StartPoint::BestVertex) {
    std::vector<double> unit(k_count, 0.0);
    double best_value = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      unit[k] = 1.0;
      auto candidate = capped_simplex_argmax(unit, caps);
      unit[k] = 0.0;
      const double value = checked(f.value(candidate), "objective");
      if (start_vertex < 0 || value > best_value) {
        best_value = value;
        start_vertex = long(k);
        theta = std::move(candidate);
      }
    }
  } else {
    for (std::size_t k = 0; k < k_count; ++k) theta[k] = caps[k] / cap_mass;
  }

  std::vector<double> cap_copy(caps.begin(), caps.end());
  auto greedy = [cap_copy](std::span<const double> grad, std::vector<double>& s) {
    s = capped_simplex_argmax(grad, cap_copy);
    return long(argmax_lowest(grad));
  };
  return run_frank_wolfe(f, std::move(theta), start_vertex, greedy, cfg);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const auto old_precision = out.precision(17);
  out << "iteration,objective,nnz,vertex,alpha\n";
  for (const auto& r : trace)
    out << r.iteration << ',' << r.objective << ',' << r.nnz << ',' << r.vertex << ','
        << r.alpha << '\n';
  out.precision(old_precision);
}

}  // namespace fwtm
