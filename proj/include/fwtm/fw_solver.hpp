#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fwtm/core_model.hpp"
#include "fwtm/objectives.hpp"

namespace fwtm {

struct TraceRecord {
  int iteration = 0;
  double objective = 0.0;
  std::size_t nnz = 0;
  long vertex = -1;  ///< index of the ascent vertex, -1 for an interior start
  double alpha = 0.0;
};

using Trace = std::vector<TraceRecord>;

struct SolveResult {
  InferenceReport report;
  Trace trace;
};

/// Maximizes a concave g on [0, 1].
///
/// With a derivative, bisects on its sign; without one, uses golden-section
/// search on g. When `upper_end_allowed` is false (interior-only objectives)
/// the point a = 1 is never evaluated. Throws NumericFailure on NaN.
double line_search(const std::function<double(double)>& g,
                   const std::function<double(double)>& derivative, const SolverConfig& cfg,
                   bool upper_end_allowed = true);

/// Frank-Wolfe ascent over the unit simplex.
///
/// Starting from the best vertex (or the barycenter), each iteration moves
/// toward the vertex with the largest partial derivative by an exact line
/// search. After l iterations from a vertex start the iterate has at most
/// l + 1 nonzeros. Ties go to the lowest index.
SolveResult fw_solve(const Objective& f, const SolverConfig& cfg);

/// Frank-Wolfe over {theta in simplex : theta_k <= caps_k}.
///
/// The linear subproblem is solved by greedy filling (capped_simplex_argmax).
/// A barycenter start uses caps / sum(caps); a vertex start picks the best
/// greedy point for the unit directions e_k. Throws InfeasibleRegion when
/// sum(caps) < 1.
SolveResult fw_solve_capped(const Objective& f, std::span<const double> caps,
                            const SolverConfig& cfg);

/// argmax c^T s over the capped simplex: visit coordinates by decreasing c
/// (ties to the lowest index) and give each min(cap, remaining mass).
std::vector<double> capped_simplex_argmax(std::span<const double> c,
                                          std::span<const double> caps);

/// CSV with header iteration,objective,nnz,vertex,alpha.
void write_trace_csv(std::ostream& out, const Trace& trace);

}  // namespace fwtm
