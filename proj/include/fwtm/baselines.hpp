#pragma once

#include <span>

#include "fwtm/core_model.hpp"

namespace fwtm {

/// Digamma function for x > 0 (recurrence up to x >= 10, then the
/// asymptotic series). Absolute error below 1e-12.
double digamma(double x);

/// PLSA folding-in: EM on theta with the topics held fixed, started from
/// the barycenter. Stops when the relative change of the log-likelihood
/// drops below cfg.rel_tol or after cfg.max_iters steps. The likelihood is
/// non-decreasing across steps.
InferenceReport folding_in(const Document& doc, const TopicMatrix& beta,
                           const SolverConfig& cfg);

/// Mean-field variational inference for LDA with fixed topics.
///
/// Starts from uniform responsibilities and alternates
///   phi_jk  ~ beta_kj exp(digamma(gamma_k)),
///   gamma_k = alpha_k + sum_j d_j phi_jk
/// until the mean relative change of gamma is below cfg.rel_tol. Returns
/// theta = gamma / sum(gamma), which is always dense. The reported
/// objective is the document log-likelihood at that theta.
InferenceReport vb_infer(const Document& doc, const TopicMatrix& beta,
                         std::span<const double> alpha, const SolverConfig& cfg);

}  // namespace fwtm
