#pragma once

#include <span>
#include <vector>

#include "bolab/acquisition.hpp"
#include "bolab/qn_minimizer.hpp"
#include "bolab/rng.hpp"

namespace bolab::local {

inline constexpr int kInformedCandidates = 20;

/// Softmax weights exp(s_i) / sum_j exp(s_j), computed with the max shift.
std::vector<double> softmax_weights(std::span<const double> scores);

/// Index drawn with the given (normalized) probabilities.
std::size_t sample_index(std::span<const double> weights, Rng& rng);

/// Standardized negated scores (mean - v_i) / std over `values`, using the
/// sample standard deviation. Empty when the spread is below 1e-12, which
/// callers treat as a uniform draw.
std::vector<double> standardized_scores(std::span<const double> lcb_values);

/// Evaluates the LCB on the first 20 Sobol points and draws one with
/// probability proportional to exp(standardized negated LCB).
Vec informed_initial_point(const acq::AcquisitionContext& ctx, Rng& rng);

/// Informed local solve: one quasi-Newton run from an informed start.
LocalSolveResult ils_minimize(const acq::AcquisitionContext& ctx, Rng& rng,
                              const QnOptions& options = {});

/// Best of `restarts` independent ILS solves sharing one stream; ties keep the
/// earliest restart.
LocalSolveResult ims_minimize(const acq::AcquisitionContext& ctx, Rng& rng, int restarts = 5,
                              const QnOptions& options = {});

}  // namespace bolab::local
