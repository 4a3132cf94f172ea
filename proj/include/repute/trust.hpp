#pragma once

#include "repute/ratings.hpp"

#include <vector>

namespace repute {

/// Shape of the map from a rater's divergence to the weight of their votes.
enum class TrustKind {
  kLinear,      // c_j - d_i        (error if any weight would go negative)
  kExponential, // exp(-c_j * d_i)
  kReciprocal,  // 1 / (c_j + d_i)  (error if c_j + d_i == 0)
};

/// Trust function: a kind plus its discrimination constant, either one value
/// for all items or one per item. Smaller constants penalize divergent
/// raters harder; for linear trust, a constant at least as large as the
/// worst divergence (1 covers all [0,1] data) keeps every weight
/// nonnegative — below that, weights can go negative at run time, which is
/// reported as an error rather than clamped.
template <typename Scalar>
struct TrustFunctionSpec {
  TrustKind kind = TrustKind::kLinear;
  Scalar c = Scalar(1);                 // used when per_item_c is empty
  VectorX<Scalar> per_item_c;           // size 0, or one entry per item

  bool uniform() const { return per_item_c.size() == 0; }
  Scalar c_for(int item) const { return uniform() ? c : per_item_c[item]; }

  static TrustFunctionSpec linear(Scalar c0) { return {TrustKind::kLinear, c0, {}}; }
  static TrustFunctionSpec exponential(Scalar c0) { return {TrustKind::kExponential, c0, {}}; }
  static TrustFunctionSpec reciprocal(Scalar c0) { return {TrustKind::kReciprocal, c0, {}}; }
};

/// Per-evaluation trust weights aligned with the entry order of the ratings
/// matrix they were computed for, plus the per-rater divergences they were
/// derived from (zero right after initialization).
template <typename Scalar>
struct TrustState {
  VectorX<Scalar> weights;     // one weight per stored rating
  VectorX<Scalar> divergence;  // one value per rater
};

/// Stopping rule for the solve loop.
enum class StopRule {
  kToConvergence,  // stop when successive reputations move less than tol
  kFixedSteps,     // run exactly `steps` reputation updates
};

template <typename Scalar>
struct SolveConfig {
  TrustFunctionSpec<Scalar> trust = TrustFunctionSpec<Scalar>::linear(Scalar(1));
  StopRule stop = StopRule::kToConvergence;
  Scalar tol = Scalar(1e-9);       // infinity-norm threshold on successive iterates
  int max_iterations = 200;
  int steps = 3;                   // used by kFixedSteps
  bool newton = false;             // switch to Newton steps near the fixed point
  Scalar newton_trigger = Scalar(1e-4);  // step norm below which Newton takes over
};

/// How one reputation iterate was produced.
enum class SolvePhase {
  kFixedPoint,          // one trust-weighted averaging pass
  kNewton,              // Newton step on the objective gradient
  kFixedPointFallback,  // averaging pass after a rejected Newton step
};

/// One row of the convergence trace.
template <typename Scalar>
struct IterationRecord {
  int iteration = 0;       // 1-based; iteration 1 is the plain average
  Scalar step_norm = 0;    // infinity norm against the previous iterate (inf at 1)
  Scalar objective = 0;    // trust-mass objective at this iterate; NaN if per-item c
  SolvePhase phase = SolvePhase::kFixedPoint;
  bool zero_row_event = false;  // a fully zero trust row was reset while producing this iterate
};

/// Result of a solve: the reputation fixed point plus the per-rater summary
/// recomputed at it, and the full convergence trace.
template <typename Scalar>
struct ReputationReport {
  VectorX<Scalar> reputation;        // per item, on [0, 1]
  VectorX<Scalar> trust_score;       // per rater: max divergence minus own divergence
  TrustState<Scalar> final_trust;    // weights and divergences at the fixed point
  bool converged = false;
  int iterations = 0;                // reputation updates performed
  std::vector<IterationRecord<Scalar>> trace;
};

using TrustFunctionSpecd = TrustFunctionSpec<double>;
using TrustStated = TrustState<double>;
using SolveConfigd = SolveConfig<double>;
using ReputationReportd = ReputationReport<double>;

}  // namespace repute
