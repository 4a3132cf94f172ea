#pragma once

#include "repute/kernel.hpp"
#include "repute/ratings.hpp"
#include "repute/trust.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <type_traits>
#include <utility>

namespace repute {

/// Called once per recorded iterate with the trace row, the reputation
/// vector, and the divergence vector at that iterate.
template <typename Scalar>
using IterationObserver = std::function<void(const IterationRecord<Scalar>&,
                                             const VectorX<Scalar>&,
                                             const VectorX<Scalar>&)>;

/// Infinity norm of the move produced by one full averaging pass
/// (reputation -> divergence -> trust -> reputation) started at r.
/// Zero exactly at fixed points of the iteration.
template <typename Scalar>
Scalar fixed_point_residual(const SparseRatings<Scalar>& ratings, const VectorX<Scalar>& r,
                            const TrustFunctionSpec<Scalar>& spec) {
  TrustState<Scalar> trust = trust_update(ratings, divergence(ratings, r), spec);
  zero_row_fixup(ratings, trust);
  const VectorX<Scalar> next = reputation_from_trust(ratings, trust);
  return (next - r).template lpNorm<Eigen::Infinity>();
}

/// Newton iteration on the stationarity condition of the trust-mass
/// objective, for uniform linear trust. Intended for r already close to the
/// fixed point. Each step solves the analytic Hessian system, clamps the
/// candidate to [0,1], and accepts it only if the objective does not
/// decrease; a singular system or a rejected step returns the best iterate
/// reached so far. The result never has a worse one-pass residual than r.
template <typename Scalar>
VectorX<Scalar> newton_refine(const SparseRatings<Scalar>& ratings, const VectorX<Scalar>& r0,
                              Scalar c0, Scalar tol) {
  const TrustFunctionSpec<Scalar> spec = TrustFunctionSpec<Scalar>::linear(c0);
  VectorX<Scalar> r = r0;
  Scalar best_residual = fixed_point_residual(ratings, r, spec);
  VectorX<Scalar> best = r;
  Scalar value = objective(ratings, r, c0);
  const int max_steps = 25;
  for (int step = 0; step < max_steps; ++step) {
    const VectorX<Scalar> g = objective_gradient(ratings, r, c0);
    if (g.template lpNorm<Eigen::Infinity>() == Scalar(0)) break;
    const MatrixX<Scalar> h = objective_hessian(ratings, r, c0);
    Eigen::LDLT<MatrixX<Scalar>> ldlt(h);
    if (ldlt.info() != Eigen::Success) break;
    const VectorX<Scalar> delta = ldlt.solve(-g);
    if (!delta.allFinite()) break;
    VectorX<Scalar> candidate =
        (r + delta).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
    const Scalar candidate_value = objective(ratings, candidate, c0);
    const Scalar slack = Scalar(1e-12) * std::max(Scalar(1), std::abs(value));
    if (candidate_value + slack < value) break;  // objective went down: reject
    const Scalar moved = (candidate - r).template lpNorm<Eigen::Infinity>();
    r = std::move(candidate);
    value = candidate_value;
    const Scalar residual = fixed_point_residual(ratings, r, spec);
    if (residual <= best_residual) {
      best_residual = residual;
      best = r;
    }
    if (moved < tol) break;
  }
  return best;
}

namespace detail {

template <typename Scalar>
bool step_converged(Scalar step_norm, Scalar tol) {
  return std::isfinite(static_cast<double>(step_norm)) && step_norm < tol;
}

}  // namespace detail

/// Run the filtering iteration from a given trust state. Each pass averages
/// with the current weights, measures how far the reputations moved, then
/// rebuilds trust from the new divergences (resetting any all-zero rows).
/// Stops on a step below tol (or after exactly config.steps passes in
/// fixed-step mode); optionally finishes with Newton steps once the step
/// norm is small. The reported trust state is recomputed at the returned
/// reputations.
template <typename Scalar>
ReputationReport<Scalar> solve_from(const SparseRatings<Scalar>& ratings,
                                    const TrustState<Scalar>& warm_trust,
                                    const SolveConfig<Scalar>& config,
                                    const std::type_identity_t<IterationObserver<Scalar>>& observer = {}) {
  if (ratings.n_entries() == 0)
    throw ValidationError("solve: ratings matrix has no entries");
  if (!(config.tol > Scalar(0)))
    throw ValidationError("solve: tolerance must be positive");
  if (config.max_iterations < 1)
    throw ValidationError("solve: max_iterations must be at least 1");
  if (config.stop == StopRule::kFixedSteps && config.steps < 1)
    throw ValidationError("solve: fixed-step mode needs at least one step");
  for (int j = 0; j < config.trust.per_item_c.size(); ++j)
    if (!(config.trust.per_item_c[j] >= Scalar(0)))
      throw ValidationError("solve: trust constants must be nonnegative");
  if (config.trust.uniform() && !(config.trust.c >= Scalar(0)))
    throw ValidationError("solve: trust constants must be nonnegative");

  const bool track_objective = config.trust.uniform();
  const Scalar c0 = config.trust.c;
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  const int iteration_cap =
      config.stop == StopRule::kFixedSteps ? config.steps : config.max_iterations;
  const bool use_newton = config.newton && config.stop == StopRule::kToConvergence &&
                          config.trust.uniform() && config.trust.kind == TrustKind::kLinear;

  ReputationReport<Scalar> report;
  TrustState<Scalar> trust = warm_trust;
  if (trust.weights.size() != ratings.n_entries())
    throw ValidationError("solve: warm trust not aligned with ratings entries");
  if (trust.divergence.size() != ratings.n_raters())
    trust.divergence = VectorX<Scalar>::Zero(ratings.n_raters());
  bool pending_zero_event = zero_row_fixup(ratings, trust) > 0;

  VectorX<Scalar> r, r_prev, d;
  bool newton_pending = false;
  for (int pass = 1; pass <= iteration_cap; ++pass) {
    reputation_from_trust(ratings, trust, r);
    const Scalar step = pass == 1 ? std::numeric_limits<Scalar>::infinity()
                                  : (r - r_prev).template lpNorm<Eigen::Infinity>();
    divergence(ratings, r, d);

    IterationRecord<Scalar> record;
    record.iteration = pass;
    record.step_norm = step;
    record.objective = track_objective ? objective_from_divergence(ratings, d, c0) : nan;
    record.phase = SolvePhase::kFixedPoint;
    record.zero_row_event = pending_zero_event;
    report.trace.push_back(record);
    if (observer) observer(record, r, d);

    report.iterations = pass;
    if (config.stop == StopRule::kToConvergence && detail::step_converged(step, config.tol)) {
      report.converged = true;
      break;
    }
    if (pass == iteration_cap) {
      report.converged = detail::step_converged(step, config.tol);
      break;
    }
    if (use_newton && detail::step_converged(step, config.newton_trigger)) {
      newton_pending = true;
      break;
    }

    trust_update(ratings, d, config.trust, trust);
    pending_zero_event = zero_row_fixup(ratings, trust) > 0;
    r_prev = r;
  }

  if (newton_pending) {
    // Newton phase on the objective's stationarity condition. A step that
    // gets rejected (singular system or objective decrease) ends the phase;
    // plain averaging passes then resume until the step criterion is met.
    const TrustFunctionSpec<Scalar>& spec = config.trust;
    bool fell_back = false;
    int newton_steps = 0;
    const int max_newton_steps = 25;
    while (!report.converged && newton_steps < max_newton_steps) {
      const VectorX<Scalar> g = objective_gradient(ratings, r, c0);
      const MatrixX<Scalar> h = objective_hessian(ratings, r, c0);
      Eigen::LDLT<MatrixX<Scalar>> ldlt(h);
      bool rejected = ldlt.info() != Eigen::Success;
      VectorX<Scalar> candidate;
      if (!rejected) {
        const VectorX<Scalar> delta = ldlt.solve(-g);
        rejected = !delta.allFinite();
        if (!rejected)
          candidate = (r + delta).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
      }
      if (!rejected) {
        const Scalar before = objective(ratings, r, c0);
        const Scalar after = objective(ratings, candidate, c0);
        rejected = after + Scalar(1e-12) * std::max(Scalar(1), std::abs(before)) < before;
      }
      if (!rejected) {
        // The phase must leave the one-pass residual no larger than it found
        // it; a step that worsens it counts as divergent.
        rejected = fixed_point_residual(ratings, candidate, spec) >
                   fixed_point_residual(ratings, r, spec);
      }
      if (rejected) {
        fell_back = true;
        break;
      }
      ++newton_steps;
      const Scalar step = (candidate - r).template lpNorm<Eigen::Infinity>();
      r_prev = r;
      r = std::move(candidate);
      divergence(ratings, r, d);

      IterationRecord<Scalar> record;
      record.iteration = ++report.iterations;
      record.step_norm = step;
      record.objective = objective_from_divergence(ratings, d, c0);
      record.phase = SolvePhase::kNewton;
      report.trace.push_back(record);
      if (observer) observer(record, r, d);

      if (detail::step_converged(step, config.tol)) report.converged = true;
    }
    if (!report.converged) fell_back = true;

    if (fell_back) {
      // Resume plain averaging from the current iterate.
      trust_update(ratings, d, spec, trust);
      pending_zero_event = zero_row_fixup(ratings, trust) > 0;
      r_prev = r;
      while (!report.converged && report.iterations < config.max_iterations) {
        reputation_from_trust(ratings, trust, r);
        const Scalar step = (r - r_prev).template lpNorm<Eigen::Infinity>();
        divergence(ratings, r, d);

        IterationRecord<Scalar> record;
        record.iteration = ++report.iterations;
        record.step_norm = step;
        record.objective = objective_from_divergence(ratings, d, c0);
        record.phase = SolvePhase::kFixedPointFallback;
        record.zero_row_event = pending_zero_event;
        report.trace.push_back(record);
        if (observer) observer(record, r, d);

        if (detail::step_converged(step, config.tol)) {
          report.converged = true;
          break;
        }
        trust_update(ratings, d, spec, trust);
        pending_zero_event = zero_row_fixup(ratings, trust) > 0;
        r_prev = r;
      }
    }
  }

  // Final state, all recomputed at the returned reputations.
  report.reputation = std::move(r);
  trust_update(ratings, d, config.trust, trust);
  zero_row_fixup(ratings, trust);
  report.final_trust = std::move(trust);
  report.trust_score = trust_vector(d);
  return report;
}

/// Run the filtering iteration from unit trust (the standard start, whose
/// first iterate is the plain per-item average).
template <typename Scalar>
ReputationReport<Scalar> solve(const SparseRatings<Scalar>& ratings,
                               const SolveConfig<Scalar>& config = {},
                               const std::type_identity_t<IterationObserver<Scalar>>& observer = {}) {
  return solve_from(ratings, init_trust(ratings), config, observer);
}

/// One epoch of a stream: the epoch's cumulative ratings, the trust state
/// carried from the previous epoch (already reconciled to this epoch's
/// pattern), and how many averaging passes to spend on it.
template <typename Scalar>
struct StreamEpoch {
  SparseRatings<Scalar> ratings;
  TrustState<Scalar> warm_trust;
  int steps = 3;
};

/// Carry trust forward onto a new ratings pattern: weights of surviving
/// (rater, item) entries are kept, new entries start at full weight, and
/// entries absent from the new pattern are dropped.
template <typename Scalar>
TrustState<Scalar> reconcile_trust(const SparseRatings<Scalar>& old_ratings,
                                   const TrustState<Scalar>& old_trust,
                                   const SparseRatings<Scalar>& new_ratings) {
  if (old_trust.weights.size() != old_ratings.n_entries())
    throw ValidationError("reconcile: trust not aligned with its ratings");
  TrustState<Scalar> out{VectorX<Scalar>::Ones(new_ratings.n_entries()),
                         VectorX<Scalar>::Zero(new_ratings.n_raters())};
  const int shared_raters = std::min(old_ratings.n_raters(), new_ratings.n_raters());
  for (int i = 0; i < shared_raters; ++i) {
    int old_e = old_ratings.row_begin(i);
    const int old_end = old_ratings.row_end(i);
    for (int e = new_ratings.row_begin(i); e < new_ratings.row_end(i); ++e) {
      const int j = new_ratings.entry_item(e);
      while (old_e < old_end && old_ratings.entry_item(old_e) < j) ++old_e;
      if (old_e < old_end && old_ratings.entry_item(old_e) == j)
        out.weights[e] = old_trust.weights[old_e];
    }
    if (i < old_trust.divergence.size()) out.divergence[i] = old_trust.divergence[i];
  }
  return out;
}

/// Apply exactly epoch.steps averaging passes from the epoch's warm trust.
/// converged reports whether the last step already met the tolerance.
template <typename Scalar>
ReputationReport<Scalar> stream_update(const StreamEpoch<Scalar>& epoch,
                                       const SolveConfig<Scalar>& config,
                                       const std::type_identity_t<IterationObserver<Scalar>>& observer = {}) {
  if (epoch.steps < 1)
    throw ValidationError("stream: epoch must apply at least one step");
  SolveConfig<Scalar> step_config = config;
  step_config.stop = StopRule::kFixedSteps;
  step_config.steps = epoch.steps;
  return solve_from(epoch.ratings, epoch.warm_trust, step_config, observer);
}

using StreamEpochd = StreamEpoch<double>;

}  // namespace repute
