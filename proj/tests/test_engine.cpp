// Solve-loop behavior: convergence semantics, trace contents, warm starts,
// Newton refinement, streaming updates, and the failure modes that surface
// through the engine. Numeric targets were computed with an independent
// high-precision implementation of the same update rule.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "repute/engine.hpp"
#include "support/synthetic.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace {

using repute::RatingTriple;
using repute::SolveConfig;
using repute::SparseRatingsd;
using repute::StopRule;
using repute::TrustFunctionSpec;
using repute::TrustKind;

// All raters judge a single item; values are already on [0, 1].
SparseRatingsd one_item(const std::vector<double>& values) {
  std::vector<RatingTriple> triples;
  int rater = 0;
  for (double v : values) triples.push_back({rater++, 0, v});
  return SparseRatingsd::build(static_cast<int>(values.size()), 1, triples, {0.0, 1.0});
}

SparseRatingsd from_triples(int n_raters, int n_items,
                            const std::vector<RatingTriple>& triples) {
  return SparseRatingsd::build(n_raters, n_items, triples, {0.0, 1.0});
}

// Two raters agree at 0.5 and 1.0 against one dissenter at 1.0: the running
// example used throughout the kernel tests.
SparseRatingsd three_rater_item() { return one_item({0.5, 0.5, 1.0}); }

SolveConfig<double> linear_config(double c0 = 1.0) {
  SolveConfig<double> config;
  config.trust = TrustFunctionSpec<double>::linear(c0);
  return config;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("solve on the three-rater item reaches the known fixed point") {
  const auto ratings = three_rater_item();
  const auto report = repute::solve(ratings, linear_config());

  CHECK(report.converged);
  CHECK(report.iterations > 2);
  CHECK(report.iterations < 60);
  CHECK(report.iterations == static_cast<int>(report.trace.size()));

  // Fixed point and its per-rater summary, frozen from an independent solve.
  CHECK(std::abs(report.reputation[0] - 0.65555391) < 1e-6);
  CHECK(std::abs(report.final_trust.divergence[0] - 0.02419702) < 1e-6);
  CHECK(std::abs(report.final_trust.divergence[1] - 0.02419702) < 1e-6);
  CHECK(std::abs(report.final_trust.divergence[2] - 0.11864311) < 1e-6);
  CHECK(std::abs(report.trust_score[0] - 0.09444609) < 1e-6);
  CHECK(std::abs(report.trust_score[1] - 0.09444609) < 1e-6);
  CHECK(report.trust_score[2] == 0.0);  // the dissenter sits at the divergence max

  // Linear weights at the fixed point are one minus the divergence.
  for (int e = 0; e < 3; ++e)
    CHECK(report.final_trust.weights[e] ==
          doctest::Approx(1.0 - report.final_trust.divergence[e]).epsilon(1e-12));

  // The final state is self-consistent: one more pass barely moves.
  CHECK(repute::fixed_point_residual(ratings, report.reputation,
                                     linear_config().trust) < 1e-8);
}

TEST_CASE("the first iterate is the plain average and the second is the frozen value") {
  // Exact arithmetic: r1 = 2/3, trust = [35/36, 35/36, 8/9], so
  // r2 = (67/36)/(102/36) = 67/102 and the step is 2/3 - 67/102 = 1/102.
  const auto ratings = three_rater_item();
  std::vector<Eigen::VectorXd> iterates;
  const auto report = repute::solve(
      ratings, linear_config(),
      [&](const repute::IterationRecord<double>&, const Eigen::VectorXd& r,
          const Eigen::VectorXd&) { iterates.push_back(r); });

  REQUIRE(iterates.size() == report.trace.size());
  CHECK(iterates[0][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(iterates[1][0] == doctest::Approx(67.0 / 102.0).epsilon(1e-14));

  CHECK(report.trace[0].step_norm == kInf);
  CHECK(report.trace[1].step_norm ==
        doctest::Approx(1.0 / 102.0).epsilon(1e-12));
}

TEST_CASE("trace objective rises strictly until the steps become tiny") {
  const auto report = repute::solve(three_rater_item(), linear_config());
  for (std::size_t k = 1; k < report.trace.size(); ++k) {
    const auto& prev = report.trace[k - 1];
    const auto& cur = report.trace[k];
    CHECK_FALSE(cur.zero_row_event);
    CHECK(cur.phase == repute::SolvePhase::kFixedPoint);
    if (cur.step_norm > 1e-7)
      CHECK(cur.objective > prev.objective);
    else
      CHECK(cur.objective >= prev.objective - 1e-12);
  }
}

TEST_CASE("step norms shrink monotonically after the opening pass") {
  const auto report = repute::solve(three_rater_item(), linear_config());
  for (std::size_t k = 2; k < report.trace.size(); ++k)
    CHECK(report.trace[k].step_norm < report.trace[k - 1].step_norm);
}

TEST_CASE("unanimous ratings converge on the second pass") {
  const auto report = repute::solve(one_item({0.5, 0.5, 0.5, 0.5}), linear_config());
  CHECK(report.converged);
  CHECK(report.iterations == 2);
  CHECK(report.reputation[0] == 0.5);
  CHECK(report.trace[1].step_norm == 0.0);
}

TEST_CASE("a two-item pattern that fixes itself after one update") {
  // Rater 0: item0=1. Rater 1: item0=1, item1=0. Rater 2: item1=1... use the
  // classic 2x2: both rate item0 alike, they disagree on item1, and the
  // divergences tie, so the reweighted average reproduces the plain one.
  const auto ratings = from_triples(2, 2,
                                    {{0, 0, 1.0}, {0, 1, 0.0}, {1, 0, 1.0}, {1, 1, 1.0}});
  const auto report = repute::solve(ratings, linear_config());
  CHECK(report.converged);
  CHECK(report.iterations == 2);
  CHECK(report.reputation[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(report.reputation[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(report.final_trust.divergence[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(report.final_trust.divergence[1] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(report.trust_score[0] == 0.0);
  CHECK(report.trust_score[1] == 0.0);
}

TEST_CASE("hitting the iteration cap reports non-convergence without throwing") {
  auto config = linear_config();
  config.max_iterations = 2;
  const auto report = repute::solve(three_rater_item(), config);
  CHECK_FALSE(report.converged);
  CHECK(report.iterations == 2);
  CHECK(report.trace.size() == 2);
  // The returned reputations are the second iterate, 67/102 exactly.
  CHECK(report.reputation[0] == doctest::Approx(67.0 / 102.0).epsilon(1e-14));
}

TEST_CASE("fixed-step mode runs exactly the requested number of passes") {
  auto config = linear_config();
  config.stop = StopRule::kFixedSteps;
  config.steps = 1;
  const auto report = repute::solve(three_rater_item(), config);
  CHECK(report.iterations == 1);
  CHECK_FALSE(report.converged);  // the only step norm is the opening infinity
  CHECK(report.reputation[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  config.steps = 4;
  const auto longer = repute::solve(three_rater_item(), config);
  CHECK(longer.iterations == 4);
  CHECK(longer.trace.size() == 4);
}

TEST_CASE("fixed-step mode still reports convergence when the last step is tiny") {
  auto config = linear_config();
  config.stop = StopRule::kFixedSteps;
  config.steps = 3;
  const auto report = repute::solve(one_item({0.25, 0.25}), config);
  CHECK(report.iterations == 3);
  CHECK(report.converged);  // unanimous raters: every step after the first is zero
}

TEST_CASE("solve equals solve_from with unit trust") {
  const auto ratings = three_rater_item();
  const auto direct = repute::solve(ratings, linear_config());
  const auto explicit_start =
      repute::solve_from(ratings, repute::init_trust(ratings), linear_config());
  CHECK(direct.reputation == explicit_start.reputation);
  CHECK(direct.iterations == explicit_start.iterations);
}

TEST_CASE("warm starts from random positive weights land on the same fixed point") {
  const auto ratings = three_rater_item();
  const auto reference = repute::solve(ratings, linear_config());
  repute::Rng rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    repute::TrustState<double> warm{Eigen::VectorXd(ratings.n_entries()),
                                    Eigen::VectorXd::Zero(ratings.n_raters())};
    for (int e = 0; e < ratings.n_entries(); ++e)
      warm.weights[e] = 1.0 - rng.uniform();  // uniform on (0, 1]
    const auto report = repute::solve_from(ratings, warm, linear_config());
    CHECK(report.converged);
    CHECK(std::abs(report.reputation[0] - reference.reputation[0]) < 10 * 1e-9);
  }
}

TEST_CASE("warm starts agree on random multi-item instances too") {
  repute::Rng instance_rng(515151);
  for (int round = 0; round < 5; ++round) {
    const auto ratings = testsupport::random_instance(instance_rng, 12, 6);
    const auto reference = repute::solve(ratings, linear_config());
    if (!reference.converged) continue;  // property only speaks to converged runs
    repute::Rng rng(900 + round);
    for (int trial = 0; trial < 4; ++trial) {
      repute::TrustState<double> warm{Eigen::VectorXd(ratings.n_entries()),
                                      Eigen::VectorXd::Zero(ratings.n_raters())};
      for (int e = 0; e < ratings.n_entries(); ++e) warm.weights[e] = 1.0 - rng.uniform();
      const auto report = repute::solve_from(ratings, warm, linear_config());
      CHECK(report.converged);
      CHECK((report.reputation - reference.reputation).lpNorm<Eigen::Infinity>() <
            10 * 1e-9);
    }
  }
}

TEST_CASE("converged solves match a grid search of the objective on small instances") {
  repute::Rng rng(606060);
  int checked = 0;
  for (int round = 0; round < 12 && checked < 6; ++round) {
    const auto ratings = testsupport::random_instance(rng, 10, 2);
    const auto report = repute::solve(ratings, linear_config());
    if (!report.converged) continue;
    const auto grid = testsupport::grid_maximize_objective(ratings, 1.0);
    const double gap = (report.reputation - grid).lpNorm<Eigen::Infinity>();
    CHECK(gap <= 1e-4);
    ++checked;
  }
  CHECK(checked >= 6);
}

TEST_CASE("reciprocal trust without an offset depends on the starting weights") {
  // Two camps rate the same item. With no offset the 1/d weights are
  // unbounded, so a camp-biased start is drawn into its camp and the run ends
  // one of two ways: the steps die out on an interior value, or the iterate
  // lands exactly on one rater's rating and the next weight update divides by
  // zero. Either way the terminal value sits inside the favored camp, so the
  // two starts end far apart: the answer genuinely depends on the start.
  const std::vector<double> values{0.8, 0.9, 0.1, 0.2};
  const auto ratings = one_item(values);
  SolveConfig<double> config;
  config.trust = TrustFunctionSpec<double>::reciprocal(0.0);
  config.tol = 1e-12;

  auto terminal = [&](double hi, double lo) {
    repute::TrustState<double> warm{Eigen::VectorXd(4), Eigen::VectorXd::Zero(4)};
    warm.weights << hi, hi, lo, lo;
    try {
      const auto report = repute::solve_from(ratings, warm, config);
      CHECK(report.converged);
      return report.reputation[0];
    } catch (const repute::TrustDivisionError& collapse) {
      REQUIRE(collapse.rater >= 0);
      REQUIRE(collapse.rater < 4);
      return values[static_cast<std::size_t>(collapse.rater)];
    }
  };
  const double upper = terminal(1.0, 0.01);
  const double lower = terminal(0.01, 1.0);

  CHECK(upper > 0.7);
  CHECK(lower < 0.3);
  CHECK(upper - lower > 0.4);
}

TEST_CASE("newton_refine polishes a nearby start onto the stationary point") {
  const auto ratings = three_rater_item();
  const auto reference = repute::solve(ratings, linear_config());
  Eigen::VectorXd start(1);
  start[0] = reference.reputation[0] + 0.009;

  const auto refined = repute::newton_refine(ratings, start, 1.0, 1e-14);
  CHECK(std::abs(refined[0] - reference.reputation[0]) < 1e-8);
  CHECK(std::abs(repute::objective_gradient(ratings, refined, 1.0)[0]) < 1e-10);
  CHECK(repute::fixed_point_residual(ratings, refined, linear_config().trust) <=
        repute::fixed_point_residual(ratings, start, linear_config().trust));
}

TEST_CASE("newton_refine never worsens an already-converged point") {
  const auto ratings = three_rater_item();
  const auto reference = repute::solve(ratings, linear_config());
  const auto refined = repute::newton_refine(ratings, reference.reputation, 1.0, 1e-14);
  CHECK(std::abs(refined[0] - reference.reputation[0]) < 1e-9);
}

TEST_CASE("newton_refine rejects a wild step and returns the best iterate seen") {
  // Far from the optimum the quadratic model points off a cliff: the step
  // clamps to the boundary, the objective drops, and the start wins.
  const auto ratings = one_item({0.1, 0.1, 0.9, 0.88});
  Eigen::VectorXd start(1);
  start[0] = 0.9;
  const auto refined = repute::newton_refine(ratings, start, 1.0, 1e-12);
  CHECK(refined[0] == 0.9);
}

TEST_CASE("solve with newton enabled converges through a newton phase") {
  const auto ratings = three_rater_item();
  auto config = linear_config();
  config.newton = true;
  config.newton_trigger = 1e-2;  // hand over as soon as the decay regime starts
  config.tol = 1e-12;
  const auto report = repute::solve(ratings, config);

  CHECK(report.converged);
  int newton_records = 0;
  for (const auto& rec : report.trace)
    if (rec.phase == repute::SolvePhase::kNewton) ++newton_records;
  CHECK(newton_records >= 1);
  // Hand-off happens right after the trigger fires.
  CHECK(report.trace[2].phase == repute::SolvePhase::kNewton);

  auto plain = linear_config();
  plain.tol = 1e-12;
  const auto reference = repute::solve(ratings, plain);
  CHECK(std::abs(report.reputation[0] - reference.reputation[0]) < 1e-9);

  // The newton phase keeps the objective from falling.
  for (std::size_t k = 1; k < report.trace.size(); ++k)
    if (report.trace[k].phase == repute::SolvePhase::kNewton)
      CHECK(report.trace[k].objective >= report.trace[k - 1].objective - 1e-10);
}

TEST_CASE("newton stays out of fixed-step runs and non-linear trust") {
  auto config = linear_config();
  config.newton = true;
  config.newton_trigger = 1e-2;
  config.stop = StopRule::kFixedSteps;
  config.steps = 6;
  const auto fixed = repute::solve(three_rater_item(), config);
  for (const auto& rec : fixed.trace) CHECK(rec.phase == repute::SolvePhase::kFixedPoint);

  SolveConfig<double> expo;
  expo.trust = TrustFunctionSpec<double>::exponential(1.0);
  expo.newton = true;
  expo.newton_trigger = 1e-2;
  const auto soft = repute::solve(three_rater_item(), expo);
  for (const auto& rec : soft.trace) CHECK(rec.phase == repute::SolvePhase::kFixedPoint);
}

TEST_CASE("per-item constants disable the objective column but not the solve") {
  const auto ratings = from_triples(3, 2,
                                    {{0, 0, 0.2}, {0, 1, 0.6}, {1, 0, 0.4},
                                     {1, 1, 0.6}, {2, 0, 0.3}, {2, 1, 0.9}});
  SolveConfig<double> per_item;
  per_item.trust.kind = TrustKind::kLinear;
  per_item.trust.per_item_c = Eigen::VectorXd::Ones(2);
  const auto report = repute::solve(ratings, per_item);
  CHECK(report.converged);
  for (const auto& rec : report.trace) CHECK(std::isnan(rec.objective));

  // Constant-one per-item weights are the same arithmetic as the uniform
  // default, entry for entry.
  const auto uniform = repute::solve(ratings, linear_config());
  CHECK(report.reputation == uniform.reputation);
  CHECK(report.iterations == uniform.iterations);
}

TEST_CASE("an exact zero trust row is reset and flagged in the trace") {
  // Raters 0 and 1 split hard on item 0, agree with everyone on item 1. At
  // the plain average both sit exactly at the cutoff divergence, their rows
  // zero out, the reset restores full weight, and the average reappears.
  const auto ratings = from_triples(4, 2,
                                    {{0, 0, 1.0}, {0, 1, 0.5}, {1, 0, 0.0}, {1, 1, 0.5},
                                     {2, 0, 0.5}, {2, 1, 0.5}, {3, 0, 0.5}, {3, 1, 0.5}});
  const double r0 = (1.0 + 0.0 + 0.5 + 0.5) / 4.0;
  const double cutoff =
      ((1.0 - r0) * (1.0 - r0) + (0.5 - 0.5) * (0.5 - 0.5)) / 2.0;  // rater 0's divergence
  const auto config = linear_config(cutoff);
  const auto report = repute::solve(ratings, config);

  CHECK(report.converged);
  CHECK(report.iterations == 2);
  REQUIRE(report.trace.size() == 2);
  CHECK_FALSE(report.trace[0].zero_row_event);
  CHECK(report.trace[1].zero_row_event);
  CHECK(report.trace[1].step_norm == 0.0);
  CHECK(report.reputation[0] == r0);
  CHECK(report.reputation[1] == 0.5);
  // The final trust state went through the same reset.
  CHECK(report.final_trust.weights[0] == 1.0);
  CHECK(report.final_trust.weights[2] == 1.0);
}

TEST_CASE("a warm start of all-zero weights is repaired before the first pass") {
  const auto ratings = three_rater_item();
  repute::TrustState<double> warm{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  const auto report = repute::solve_from(ratings, warm, linear_config());
  CHECK(report.trace[0].zero_row_event);
  CHECK(report.converged);
  CHECK(std::abs(report.reputation[0] - 0.65555391) < 1e-6);
}

TEST_CASE("a sharp dissenter under a small offset raises the negative-trust error") {
  const auto ratings = one_item({0.0, 1.0, 1.0, 1.0});
  try {
    repute::solve(ratings, linear_config(0.5));
    FAIL("expected a negative trust weight");
  } catch (const repute::NegativeTrustError& e) {
    CHECK(e.rater == 0);
    CHECK(e.item == 0);
  }
}

TEST_CASE("a zero per-item constant can drain a column and raises the mass error") {
  // Both raters of item 0 also rate item 1, so the zero-weight entries never
  // form a fully zero row; the column itself runs out of mass instead.
  const auto ratings = from_triples(2, 2,
                                    {{0, 0, 0.5}, {0, 1, 0.7}, {1, 0, 0.5}, {1, 1, 0.7}});
  SolveConfig<double> config;
  config.trust.kind = TrustKind::kLinear;
  config.trust.per_item_c = Eigen::VectorXd(2);
  config.trust.per_item_c << 0.0, 1.0;
  try {
    repute::solve(ratings, config);
    FAIL("expected the trust mass of item 0 to vanish");
  } catch (const repute::ZeroTrustMassError& e) {
    CHECK(e.item == 0);
  }

  // A single fixed-step pass stops before the drained column is averaged.
  config.stop = StopRule::kFixedSteps;
  config.steps = 1;
  const auto report = repute::solve(ratings, config);
  CHECK(report.reputation[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(report.final_trust.weights[0] == 0.0);
  CHECK(report.final_trust.weights[2] == 0.0);
}

TEST_CASE("solve validates its inputs") {
  const auto ratings = three_rater_item();
  const auto empty = SparseRatingsd::build(2, 1, {}, {0.0, 1.0});
  CHECK_THROWS_AS(repute::solve(empty, linear_config()), repute::ValidationError);

  auto bad_tol = linear_config();
  bad_tol.tol = 0.0;
  CHECK_THROWS_AS(repute::solve(ratings, bad_tol), repute::ValidationError);

  auto bad_cap = linear_config();
  bad_cap.max_iterations = 0;
  CHECK_THROWS_AS(repute::solve(ratings, bad_cap), repute::ValidationError);

  auto bad_steps = linear_config();
  bad_steps.stop = StopRule::kFixedSteps;
  bad_steps.steps = 0;
  CHECK_THROWS_AS(repute::solve(ratings, bad_steps), repute::ValidationError);

  auto bad_c = linear_config(-0.25);
  CHECK_THROWS_AS(repute::solve(ratings, bad_c), repute::ValidationError);

  SolveConfig<double> bad_per_item;
  bad_per_item.trust.per_item_c = Eigen::VectorXd::Constant(1, -1.0);
  CHECK_THROWS_AS(repute::solve(ratings, bad_per_item), repute::ValidationError);

  repute::TrustState<double> misaligned{Eigen::VectorXd::Ones(2),
                                        Eigen::VectorXd::Zero(3)};
  CHECK_THROWS_AS(repute::solve_from(ratings, misaligned, linear_config()),
                  repute::ValidationError);
}

TEST_CASE("fixed_point_residual measures one full pass") {
  const auto ratings = three_rater_item();
  Eigen::VectorXd average(1);
  average[0] = 2.0 / 3.0;
  const double moved =
      repute::fixed_point_residual(ratings, average, linear_config().trust);
  CHECK(moved == doctest::Approx(1.0 / 102.0).epsilon(1e-12));
}

TEST_CASE("the observer sees every recorded iterate in order") {
  int calls = 0;
  std::vector<int> seen;
  const auto report = repute::solve(
      three_rater_item(), linear_config(),
      [&](const repute::IterationRecord<double>& rec, const Eigen::VectorXd& r,
          const Eigen::VectorXd& d) {
        ++calls;
        seen.push_back(rec.iteration);
        CHECK(r.size() == 1);
        CHECK(d.size() == 3);
      });
  CHECK(calls == static_cast<int>(report.trace.size()));
  for (std::size_t k = 0; k < seen.size(); ++k)
    CHECK(seen[k] == report.trace[k].iteration);
}

TEST_CASE("reconcile_trust keeps survivors, seeds newcomers, drops the departed") {
  // Old pattern: rater 0 on items 0 and 1, rater 1 on item 0.
  const auto old_ratings = from_triples(2, 2,
                                        {{0, 0, 0.5}, {0, 1, 0.5}, {1, 0, 0.5}});
  repute::TrustState<double> old_trust{Eigen::VectorXd(3), Eigen::VectorXd(2)};
  old_trust.weights << 0.3, 0.7, 0.9;
  old_trust.divergence << 0.11, 0.22;

  // New pattern: rater 0 on items 0 and 2 (item 1 dropped), rater 1 on items
  // 0 and 1, brand-new rater 2 on item 1.
  const auto new_ratings = from_triples(3, 3,
                                        {{0, 0, 0.5}, {0, 2, 0.5}, {1, 0, 0.5},
                                         {1, 1, 0.5}, {2, 1, 0.5}});
  const auto carried = repute::reconcile_trust(old_ratings, old_trust, new_ratings);

  REQUIRE(carried.weights.size() == 5);
  CHECK(carried.weights[0] == 0.3);  // rater 0, item 0 survived
  CHECK(carried.weights[1] == 1.0);  // rater 0, item 2 is new
  CHECK(carried.weights[2] == 0.9);  // rater 1, item 0 survived
  CHECK(carried.weights[3] == 1.0);  // rater 1, item 1 is new
  CHECK(carried.weights[4] == 1.0);  // rater 2 is new
  CHECK(carried.divergence[0] == 0.11);
  CHECK(carried.divergence[1] == 0.22);
  CHECK(carried.divergence[2] == 0.0);

  repute::TrustState<double> misaligned{Eigen::VectorXd::Ones(2), Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(repute::reconcile_trust(old_ratings, misaligned, new_ratings),
                  repute::ValidationError);
}

TEST_CASE("stream_update with one step from unit trust is the plain average") {
  repute::StreamEpochd epoch;
  epoch.ratings = three_rater_item();
  epoch.warm_trust = repute::init_trust(epoch.ratings);
  epoch.steps = 1;
  const auto report = repute::stream_update(epoch, linear_config());
  CHECK(report.iterations == 1);
  CHECK_FALSE(report.converged);
  CHECK(report.reputation[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  epoch.steps = 0;
  CHECK_THROWS_AS(repute::stream_update(epoch, linear_config()), repute::ValidationError);
}

TEST_CASE("stream_update resumed from a converged state stays put") {
  const auto ratings = three_rater_item();
  const auto settled = repute::solve(ratings, linear_config());

  repute::StreamEpochd epoch;
  epoch.ratings = ratings;
  epoch.warm_trust = settled.final_trust;
  epoch.steps = 3;
  const auto report = repute::stream_update(epoch, linear_config());
  CHECK(report.converged);
  CHECK(std::abs(report.reputation[0] - settled.reputation[0]) < 1e-8);
}

TEST_CASE("a streamed epoch with carried trust tracks the full solve") {
  // Epoch 1: the familiar three raters. Epoch 2 adds a fourth rater and a
  // second item. A few warm steps should land close to a cold full solve.
  const auto first = three_rater_item();
  const auto settled = repute::solve(first, linear_config());

  const auto second = from_triples(4, 2,
                                   {{0, 0, 0.5}, {0, 1, 0.8}, {1, 0, 0.5}, {2, 0, 1.0},
                                    {3, 1, 0.8}});
  repute::StreamEpochd epoch;
  epoch.ratings = second;
  epoch.warm_trust = repute::reconcile_trust(first, settled.final_trust, second);
  epoch.steps = 8;
  const auto warm = repute::stream_update(epoch, linear_config());
  const auto cold = repute::solve(second, linear_config());
  CHECK(cold.converged);
  CHECK((warm.reputation - cold.reputation).lpNorm<Eigen::Infinity>() < 1e-4);
}
