#pragma once

#include "repute/engine.hpp"
#include "repute/kernel.hpp"
#include "repute/random.hpp"
#include "repute/ratings.hpp"
#include "repute/trust.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace repute {

enum class AttackKind {
  kRandomRater,  // rates its items with uniform random levels
  kSpammer,      // rates everything minimum except one preferred item at maximum
};

/// How each spammer's preferred item is chosen.
enum class PreferredRule {
  kUniformRandom,  // one uniform draw per spammer
  kFixedList,      // round-robin over a caller-supplied item list
};

/// A population of adversarial raters to inject into a base dataset.
struct AttackScenario {
  AttackKind kind = AttackKind::kRandomRater;
  int count = 1;
  // Items rated by each attacker: a fixed count, or (when absent) a draw
  // from the empirical distribution of the base raters' rated-item counts.
  std::optional<int> items_per_attacker;
  std::uint64_t seed = 0;
  PreferredRule preferred = PreferredRule::kUniformRandom;
  std::vector<int> preferred_items;  // used by kFixedList; dense item indices
};

inline void validate_scenario(const AttackScenario& scenario, int n_raters, int n_items) {
  if (scenario.count < 1)
    throw ValidationError("attack: attacker count must be at least 1");
  if (scenario.items_per_attacker) {
    if (*scenario.items_per_attacker < 1)
      throw ValidationError("attack: items per attacker must be at least 1");
    if (*scenario.items_per_attacker > n_items) {
      std::ostringstream msg;
      msg << "attack: items per attacker " << *scenario.items_per_attacker
          << " exceeds item count " << n_items;
      throw ValidationError(msg.str());
    }
  } else if (n_raters < 1) {
    throw ValidationError("attack: base has no raters to match item counts against");
  }
  if (scenario.kind == AttackKind::kSpammer && scenario.preferred == PreferredRule::kFixedList) {
    if (scenario.preferred_items.empty())
      throw ValidationError("attack: fixed preferred rule needs a nonempty item list");
    for (int j : scenario.preferred_items)
      if (j < 0 || j >= n_items)
        throw ValidationError("attack: preferred item index outside the item universe");
  }
}

/// Build the attacker population for a scenario. The result shares the base
/// item universe and places attackers at rater indices starting right after
/// the base raters (base rows are left empty). Deterministic given the seed.
template <typename Scalar>
SparseRatings<Scalar> generate_attackers(const SparseRatings<Scalar>& base,
                                         const AttackScenario& scenario) {
  validate_scenario(scenario, base.n_raters(), base.n_items());
  const int n_items = base.n_items();
  Rng rng(scenario.seed);
  std::vector<RatingTriple> triples;

  for (int a = 0; a < scenario.count; ++a) {
    const int rater = base.n_raters() + a;
    int k;
    if (scenario.items_per_attacker) {
      k = *scenario.items_per_attacker;
    } else {
      k = base.row_count(static_cast<int>(rng.below(base.n_raters())));
      if (k < 1) k = 1;
    }
    if (scenario.kind == AttackKind::kRandomRater) {
      for (int j : rng.sample_indices(n_items, k)) {
        // Uniform over the five discrete levels of the underlying scale.
        const double level = 0.25 * static_cast<double>(rng.below(5));
        triples.push_back({rater, j, base.scale().denormalize(level)});
      }
    } else {
      int preferred;
      if (scenario.preferred == PreferredRule::kFixedList)
        preferred = scenario.preferred_items[a % scenario.preferred_items.size()];
      else
        preferred = static_cast<int>(rng.below(n_items));
      triples.push_back({rater, preferred, base.scale().denormalize(1.0)});
      // Fill the rest of the item set from the remaining items, shifting
      // indices past the preferred one so it is never drawn twice.
      for (int pick : rng.sample_indices(n_items - 1, k - 1)) {
        const int j = pick < preferred ? pick : pick + 1;
        triples.push_back({rater, j, base.scale().denormalize(0.0)});
      }
    }
  }
  return SparseRatings<Scalar>::build(base.n_raters() + scenario.count, n_items, triples,
                                      base.scale());
}

enum class Group : std::uint8_t { kHonest, kAttacker };

template <typename Scalar>
struct MergeResult {
  SparseRatings<Scalar> ratings;
  std::vector<Group> labels;  // one per merged rater
};

/// Union of a base dataset and an attacker population on the same item
/// universe, with a per-rater honest/attacker partition. The two rater sets
/// must be disjoint (a rater with entries on both sides is an error).
template <typename Scalar>
MergeResult<Scalar> merge(const SparseRatings<Scalar>& base,
                          const SparseRatings<Scalar>& attackers) {
  if (attackers.n_items() != base.n_items())
    throw ValidationError("merge: attacker item universe differs from base");
  const int n_raters = std::max(base.n_raters(), attackers.n_raters());
  const int overlap = std::min(base.n_raters(), attackers.n_raters());
  for (int i = 0; i < overlap; ++i) {
    if (base.row_count(i) > 0 && attackers.row_count(i) > 0) {
      std::ostringstream msg;
      msg << "merge: rater index " << i << " has entries on both sides";
      throw ValidationError(msg.str());
    }
  }
  if (std::abs(base.scale().min_raw - attackers.scale().min_raw) > 1e-12 ||
      std::abs(base.scale().max_raw - attackers.scale().max_raw) > 1e-12)
    throw ValidationError("merge: rating scales differ");

  std::vector<RatingTriple> triples;
  triples.reserve(static_cast<std::size_t>(base.n_entries()) + attackers.n_entries());
  MergeResult<Scalar> out;
  out.labels.assign(n_raters, Group::kHonest);
  for (const SparseRatings<Scalar>* part : {&base, &attackers}) {
    const bool is_attacker = part == &attackers;
    for (int i = 0; i < part->n_raters(); ++i) {
      if (is_attacker && part->row_count(i) > 0) out.labels[i] = Group::kAttacker;
      for (int e = part->row_begin(i); e < part->row_end(i); ++e)
        triples.push_back(
            {i, part->entry_item(e),
             part->scale().denormalize(static_cast<double>(part->entry_value(e)))});
    }
  }
  out.ratings = SparseRatings<Scalar>::build(n_raters, base.n_items(), triples, base.scale());
  return out;
}

/// Plain per-item mean of the ratings: the baseline method the filtering
/// iteration is compared against (and its own first iterate).
template <typename Scalar>
VectorX<Scalar> average_baseline(const SparseRatings<Scalar>& ratings) {
  VectorX<Scalar> r(ratings.n_items());
  for (int j = 0; j < ratings.n_items(); ++j) {
    const int count = ratings.col_count(j);
    if (count == 0) {
      std::ostringstream msg;
      msg << "average: item " << j << " has no ratings";
      throw ZeroTrustMassError(j, msg.str());
    }
    Scalar sum = 0;
    for (int s = ratings.col_begin(j); s < ratings.col_end(j); ++s)
      sum += ratings.entry_value(ratings.slot_entry(s));
    r[j] = sum / Scalar(count);
  }
  return r;
}

/// 1-norm distance between two reputation vectors, on the normalized scale
/// and mapped back to the raw rating scale.
template <typename Scalar>
struct L1Difference {
  Scalar normalized = 0;
  Scalar raw = 0;
};

template <typename Scalar>
L1Difference<Scalar> l1_difference(const VectorX<Scalar>& before, const VectorX<Scalar>& after,
                                   const RatingScale& scale) {
  if (before.size() != after.size())
    throw ValidationError("perturbation: vector lengths differ");
  L1Difference<Scalar> out;
  out.normalized = (before - after).template lpNorm<1>();
  out.raw = out.normalized * Scalar(scale.max_raw - scale.min_raw);
  return out;
}

/// How far an attack moved each method's reputations: the 1-norm shift of
/// the filtered fixed point and of the plain average, and their ratio
/// (scale-invariant; below 1 means filtering absorbed more of the attack).
template <typename Scalar>
struct PerturbationMetrics {
  L1Difference<Scalar> filtered;
  L1Difference<Scalar> average;
  Scalar ratio = std::numeric_limits<Scalar>::quiet_NaN();  // filtered / average
};

template <typename Scalar>
PerturbationMetrics<Scalar> perturbation(const L1Difference<Scalar>& filtered,
                                         const L1Difference<Scalar>& average) {
  PerturbationMetrics<Scalar> out;
  out.filtered = filtered;
  out.average = average;
  if (average.normalized > Scalar(0)) out.ratio = filtered.normalized / average.normalized;
  return out;
}

/// Histogram and moments of the per-rater trust scores of one group at one
/// snapshot. Densities integrate to 1 over [0, t_max] (all bins share the
/// full range of t across both groups).
template <typename Scalar>
struct GroupHistogram {
  int count = 0;
  Scalar mean = 0;
  Scalar sd = 0;                  // sample standard deviation
  std::vector<Scalar> density;    // one value per bin
};

template <typename Scalar>
struct SeparationSnapshot {
  std::string label;   // "iter1", "iter2", "converged"
  int iteration = 0;   // trace iteration the snapshot was taken at
  Scalar t_max = 0;    // upper edge of the binned range
  std::vector<Scalar> bin_lo, bin_hi;
  GroupHistogram<Scalar> honest;
  std::optional<GroupHistogram<Scalar>> attacker;  // absent if no attackers
  // Standardized gap (honest mean - attacker mean) / pooled sd; absent
  // without attackers or when the pooled spread is zero.
  std::optional<Scalar> separation;
};

template <typename Scalar>
struct TrustSeparation {
  std::vector<SeparationSnapshot<Scalar>> snapshots;
  ReputationReport<Scalar> report;  // the solve the snapshots were taken from
};

namespace detail {

template <typename Scalar>
SeparationSnapshot<Scalar> make_snapshot(const std::string& label, int iteration,
                                         const VectorX<Scalar>& d,
                                         const std::vector<Group>& labels, int bins) {
  const VectorX<Scalar> t = trust_vector(d);
  SeparationSnapshot<Scalar> snap;
  snap.label = label;
  snap.iteration = iteration;
  snap.t_max = t.size() > 0 ? t.maxCoeff() : Scalar(0);
  const Scalar range = snap.t_max > Scalar(0) ? snap.t_max : Scalar(1);
  const Scalar width = range / Scalar(bins);
  snap.bin_lo.resize(bins);
  snap.bin_hi.resize(bins);
  for (int b = 0; b < bins; ++b) {
    snap.bin_lo[b] = width * Scalar(b);
    snap.bin_hi[b] = width * Scalar(b + 1);
  }

  const auto fill = [&](Group group) {
    GroupHistogram<Scalar> h;
    h.density.assign(bins, Scalar(0));
    Scalar sum = 0;
    for (int i = 0; i < t.size(); ++i) {
      if (labels[i] != group) continue;
      ++h.count;
      sum += t[i];
      int b = static_cast<int>(t[i] / width);
      if (b >= bins) b = bins - 1;
      if (b < 0) b = 0;
      h.density[b] += Scalar(1);
    }
    if (h.count == 0) return h;
    h.mean = sum / Scalar(h.count);
    Scalar sq = 0;
    for (int i = 0; i < t.size(); ++i) {
      if (labels[i] != group) continue;
      const Scalar gap = t[i] - h.mean;
      sq += gap * gap;
    }
    h.sd = h.count > 1 ? std::sqrt(sq / Scalar(h.count - 1)) : Scalar(0);
    for (Scalar& v : h.density) v /= Scalar(h.count) * width;
    return h;
  };

  snap.honest = fill(Group::kHonest);
  GroupHistogram<Scalar> attacker = fill(Group::kAttacker);
  if (attacker.count > 0) {
    snap.attacker = attacker;
    const int nh = snap.honest.count, na = attacker.count;
    if (nh + na > 2) {
      const Scalar pooled =
          std::sqrt((Scalar(nh - 1) * snap.honest.sd * snap.honest.sd +
                     Scalar(na - 1) * attacker.sd * attacker.sd) /
                    Scalar(nh + na - 2));
      if (pooled > Scalar(0))
        snap.separation = (snap.honest.mean - attacker.mean) / pooled;
    }
  }
  return snap;
}

}  // namespace detail

/// Solve on a labeled dataset while snapshotting the per-rater trust scores
/// after the first iterate, the second, and at the final one, each with
/// per-group histograms and the standardized group gap.
template <typename Scalar>
TrustSeparation<Scalar> trust_separation_trace(const SparseRatings<Scalar>& ratings,
                                               const std::vector<Group>& labels,
                                               const SolveConfig<Scalar>& config,
                                               int bins = 50) {
  if (static_cast<int>(labels.size()) != ratings.n_raters())
    throw ValidationError("separation: labels do not cover the rater set");
  if (bins < 1) throw ValidationError("separation: need at least one bin");

  TrustSeparation<Scalar> out;
  VectorX<Scalar> d_first, d_second;
  const IterationObserver<Scalar> observer =
      [&](const IterationRecord<Scalar>& record, const VectorX<Scalar>&,
          const VectorX<Scalar>& d) {
        if (record.iteration == 1) d_first = d;
        if (record.iteration == 2) d_second = d;
      };
  out.report = solve(ratings, config, observer);

  out.snapshots.push_back(detail::make_snapshot("iter1", 1, d_first, labels, bins));
  if (d_second.size() > 0)
    out.snapshots.push_back(detail::make_snapshot("iter2", 2, d_second, labels, bins));
  out.snapshots.push_back(detail::make_snapshot("converged", out.report.iterations,
                                                out.report.final_trust.divergence, labels,
                                                bins));
  return out;
}

/// Flat key=value serialization of a scenario, one key per line.
inline std::string serialize_scenario(const AttackScenario& scenario) {
  std::ostringstream out;
  out << "kind = "
      << (scenario.kind == AttackKind::kRandomRater ? "random_rater" : "spammer") << "\n";
  out << "count = " << scenario.count << "\n";
  out << "items_per_attacker = ";
  if (scenario.items_per_attacker)
    out << *scenario.items_per_attacker;
  else
    out << "match";
  out << "\n";
  out << "seed = " << scenario.seed << "\n";
  out << "preferred = ";
  if (scenario.preferred == PreferredRule::kUniformRandom) {
    out << "random";
  } else {
    for (std::size_t k = 0; k < scenario.preferred_items.size(); ++k)
      out << (k ? "," : "") << scenario.preferred_items[k];
  }
  out << "\n";
  return out.str();
}

/// Parse the key=value scenario format written by serialize_scenario.
/// Blank lines and lines starting with '#' are skipped.
inline AttackScenario parse_scenario(const std::string& text) {
  AttackScenario scenario;
  bool saw_kind = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  const auto trim = [](std::string s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return std::string();
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "scenario: line " << line_no << " is not a key = value pair";
      throw ValidationError(msg.str());
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "kind") {
        saw_kind = true;
        if (value == "random_rater")
          scenario.kind = AttackKind::kRandomRater;
        else if (value == "spammer")
          scenario.kind = AttackKind::kSpammer;
        else
          throw ValidationError("scenario: unknown kind '" + value + "'");
      } else if (key == "count") {
        scenario.count = std::stoi(value);
      } else if (key == "items_per_attacker") {
        if (value == "match")
          scenario.items_per_attacker.reset();
        else
          scenario.items_per_attacker = std::stoi(value);
      } else if (key == "seed") {
        scenario.seed = std::stoull(value);
      } else if (key == "preferred") {
        if (value == "random") {
          scenario.preferred = PreferredRule::kUniformRandom;
          scenario.preferred_items.clear();
        } else {
          scenario.preferred = PreferredRule::kFixedList;
          scenario.preferred_items.clear();
          std::istringstream items(value);
          std::string tok;
          while (std::getline(items, tok, ','))
            scenario.preferred_items.push_back(std::stoi(trim(tok)));
        }
      } else {
        throw ValidationError("scenario: unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      std::ostringstream msg;
      msg << "scenario: line " << line_no << ": cannot parse value '" << value << "' for "
          << key;
      throw ValidationError(msg.str());
    } catch (const std::out_of_range&) {
      std::ostringstream msg;
      msg << "scenario: line " << line_no << ": value '" << value << "' out of range for "
          << key;
      throw ValidationError(msg.str());
    }
  }
  if (!saw_kind) throw ValidationError("scenario: missing required key 'kind'");
  return scenario;
}

}  // namespace repute
