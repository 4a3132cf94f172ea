#pragma once

#include "repute/attacks.hpp"
#include "repute/ratings.hpp"
#include "repute/trust.hpp"

#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace repute {

/// Format a real with 17 significant digits: enough to round-trip a double
/// exactly, and stable across reruns.
inline std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Quote a CSV field only when it needs it.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline const char* phase_name(SolvePhase phase) {
  switch (phase) {
    case SolvePhase::kFixedPoint: return "fixed_point";
    case SolvePhase::kNewton: return "newton";
    case SolvePhase::kFixedPointFallback: return "fixed_point_fallback";
  }
  return "unknown";
}

/// Per-item reputations, normalized and mapped back to the raw scale.
template <typename Scalar>
void write_reputations_csv(std::ostream& out, const ReputationReport<Scalar>& report,
                           const std::vector<std::string>& item_ids, const RatingScale& scale) {
  out << "item_id,reputation_normalized,reputation_raw_scale\n";
  for (int j = 0; j < report.reputation.size(); ++j) {
    const double r = static_cast<double>(report.reputation[j]);
    out << csv_field(item_ids[j]) << ',' << format_full(r) << ','
        << format_full(scale.denormalize(r)) << "\n";
  }
}

/// Per-rater trust scores and divergences.
template <typename Scalar>
void write_trust_csv(std::ostream& out, const ReputationReport<Scalar>& report,
                     const std::vector<std::string>& rater_ids) {
  out << "rater_id,t_i,d_i\n";
  for (int i = 0; i < report.trust_score.size(); ++i)
    out << csv_field(rater_ids[i]) << ','
        << format_full(static_cast<double>(report.trust_score[i])) << ','
        << format_full(static_cast<double>(report.final_trust.divergence[i])) << "\n";
}

/// Convergence trace; the phase column distinguishes plain averaging passes
/// from Newton steps and from averaging passes after a Newton fallback.
template <typename Scalar>
void write_trace_csv(std::ostream& out, const ReputationReport<Scalar>& report) {
  out << "iteration,step_norm,psi,phase\n";
  for (const IterationRecord<Scalar>& rec : report.trace)
    out << rec.iteration << ',' << format_full(static_cast<double>(rec.step_norm)) << ','
        << format_full(static_cast<double>(rec.objective)) << ',' << phase_name(rec.phase)
        << "\n";
}

/// Dense-index dictionary: one row per internal index.
inline void write_dictionary_csv(std::ostream& out, const std::vector<std::string>& ids) {
  out << "internal_index,original_id\n";
  for (std::size_t k = 0; k < ids.size(); ++k)
    out << k << ',' << csv_field(ids[k]) << "\n";
}

/// Attack shift metrics, one row per method. The ratio column relates each
/// method's shift to the plain average's (so the average row reads 1).
template <typename Scalar>
void write_perturbation_csv(std::ostream& out, const PerturbationMetrics<Scalar>& metrics) {
  out << "method,l1_normalized,l1_raw,ratio\n";
  const double average = static_cast<double>(metrics.average.normalized);
  out << "filtered," << format_full(static_cast<double>(metrics.filtered.normalized)) << ','
      << format_full(static_cast<double>(metrics.filtered.raw)) << ','
      << format_full(static_cast<double>(metrics.ratio)) << "\n";
  out << "average," << format_full(average) << ','
      << format_full(static_cast<double>(metrics.average.raw)) << ','
      << format_full(average > 0 ? 1.0 : std::numeric_limits<double>::quiet_NaN()) << "\n";
}

/// Trust-score histograms per snapshot and group, with the group moments
/// and the separation statistic repeated on each bin row.
template <typename Scalar>
void write_separation_csv(std::ostream& out, const TrustSeparation<Scalar>& separation) {
  out << "snapshot,group,bin_lo,bin_hi,density,mean,sd,separation\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SeparationSnapshot<Scalar>& snap : separation.snapshots) {
    const double sep = snap.separation ? static_cast<double>(*snap.separation) : nan;
    const auto rows = [&](const char* group, const GroupHistogram<Scalar>& h) {
      for (std::size_t b = 0; b < h.density.size(); ++b)
        out << snap.label << ',' << group << ','
            << format_full(static_cast<double>(snap.bin_lo[b])) << ','
            << format_full(static_cast<double>(snap.bin_hi[b])) << ','
            << format_full(static_cast<double>(h.density[b])) << ','
            << format_full(static_cast<double>(h.mean)) << ','
            << format_full(static_cast<double>(h.sd)) << ',' << format_full(sep) << "\n";
    };
    rows("honest", snap.honest);
    if (snap.attacker) rows("attacker", *snap.attacker);
  }
}

/// One row per streaming epoch.
struct StreamEpochRow {
  int epoch = 0;             // 1-based
  int n_entries = 0;         // entries in the epoch's cumulative matrix
  int steps_applied = 0;
  double step_norm_after = 0;  // last step norm of the epoch's passes
  double drift = 0;            // infinity-norm gap vs a full solve of the epoch
};

inline void write_stream_csv(std::ostream& out, const std::vector<StreamEpochRow>& rows) {
  out << "epoch,n_entries,steps_applied,step_norm_after,drift\n";
  for (const StreamEpochRow& row : rows)
    out << row.epoch << ',' << row.n_entries << ',' << row.steps_applied << ','
        << format_full(row.step_norm_after) << ',' << format_full(row.drift) << "\n";
}

}  // namespace repute
