#pragma once

#include "repute/ratings.hpp"
#include "repute/trust.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <sstream>

namespace repute {

/// Linear trust would assign a negative weight: the discrimination constant
/// is too small for how far this rater sits from the consensus.
class NegativeTrustError : public Error {
 public:
  NegativeTrustError(int rater, int item, const std::string& what)
      : Error(what), rater(rater), item(item) {}
  int rater;
  int item;
};

/// Reciprocal trust hit a zero denominator (c == 0 together with zero divergence).
class TrustDivisionError : public Error {
 public:
  TrustDivisionError(int rater, int item, const std::string& what)
      : Error(what), rater(rater), item(item) {}
  int rater;
  int item;
};

/// An item whose ratings all carry zero weight: its reputation is undefined.
class ZeroTrustMassError : public Error {
 public:
  ZeroTrustMassError(int item, const std::string& what) : Error(what), item(item) {}
  int item;
};

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Unit starting trust: every evaluation counts fully, so the first
/// reputation update is the plain per-item average. Divergences start at
/// zero and are recomputed before first use.
template <typename Scalar>
TrustState<Scalar> init_trust(const SparseRatings<Scalar>& ratings) {
  return {VectorX<Scalar>::Ones(ratings.n_entries()),
          VectorX<Scalar>::Zero(ratings.n_raters())};
}

/// Reputation of each item: average of its ratings weighted by trust,
/// r_j = sum_i T_ij E_ij / sum_i T_ij, written into r (resized as needed).
/// Throws ZeroTrustMassError if some item's weights sum to zero (or the item
/// has no ratings at all); r is unspecified after a throw.
template <typename Scalar>
void reputation_from_trust(const SparseRatings<Scalar>& ratings,
                           const TrustState<Scalar>& trust, VectorX<Scalar>& r) {
  if (trust.weights.size() != ratings.n_entries())
    throw ValidationError("reputation: trust weights not aligned with ratings entries");
  const int n_items = ratings.n_items();
  const int nnz = ratings.n_entries();
  // One sequential sweep over the entries, scattering into per-item
  // accumulators. Within an item this adds raters in the same ascending
  // order as a per-item traversal, so the sums match that form bitwise.
  VectorX<Scalar> mass = VectorX<Scalar>::Zero(n_items);
  r.setZero(n_items);
  for (int e = 0; e < nnz; ++e) {
    const int j = ratings.entry_item(e);
    const Scalar w = trust.weights[e];
    mass[j] += w;
    r[j] += w * ratings.entry_value(e);
  }
  for (int j = 0; j < n_items; ++j) {
    if (!(mass[j] > Scalar(0))) {
      std::ostringstream msg;
      msg << "reputation: item " << j << " has zero total trust mass";
      throw ZeroTrustMassError(j, msg.str());
    }
    r[j] /= mass[j];
  }
}

template <typename Scalar>
VectorX<Scalar> reputation_from_trust(const SparseRatings<Scalar>& ratings,
                                      const TrustState<Scalar>& trust) {
  VectorX<Scalar> r;
  reputation_from_trust(ratings, trust, r);
  return r;
}

/// Divergence of each rater from the given reputations: mean squared
/// distance over the items they rated, d_i = (1/m_i) sum_j (E_ij - r_j)^2,
/// written into d (resized as needed). A rater with no ratings gets
/// divergence zero.
template <typename Scalar>
void divergence(const SparseRatings<Scalar>& ratings, const VectorX<Scalar>& r,
                VectorX<Scalar>& d) {
  if (r.size() != ratings.n_items())
    throw ValidationError("divergence: reputation vector size does not match item count");
  d.resize(ratings.n_raters());
  for (int i = 0; i < ratings.n_raters(); ++i) {
    const int count = ratings.row_count(i);
    if (count == 0) {
      d[i] = Scalar(0);
      continue;
    }
    Scalar sum = 0;
    for (int e = ratings.row_begin(i); e < ratings.row_end(i); ++e) {
      const Scalar diff = ratings.entry_value(e) - r[ratings.entry_item(e)];
      sum += diff * diff;
    }
    d[i] = sum / Scalar(count);
  }
}

template <typename Scalar>
VectorX<Scalar> divergence(const SparseRatings<Scalar>& ratings, const VectorX<Scalar>& r) {
  VectorX<Scalar> d;
  divergence(ratings, r, d);
  return d;
}

/// New per-evaluation weights from rater divergences, written into out
/// (resized as needed; out is unspecified after a throw). Linear trust
/// throws NegativeTrustError if any weight would go below zero; reciprocal
/// trust throws TrustDivisionError on a zero denominator.
template <typename Scalar>
void trust_update(const SparseRatings<Scalar>& ratings, const VectorX<Scalar>& d,
                  const TrustFunctionSpec<Scalar>& spec, TrustState<Scalar>& out) {
  if (d.size() != ratings.n_raters())
    throw ValidationError("trust: divergence vector size does not match rater count");
  if (!spec.uniform() && spec.per_item_c.size() != ratings.n_items())
    throw ValidationError("trust: per-item constant vector size does not match item count");
  out.weights.resize(ratings.n_entries());
  for (int i = 0; i < ratings.n_raters(); ++i) {
    for (int e = ratings.row_begin(i); e < ratings.row_end(i); ++e) {
      const int j = ratings.entry_item(e);
      const Scalar c = spec.c_for(j);
      Scalar w;
      switch (spec.kind) {
        case TrustKind::kLinear:
          w = c - d[i];
          if (w < Scalar(0)) {
            std::ostringstream msg;
            msg << "trust: negative weight for (rater " << i << ", item " << j
                << "): constant " << static_cast<double>(c) << " below divergence "
                << static_cast<double>(d[i]);
            throw NegativeTrustError(i, j, msg.str());
          }
          break;
        case TrustKind::kExponential:
          w = std::exp(-c * d[i]);
          break;
        case TrustKind::kReciprocal: {
          const Scalar denom = c + d[i];
          if (denom == Scalar(0)) {
            std::ostringstream msg;
            msg << "trust: zero denominator for (rater " << i << ", item " << j
                << "): constant and divergence both zero";
            throw TrustDivisionError(i, j, msg.str());
          }
          w = Scalar(1) / denom;
          break;
        }
      }
      out.weights[e] = w;
    }
  }
  out.divergence = d;
}

template <typename Scalar>
TrustState<Scalar> trust_update(const SparseRatings<Scalar>& ratings,
                                const VectorX<Scalar>& d,
                                const TrustFunctionSpec<Scalar>& spec) {
  TrustState<Scalar> out;
  trust_update(ratings, d, spec, out);
  return out;
}

/// Restore raters whose weights are exactly zero on every item they rated:
/// such a row contributes nothing anywhere, so it is reset to full weight.
/// Returns the number of rows reset.
template <typename Scalar>
int zero_row_fixup(const SparseRatings<Scalar>& ratings, TrustState<Scalar>& trust) {
  if (trust.weights.size() != ratings.n_entries())
    throw ValidationError("trust: weights not aligned with ratings entries");
  int fixed = 0;
  for (int i = 0; i < ratings.n_raters(); ++i) {
    if (ratings.row_count(i) == 0) continue;
    bool all_zero = true;
    for (int e = ratings.row_begin(i); e < ratings.row_end(i) && all_zero; ++e)
      all_zero = trust.weights[e] == Scalar(0);
    if (all_zero) {
      for (int e = ratings.row_begin(i); e < ratings.row_end(i); ++e)
        trust.weights[e] = Scalar(1);
      ++fixed;
    }
  }
  return fixed;
}

/// Per-rater trust score on a common nonnegative scale: distance from the
/// worst divergence, t_i = max_k d_k - d_i.
template <typename Scalar>
VectorX<Scalar> trust_vector(const VectorX<Scalar>& d) {
  if (d.size() == 0) return d;
  return VectorX<Scalar>::Constant(d.size(), d.maxCoeff()) - d;
}

/// Total squared trust mass at divergences d under uniform linear trust:
/// sum_i m_i (c0 - d_i)^2. This is the objective the fixed-point iteration
/// climbs; its maximizers are exactly the iteration's fixed points.
template <typename Scalar>
Scalar objective_from_divergence(const SparseRatings<Scalar>& ratings,
                                 const VectorX<Scalar>& d, Scalar c0) {
  Scalar total = 0;
  for (int i = 0; i < ratings.n_raters(); ++i) {
    const Scalar gap = c0 - d[i];
    total += Scalar(ratings.row_count(i)) * gap * gap;
  }
  return total;
}

/// Trust-mass objective as a function of the reputation vector.
template <typename Scalar>
Scalar objective(const SparseRatings<Scalar>& ratings, const VectorX<Scalar>& r, Scalar c0) {
  return objective_from_divergence(ratings, divergence(ratings, r), c0);
}

/// Gradient of the trust-mass objective with respect to each reputation:
/// g_j = 4 sum_{i rating j} (c0 - d_i) (E_ij - r_j).
template <typename Scalar>
VectorX<Scalar> objective_gradient(const SparseRatings<Scalar>& ratings,
                                   const VectorX<Scalar>& r, Scalar c0) {
  const VectorX<Scalar> d = divergence(ratings, r);
  VectorX<Scalar> g = VectorX<Scalar>::Zero(ratings.n_items());
  for (int j = 0; j < ratings.n_items(); ++j) {
    Scalar sum = 0;
    for (int s = ratings.col_begin(j); s < ratings.col_end(j); ++s) {
      const int e = ratings.slot_entry(s);
      sum += (c0 - d[ratings.slot_rater(s)]) * (ratings.entry_value(e) - r[j]);
    }
    g[j] = Scalar(4) * sum;
  }
  return g;
}

/// Dense Hessian of the trust-mass objective:
/// H_jl = 8 sum_i (1/m_i)(E_ij - r_j)(E_il - r_l) over raters rating both,
/// minus 4 sum_{i rating j} (c0 - d_i) on the diagonal.
template <typename Scalar>
MatrixX<Scalar> objective_hessian(const SparseRatings<Scalar>& ratings,
                                  const VectorX<Scalar>& r, Scalar c0) {
  const VectorX<Scalar> d = divergence(ratings, r);
  const int m = ratings.n_items();
  MatrixX<Scalar> h = MatrixX<Scalar>::Zero(m, m);
  for (int i = 0; i < ratings.n_raters(); ++i) {
    const int count = ratings.row_count(i);
    if (count == 0) continue;
    const Scalar scale = Scalar(8) / Scalar(count);
    for (int e1 = ratings.row_begin(i); e1 < ratings.row_end(i); ++e1) {
      const int j1 = ratings.entry_item(e1);
      const Scalar diff1 = ratings.entry_value(e1) - r[j1];
      for (int e2 = ratings.row_begin(i); e2 < ratings.row_end(i); ++e2) {
        const int j2 = ratings.entry_item(e2);
        h(j1, j2) += scale * diff1 * (ratings.entry_value(e2) - r[j2]);
      }
    }
    for (int e = ratings.row_begin(i); e < ratings.row_end(i); ++e) {
      const int j = ratings.entry_item(e);
      h(j, j) -= Scalar(4) * (c0 - d[i]);
    }
  }
  return h;
}

}  // namespace repute
