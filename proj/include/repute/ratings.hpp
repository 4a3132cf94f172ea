#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace repute {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data: duplicate pairs, values out of range, bad shapes.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using VectorXi = Eigen::Matrix<int, Eigen::Dynamic, 1>;

/// Affine map between the raw rating scale and [0, 1].
struct RatingScale {
  double min_raw = 0.0;
  double max_raw = 1.0;

  double normalize(double raw) const { return (raw - min_raw) / (max_raw - min_raw); }
  double denormalize(double unit) const { return min_raw + unit * (max_raw - min_raw); }
};

/// One (rater, item, raw value) observation.
struct RatingTriple {
  int rater = 0;
  int item = 0;
  double value = 0.0;
};

/// Sparse rater-by-item evaluation matrix, values normalized to [0, 1].
///
/// Entries are stored once, in row-major order (by rater, then by item),
/// with a column view that permutes into the same storage. Any per-entry
/// quantity (trust weights in particular) stored in entry order can be
/// traversed either by rater or by item.
template <typename Scalar>
class SparseRatings {
 public:
  SparseRatings() = default;

  /// Build from triples with raw values on `scale`. Throws ValidationError on
  /// a duplicated (rater, item) pair or a value outside the scale.
  static SparseRatings build(int n_raters, int n_items,
                             const std::vector<RatingTriple>& triples,
                             RatingScale scale = {0.0, 1.0}) {
    if (n_raters < 0 || n_items < 0)
      throw ValidationError("ratings: negative matrix dimensions");
    if (!(scale.max_raw > scale.min_raw))
      throw ValidationError("ratings: scale max must exceed scale min");

    SparseRatings out;
    out.n_raters_ = n_raters;
    out.n_items_ = n_items;
    out.scale_ = scale;
    const int nnz = static_cast<int>(triples.size());

    for (int k = 0; k < nnz; ++k) {
      const RatingTriple& t = triples[k];
      if (t.rater < 0 || t.rater >= n_raters || t.item < 0 || t.item >= n_items) {
        std::ostringstream msg;
        msg << "ratings: row " << k << ": entry (" << t.rater << ", " << t.item
            << ") outside a " << n_raters << " x " << n_items << " matrix";
        throw ValidationError(msg.str());
      }
      if (t.value < scale.min_raw || t.value > scale.max_raw) {
        std::ostringstream msg;
        msg << "ratings: row " << k << ": value " << t.value << " for (" << t.rater
            << ", " << t.item << ") outside scale [" << scale.min_raw << ", "
            << scale.max_raw << "]";
        throw ValidationError(msg.str());
      }
    }

    // Counting sort into row-major order, then order each row by column.
    out.row_ptr_ = VectorXi::Zero(n_raters + 1);
    for (const RatingTriple& t : triples) out.row_ptr_[t.rater + 1]++;
    for (int i = 0; i < n_raters; ++i) out.row_ptr_[i + 1] += out.row_ptr_[i];

    out.col_idx_ = VectorXi(nnz);
    out.values_ = VectorX<Scalar>(nnz);
    {
      std::vector<std::vector<std::pair<int, double>>> rows(n_raters);
      for (const RatingTriple& t : triples) rows[t.rater].emplace_back(t.item, t.value);
      for (int i = 0; i < n_raters; ++i) {
        std::sort(rows[i].begin(), rows[i].end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t k = 0; k + 1 < rows[i].size(); ++k) {
          if (rows[i][k].first == rows[i][k + 1].first) {
            std::ostringstream msg;
            msg << "ratings: duplicate entry for pair (" << i << ", " << rows[i][k].first << ")";
            throw ValidationError(msg.str());
          }
        }
        int pos = out.row_ptr_[i];
        for (const auto& [j, raw] : rows[i]) {
          out.col_idx_[pos] = j;
          out.values_[pos] = static_cast<Scalar>(scale.normalize(raw));
          ++pos;
        }
      }
    }

    out.build_column_view();
    return out;
  }

  int n_raters() const { return n_raters_; }
  int n_items() const { return n_items_; }
  int n_entries() const { return static_cast<int>(values_.size()); }
  const RatingScale& scale() const { return scale_; }

  /// Number of items rated by rater i.
  int row_count(int i) const { return row_ptr_[i + 1] - row_ptr_[i]; }
  /// Number of raters of item j.
  int col_count(int j) const { return col_ptr_[j + 1] - col_ptr_[j]; }

  // Row-major (per-rater) traversal: entries row_begin(i) .. row_end(i).
  int row_begin(int i) const { return row_ptr_[i]; }
  int row_end(int i) const { return row_ptr_[i + 1]; }
  int entry_item(int e) const { return col_idx_[e]; }
  Scalar entry_value(int e) const { return values_[e]; }

  // Column (per-item) traversal: slots col_begin(j) .. col_end(j); each slot
  // names a rater and the position of its entry in row-major storage.
  int col_begin(int j) const { return col_ptr_[j]; }
  int col_end(int j) const { return col_ptr_[j + 1]; }
  int slot_rater(int s) const { return row_idx_[s]; }
  int slot_entry(int s) const { return col_perm_[s]; }

  const VectorX<Scalar>& values() const { return values_; }

  /// Same pattern and scale with values converted to another scalar type.
  template <typename Other>
  SparseRatings<Other> cast() const {
    SparseRatings<Other> out;
    out.n_raters_ = n_raters_;
    out.n_items_ = n_items_;
    out.scale_ = scale_;
    out.row_ptr_ = row_ptr_;
    out.col_idx_ = col_idx_;
    out.col_ptr_ = col_ptr_;
    out.row_idx_ = row_idx_;
    out.col_perm_ = col_perm_;
    out.values_ = values_.template cast<Other>();
    return out;
  }

 private:
  template <typename Other>
  friend class SparseRatings;

  void build_column_view() {
    const int nnz = n_entries();
    col_ptr_ = VectorXi::Zero(n_items_ + 1);
    for (int e = 0; e < nnz; ++e) col_ptr_[col_idx_[e] + 1]++;
    for (int j = 0; j < n_items_; ++j) col_ptr_[j + 1] += col_ptr_[j];
    row_idx_ = VectorXi(nnz);
    col_perm_ = VectorXi(nnz);
    VectorXi cursor = col_ptr_.head(n_items_);
    for (int i = 0; i < n_raters_; ++i) {
      for (int e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
        const int s = cursor[col_idx_[e]]++;
        row_idx_[s] = i;
        col_perm_[s] = e;
      }
    }
  }

  int n_raters_ = 0;
  int n_items_ = 0;
  RatingScale scale_;
  VectorXi row_ptr_;   // size n_raters + 1
  VectorXi col_idx_;   // item of each entry, row-major order
  VectorX<Scalar> values_;  // normalized values, row-major order
  VectorXi col_ptr_;   // size n_items + 1
  VectorXi row_idx_;   // rater of each column slot
  VectorXi col_perm_;  // storage entry of each column slot
};

using SparseRatingsd = SparseRatings<double>;

}  // namespace repute
