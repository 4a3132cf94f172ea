#pragma once

#include "repute/ratings.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace repute {

enum class DatasetFormat {
  kMovieLensTab,  // fixed layout: user<TAB>item<TAB>rating<TAB>timestamp
  kCsv,           // header row; columns located by name
};

/// How to read a ratings file: the format, the raw rating scale, and (for
/// CSV) which named columns hold what. The timestamp column is optional;
/// without it the dataset cannot be split into epochs.
struct DatasetDescriptor {
  DatasetFormat format = DatasetFormat::kMovieLensTab;
  RatingScale scale{1.0, 5.0};
  std::string rater_column = "user";
  std::string item_column = "item";
  std::string value_column = "rating";
  std::string timestamp_column = "timestamp";  // empty: no timestamps expected
  char delimiter = ',';
};

/// One parsed file row with identifiers mapped to dense indices.
struct DataRow {
  int rater = 0;
  int item = 0;
  double value = 0.0;
  std::int64_t timestamp = 0;
  int line = 0;  // 1-based line number in the source file
};

/// A parsed dataset: the matrix, the dense-index dictionaries, and the raw
/// rows (kept for epoch splitting and export).
template <typename Scalar>
struct Dataset {
  SparseRatings<Scalar> ratings;
  std::vector<std::string> rater_ids;  // dense index -> original identifier
  std::vector<std::string> item_ids;
  std::vector<DataRow> rows;           // in file order
  bool has_timestamps = false;
};

using Datasetd = Dataset<double>;

namespace detail {

inline std::string trim_ws(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string::npos) return {};
  const auto to = s.find_last_not_of(" \t\r\n");
  return s.substr(from, to - from + 1);
}

inline std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, delimiter)) out.push_back(field);
  if (!line.empty() && line.back() == delimiter) out.emplace_back();
  return out;
}

inline ValidationError row_error(int line, const std::string& detail) {
  std::ostringstream msg;
  msg << "load: line " << line << ": " << detail;
  return ValidationError(msg.str());
}

inline double parse_value(const std::string& field, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw row_error(line, "cannot parse rating value '" + field + "'");
  }
}

inline std::int64_t parse_timestamp(const std::string& field, int line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw row_error(line, "cannot parse timestamp '" + field + "'");
  }
}

class IdIndex {
 public:
  int get(const std::string& id) {
    const auto [it, inserted] = map_.try_emplace(id, static_cast<int>(ids_.size()));
    if (inserted) ids_.push_back(id);
    return it->second;
  }
  std::vector<std::string> take() { return std::move(ids_); }

 private:
  std::unordered_map<std::string, int> map_;
  std::vector<std::string> ids_;
};

}  // namespace detail

/// Parse a rating dataset from a stream. Identifiers are mapped to dense
/// 0-based indices in order of first appearance. Malformed rows and
/// duplicate (rater, item) pairs are errors naming the offending line(s).
template <typename Scalar = double>
Dataset<Scalar> load(std::istream& in, const DatasetDescriptor& descriptor) {
  if (!(descriptor.scale.max_raw > descriptor.scale.min_raw))
    throw ValidationError("load: scale max must exceed scale min");

  Dataset<Scalar> out;
  detail::IdIndex raters, items;
  // (rater, item) -> line of first occurrence, for duplicate reporting.
  std::unordered_map<std::int64_t, int> seen;
  std::string line;
  int line_no = 0;

  int col_rater = 0, col_item = 1, col_value = 2, col_timestamp = 3;
  bool expect_timestamps = true;
  int min_fields = 4;

  if (descriptor.format == DatasetFormat::kCsv) {
    if (!std::getline(in, line)) throw ValidationError("load: empty file");
    ++line_no;
    const std::vector<std::string> header = detail::split_line(line, descriptor.delimiter);
    const auto find_column = [&](const std::string& name) {
      for (std::size_t k = 0; k < header.size(); ++k)
        if (detail::trim_ws(header[k]) == name) return static_cast<int>(k);
      return -1;
    };
    col_rater = find_column(descriptor.rater_column);
    col_item = find_column(descriptor.item_column);
    col_value = find_column(descriptor.value_column);
    for (const auto& [name, idx] : {std::pair<const std::string&, int>{descriptor.rater_column, col_rater},
                                    {descriptor.item_column, col_item},
                                    {descriptor.value_column, col_value}})
      if (idx < 0)
        throw ValidationError("load: header has no column named '" + name + "'");
    expect_timestamps = !descriptor.timestamp_column.empty();
    col_timestamp = expect_timestamps ? find_column(descriptor.timestamp_column) : -1;
    if (expect_timestamps && col_timestamp < 0) expect_timestamps = false;
    min_fields = 1 + std::max({col_rater, col_item, col_value, col_timestamp});
  }

  out.has_timestamps = expect_timestamps;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim_ws(line).empty()) continue;
    std::vector<std::string> fields;
    if (descriptor.format == DatasetFormat::kMovieLensTab) {
      fields = detail::split_line(line, '\t');
      if (static_cast<int>(fields.size()) < min_fields)
        throw detail::row_error(line_no, "expected 4 tab-separated fields, got " +
                                             std::to_string(fields.size()));
    } else {
      fields = detail::split_line(line, descriptor.delimiter);
      if (static_cast<int>(fields.size()) < min_fields)
        throw detail::row_error(line_no, "expected at least " + std::to_string(min_fields) +
                                             " fields, got " + std::to_string(fields.size()));
    }

    DataRow row;
    row.line = line_no;
    row.rater = raters.get(detail::trim_ws(fields[col_rater]));
    row.item = items.get(detail::trim_ws(fields[col_item]));
    row.value = detail::parse_value(detail::trim_ws(fields[col_value]), line_no);
    if (expect_timestamps)
      row.timestamp = detail::parse_timestamp(detail::trim_ws(fields[col_timestamp]), line_no);
    if (row.value < descriptor.scale.min_raw || row.value > descriptor.scale.max_raw) {
      std::ostringstream msg;
      msg << "rating " << row.value << " outside scale [" << descriptor.scale.min_raw << ", "
          << descriptor.scale.max_raw << "]";
      throw detail::row_error(line_no, msg.str());
    }

    const std::int64_t key =
        static_cast<std::int64_t>(row.rater) << 32 | static_cast<std::uint32_t>(row.item);
    const auto [it, inserted] = seen.try_emplace(key, line_no);
    if (!inserted) {
      std::ostringstream msg;
      msg << "duplicate rating for (" << detail::trim_ws(fields[col_rater]) << ", "
          << detail::trim_ws(fields[col_item]) << "): first at line " << it->second
          << ", again at line " << line_no;
      throw ValidationError("load: " + msg.str());
    }
    out.rows.push_back(row);
  }

  if (out.rows.empty()) throw ValidationError("load: no data rows");

  out.rater_ids = raters.take();
  out.item_ids = items.take();
  std::vector<RatingTriple> triples;
  triples.reserve(out.rows.size());
  for (const DataRow& row : out.rows) triples.push_back({row.rater, row.item, row.value});
  out.ratings = SparseRatings<Scalar>::build(static_cast<int>(out.rater_ids.size()),
                                             static_cast<int>(out.item_ids.size()), triples,
                                             descriptor.scale);
  return out;
}

template <typename Scalar = double>
Dataset<Scalar> load_file(const std::string& path, const DatasetDescriptor& descriptor) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("load: cannot open '" + path + "'");
  return load<Scalar>(in, descriptor);
}

/// Write a dataset back out in the layout the descriptor describes, raw
/// values and original identifiers. Loading the result with the same
/// descriptor reproduces the dataset.
template <typename Scalar>
void export_dataset(std::ostream& out, const Dataset<Scalar>& dataset,
                    const DatasetDescriptor& descriptor) {
  const bool timestamps = dataset.has_timestamps;
  if (descriptor.format == DatasetFormat::kCsv) {
    out << descriptor.rater_column << descriptor.delimiter << descriptor.item_column
        << descriptor.delimiter << descriptor.value_column;
    if (timestamps && !descriptor.timestamp_column.empty())
      out << descriptor.delimiter << descriptor.timestamp_column;
    out << "\n";
  }
  const char sep = descriptor.format == DatasetFormat::kMovieLensTab ? '\t' : descriptor.delimiter;
  for (const DataRow& row : dataset.rows) {
    std::ostringstream value;
    value << std::setprecision(17) << row.value;
    out << dataset.rater_ids[row.rater] << sep << dataset.item_ids[row.item] << sep
        << value.str();
    if (descriptor.format == DatasetFormat::kMovieLensTab)
      out << sep << row.timestamp;
    else if (timestamps && !descriptor.timestamp_column.empty())
      out << sep << row.timestamp;
    out << "\n";
  }
}

/// Epoch ladder for streaming: cumulative matrices over a time-ordered
/// re-indexing of the dataset, plus the dictionaries of that re-indexing.
/// Indices are assigned by first appearance in timestamp order, so each
/// epoch's raters and items are exactly the prefix [0, n_k) x [0, m_k) and
/// every indexed item already has at least one rating.
template <typename Scalar>
struct EpochSplit {
  std::vector<SparseRatings<Scalar>> epochs;  // epoch k holds all rows up to batch k
  std::vector<std::string> rater_ids;
  std::vector<std::string> item_ids;
};

template <typename Scalar>
EpochSplit<Scalar> split_epochs(const Dataset<Scalar>& dataset, int n_epochs) {
  if (!dataset.has_timestamps)
    throw ValidationError("epochs: dataset has no timestamps to order by");
  if (n_epochs < 1) throw ValidationError("epochs: need at least one epoch");

  std::vector<const DataRow*> ordered;
  ordered.reserve(dataset.rows.size());
  for (const DataRow& row : dataset.rows) ordered.push_back(&row);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const DataRow* a, const DataRow* b) { return a->timestamp < b->timestamp; });

  EpochSplit<Scalar> out;
  std::vector<int> rater_map(dataset.rater_ids.size(), -1);
  std::vector<int> item_map(dataset.item_ids.size(), -1);
  std::vector<RatingTriple> triples;
  triples.reserve(ordered.size());
  for (const DataRow* row : ordered) {
    if (rater_map[row->rater] < 0) {
      rater_map[row->rater] = static_cast<int>(out.rater_ids.size());
      out.rater_ids.push_back(dataset.rater_ids[row->rater]);
    }
    if (item_map[row->item] < 0) {
      item_map[row->item] = static_cast<int>(out.item_ids.size());
      out.item_ids.push_back(dataset.item_ids[row->item]);
    }
    triples.push_back({rater_map[row->rater], item_map[row->item], row->value});
  }

  const std::size_t total = triples.size();
  const RatingScale scale = dataset.ratings.scale();
  for (int k = 0; k < n_epochs; ++k) {
    const std::size_t upto = total * static_cast<std::size_t>(k + 1) / n_epochs;
    int n_raters = 0, n_items = 0;
    for (std::size_t e = 0; e < upto; ++e) {
      n_raters = std::max(n_raters, triples[e].rater + 1);
      n_items = std::max(n_items, triples[e].item + 1);
    }
    const std::vector<RatingTriple> prefix(triples.begin(), triples.begin() + upto);
    out.epochs.push_back(SparseRatings<Scalar>::build(n_raters, n_items, prefix, scale));
  }
  return out;
}

}  // namespace repute
