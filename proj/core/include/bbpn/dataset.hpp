#ifndef BBPN_DATASET_HPP
#define BBPN_DATASET_HPP

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bbpn/ordinate.hpp"

namespace bbpn {

/// One solver output q(h, t) at resolution h > 0. The limit h = 0 is never
/// observed; it is the prediction target.
struct Datum {
  double h = 0.0;
  Ordinate t;
  double value = 0.0;
};

/// The extrapolation dataset: triples (h_i, t_{i,j}, q(h_i, t_{i,j})) stored
/// in lexicographic order, first by decreasing resolution h_1 > ... > h_n,
/// then by ordinate within each resolution. Immutable after build().
class Dataset {
 public:
  Dataset() = default;

  /// Sorts, validates and deduplicates raw points. Exact duplicates (same h
  /// and t, equal value) collapse to one entry; conflicting values at the
  /// same (h, t) raise DataConsistencyError; h <= 0 or an empty input raise
  /// ArgumentError.
  static Dataset build(std::vector<Datum> points);

  std::size_t size() const { return data_.size(); }  // m
  bool empty() const { return data_.empty(); }
  const Datum& operator[](std::size_t l) const { return data_[l]; }
  std::vector<Datum>::const_iterator begin() const { return data_.begin(); }
  std::vector<Datum>::const_iterator end() const { return data_.end(); }

  /// Distinct resolutions, decreasing.
  const std::vector<double>& resolutions() const { return resolutions_; }
  std::size_t resolution_count() const { return resolutions_.size(); }  // n
  const std::vector<std::size_t>& counts_per_resolution() const { return counts_; }
  double finest_h() const;

  /// Number of ordinate blocks p (0 for an empty dataset).
  std::size_t ordinate_blocks() const;

  /// Observation vector q in lexicographic order.
  Eigen::VectorXd values() const;

  /// Distinct ordinates in ascending order.
  std::vector<Ordinate> distinct_ordinates() const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::vector<Datum> data_;
  std::vector<double> resolutions_;
  std::vector<std::size_t> counts_;
};

/// Cumulative union: element i' of the result holds the data of runs 1..i',
/// re-sorted; duplicates across runs collapse. Input runs are expected in
/// order of decreasing finest resolution.
std::vector<Dataset> augment_cumulative(const std::vector<Dataset>& runs);

/// Maps a raw solver control w (iteration count, step size, tolerance) to the
/// resolution h = w^exponent. The exponent must be non-zero; the map is
/// strictly positive and monotone.
class HParameterization {
 public:
  static HParameterization power(double exponent);

  /// Accepts "w", "w^-1", "w^-2", "w^-0.5", ...
  static HParameterization parse(std::string_view text);

  double h_from_control(double w) const;
  double control_from_h(double h) const;
  double exponent() const { return exponent_; }

 private:
  explicit HParameterization(double e) : exponent_(e) {}
  double exponent_ = -1.0;
};

/// CSV wire format for user-supplied solver output: header row required,
/// columns h, t_1..t_p, value. Each t column is one 1-d ordinate block.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv_file(const std::string& path);
void write_dataset_csv(const Dataset& data, std::ostream& out);

}  // namespace bbpn

#endif  // BBPN_DATASET_HPP
