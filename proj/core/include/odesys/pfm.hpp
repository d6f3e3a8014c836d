#pragma once

// Preference function modelling: curves mapping performance to a 0..100
// preference scale, and the weighted-centroid aggregation of z-normalized
// preference scores.

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace odesys {

enum class CurveDirection { ascending, descending, free };

std::string to_string(CurveDirection direction);
CurveDirection parse_curve_direction(const std::string& text);

struct Breakpoint {
  double performance = 0.0;
  double preference = 0.0;

  bool operator==(const Breakpoint&) const = default;
};

/// Performance values carrying the 0 and 100 anchors, in abscissa order.
struct ReferenceInterval {
  double f_loc = 0.0;
  double f_upc = 0.0;

  bool operator==(const ReferenceInterval&) const = default;
};

struct CurveValue {
  double preference = 0.0;
  bool clamped = false;  ///< f was outside the breakpoint range
};

/// Piecewise-linear preference curve.
///
/// Invariants, checked on construction: at least two breakpoints with
/// strictly increasing abscissae, preferences in [0, 100], the first and last
/// breakpoints carry the 0 and 100 anchors, and no interior breakpoint
/// reaches either anchor. Ascending and descending curves must also be
/// monotone in that direction.
class PreferenceCurve {
 public:
  PreferenceCurve(std::vector<Breakpoint> breakpoints, CurveDirection direction);

  /// Two-point curve on [f_min, f_max]; ascending maps f_min to 0.
  static PreferenceCurve linear(double f_min, double f_max, bool ascending);

  /// Interpolated preference. Values outside the breakpoint range clamp to
  /// the nearest end and set `clamped`.
  CurveValue evaluate(double f) const;
  double operator()(double f) const { return evaluate(f).preference; }

  const std::vector<Breakpoint>& breakpoints() const noexcept { return points_; }
  CurveDirection direction() const noexcept { return direction_; }
  ReferenceInterval reference_interval() const noexcept;

  bool operator==(const PreferenceCurve&) const = default;

 private:
  std::vector<Breakpoint> points_;
  CurveDirection direction_;
};

/// Identifies one preference column: actor k, criterion i.
struct ScoreKey {
  std::size_t actor = 0;
  std::size_t criterion = 0;

  auto operator<=>(const ScoreKey&) const = default;
};

/// Local weights w'_{k,i}. Missing entries are zero.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(std::map<ScoreKey, double> entries)
      : entries_(std::move(entries)) {}

  void set(ScoreKey key, double weight) { entries_[key] = weight; }
  double at(ScoreKey key) const;
  const std::map<ScoreKey, double>& entries() const noexcept { return entries_; }

  /// Returns a copy whose entries are scaled by `factor`.
  WeightMatrix scaled(double factor) const;
  /// Entry-wise a * lhs + b * rhs.
  static WeightMatrix combine(double a, const WeightMatrix& lhs, double b,
                              const WeightMatrix& rhs);

  bool operator==(const WeightMatrix&) const = default;

 private:
  std::map<ScoreKey, double> entries_;
};

inline constexpr double kWeightSumTolerance = 1e-9;

struct WeightReport {
  bool valid = false;
  double sum = 0.0;
  double deviation = 0.0;  ///< |sum - 1|
  std::vector<ScoreKey> negative;
};

WeightReport validate_weights(const WeightMatrix& weights);

/// Rectangular candidate-by-column table, row-major.
class ScoreTable {
 public:
  ScoreTable() = default;
  explicit ScoreTable(std::vector<ScoreKey> columns);

  /// Appends a row; its length must match the column count.
  void add_row(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }
  const std::vector<ScoreKey>& columns() const noexcept { return columns_; }

  double operator()(std::size_t row, std::size_t col) const {
    return values_[row * columns_.size() + col];
  }
  double& operator()(std::size_t row, std::size_t col) {
    return values_[row * columns_.size() + col];
  }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * columns_.size(), columns_.size()};
  }
  std::vector<double> column(std::size_t c) const;

 private:
  std::vector<ScoreKey> columns_;
  std::vector<double> values_;
  std::size_t rows_ = 0;
};

/// Per-column location and scale used by z-normalization.
struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> stddev;   ///< population (N-divisor) standard deviation
  std::vector<bool> constant;   ///< every value in the column identical
};

/// Requires at least two rows.
ColumnStats column_stats(const ScoreTable& table);

/// Applies previously computed statistics; constant columns map to zero.
ScoreTable standardize(const ScoreTable& table, const ColumnStats& stats);

/// z = (P - mean) / stddev per column; zero-variance columns map to zero.
ScoreTable z_normalize(const ScoreTable& table);

/// Z(x) = sum over columns of w'_{k,i} z_{k,i}(x), one value per row.
std::vector<double> afine_aggregate(const ScoreTable& z_table,
                                    const WeightMatrix& weights);

}  // namespace odesys
