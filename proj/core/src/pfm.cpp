#include "odesys/pfm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "odesys/errors.hpp"

namespace odesys {

std::string to_string(CurveDirection direction) {
  switch (direction) {
    case CurveDirection::ascending:
      return "ascending";
    case CurveDirection::descending:
      return "descending";
    case CurveDirection::free:
      return "free";
  }
  return "free";
}

CurveDirection parse_curve_direction(const std::string& text) {
  if (text == "ascending") return CurveDirection::ascending;
  if (text == "descending") return CurveDirection::descending;
  if (text == "free") return CurveDirection::free;
  throw ValidationError("unknown curve direction '" + text + "'");
}

PreferenceCurve::PreferenceCurve(std::vector<Breakpoint> breakpoints,
                                 CurveDirection direction)
    : points_(std::move(breakpoints)), direction_(direction) {
  if (points_.size() < 2) {
    throw ValidationError("preference curve needs at least two breakpoints");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.performance) || !std::isfinite(p.preference)) {
      throw ValidationError("preference curve breakpoint is not finite");
    }
    if (p.preference < 0.0 || p.preference > 100.0) {
      std::ostringstream msg;
      msg << "breakpoint " << i << " preference " << p.preference
          << " outside [0, 100]";
      throw ValidationError(msg.str());
    }
    if (i > 0 && !(points_[i - 1].performance < p.performance)) {
      std::ostringstream msg;
      msg << "breakpoint abscissae not strictly increasing at index " << i;
      throw ValidationError(msg.str());
    }
  }
  const double first = points_.front().preference;
  const double last = points_.back().preference;
  const bool anchored = (first == 0.0 && last == 100.0) ||
                        (first == 100.0 && last == 0.0);
  if (!anchored) {
    throw ValidationError(
        "first and last breakpoints must carry the 0 and 100 anchors");
  }
  for (std::size_t i = 1; i + 1 < points_.size(); ++i) {
    const double p = points_[i].preference;
    if (p == 0.0 || p == 100.0) {
      throw ValidationError("interior breakpoint repeats a 0/100 anchor");
    }
  }
  if (direction_ == CurveDirection::ascending && first != 0.0) {
    throw ValidationError("ascending curve must start at preference 0");
  }
  if (direction_ == CurveDirection::descending && first != 100.0) {
    throw ValidationError("descending curve must start at preference 100");
  }
  if (direction_ != CurveDirection::free) {
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double step = points_[i].preference - points_[i - 1].preference;
      const bool ok = direction_ == CurveDirection::ascending ? step >= 0.0
                                                              : step <= 0.0;
      if (!ok) {
        throw ValidationError("curve is not monotone in its declared direction");
      }
    }
  }
}

PreferenceCurve PreferenceCurve::linear(double f_min, double f_max,
                                        bool ascending) {
  if (!(f_min < f_max)) {
    std::ostringstream msg;
    msg << "degenerate preference interval [" << f_min << ", " << f_max << "]";
    throw ValidationError(msg.str());
  }
  if (ascending) {
    return PreferenceCurve({{f_min, 0.0}, {f_max, 100.0}},
                           CurveDirection::ascending);
  }
  return PreferenceCurve({{f_min, 100.0}, {f_max, 0.0}},
                         CurveDirection::descending);
}

CurveValue PreferenceCurve::evaluate(double f) const {
  if (std::isnan(f)) throw DomainError("preference curve evaluated at NaN");
  if (f <= points_.front().performance) {
    return {points_.front().preference, f < points_.front().performance};
  }
  if (f >= points_.back().performance) {
    return {points_.back().preference, f > points_.back().performance};
  }
  auto upper = std::upper_bound(
      points_.begin(), points_.end(), f,
      [](double value, const Breakpoint& b) { return value < b.performance; });
  const Breakpoint& hi = *upper;
  const Breakpoint& lo = *(upper - 1);
  if (f == lo.performance) return {lo.preference, false};
  const double t = (f - lo.performance) / (hi.performance - lo.performance);
  return {lo.preference + (hi.preference - lo.preference) * t, false};
}

ReferenceInterval PreferenceCurve::reference_interval() const noexcept {
  return {points_.front().performance, points_.back().performance};
}

double WeightMatrix::at(ScoreKey key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0.0 : it->second;
}

WeightMatrix WeightMatrix::scaled(double factor) const {
  WeightMatrix out = *this;
  for (auto& [key, w] : out.entries_) w *= factor;
  return out;
}

WeightMatrix WeightMatrix::combine(double a, const WeightMatrix& lhs, double b,
                                   const WeightMatrix& rhs) {
  WeightMatrix out;
  for (const auto& [key, w] : lhs.entries_) out.entries_[key] += a * w;
  for (const auto& [key, w] : rhs.entries_) out.entries_[key] += b * w;
  return out;
}

WeightReport validate_weights(const WeightMatrix& weights) {
  WeightReport report;
  for (const auto& [key, w] : weights.entries()) {
    report.sum += w;
    if (w < 0.0 || std::isnan(w)) report.negative.push_back(key);
  }
  report.deviation = std::abs(report.sum - 1.0);
  report.valid = report.negative.empty() && report.deviation <= kWeightSumTolerance;
  return report;
}

ScoreTable::ScoreTable(std::vector<ScoreKey> columns)
    : columns_(std::move(columns)) {}

void ScoreTable::add_row(std::span<const double> values) {
  if (values.size() != columns_.size()) {
    throw SchemaError("score row length does not match column count");
  }
  values_.insert(values_.end(), values.begin(), values.end());
  ++rows_;
}

std::vector<double> ScoreTable::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

ColumnStats column_stats(const ScoreTable& table) {
  if (table.rows() < 2) {
    throw InsufficientCandidatesError(
        "z-normalization needs at least two candidates");
  }
  const std::size_t n = table.rows();
  ColumnStats stats;
  stats.mean.resize(table.cols());
  stats.stddev.resize(table.cols());
  stats.constant.resize(table.cols());
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const double first = table(0, c);
    bool constant = true;
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum += table(r, c);
      constant = constant && table(r, c) == first;
    }
    double mean = sum / static_cast<double>(n);
    // Second pass removes the bulk of the rounding error in the mean.
    double residual = 0.0;
    for (std::size_t r = 0; r < n; ++r) residual += table(r, c) - mean;
    mean += residual / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = table(r, c) - mean;
      sq += d * d;
    }
    stats.mean[c] = constant ? first : mean;
    stats.stddev[c] = constant ? 0.0 : std::sqrt(sq / static_cast<double>(n));
    stats.constant[c] = constant || stats.stddev[c] == 0.0;
  }
  return stats;
}

ScoreTable standardize(const ScoreTable& table, const ColumnStats& stats) {
  if (stats.mean.size() != table.cols()) {
    throw SchemaError("column statistics do not match table width");
  }
  ScoreTable out = table;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      out(r, c) = stats.constant[c]
                      ? 0.0
                      : (table(r, c) - stats.mean[c]) / stats.stddev[c];
    }
  }
  return out;
}

ScoreTable z_normalize(const ScoreTable& table) {
  return standardize(table, column_stats(table));
}

std::vector<double> afine_aggregate(const ScoreTable& z_table,
                                    const WeightMatrix& weights) {
  const auto& cols = z_table.columns();
  for (const auto& [key, w] : weights.entries()) {
    if (w == 0.0) continue;
    if (std::find(cols.begin(), cols.end(), key) == cols.end()) {
      std::ostringstream msg;
      msg << "weight (" << key.actor << ", " << key.criterion
          << ") has no matching score column";
      throw SchemaError(msg.str());
    }
  }
  std::vector<double> col_weight(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) col_weight[c] = weights.at(cols[c]);

  std::vector<double> z(z_table.rows(), 0.0);
  for (std::size_t r = 0; r < z_table.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (col_weight[c] != 0.0) acc += col_weight[c] * z_table(r, c);
    }
    z[r] = acc;
  }
  return z;
}

}  // namespace odesys
