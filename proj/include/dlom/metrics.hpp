#pragma once

// Performance indicators computed from raw measurement series.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dlom/error.hpp"

namespace dlom::metrics {

struct MeasurementSeries {
  std::vector<double> values;
  std::string unit;
};

namespace detail {

inline void check_paired(std::span<const double> predictions,
                         std::span<const double> references) {
  if (predictions.empty() || predictions.size() != references.size())
    throw Error(ErrorKind::kInvalidInput,
                "series must be non-empty and of equal length");
}

}  // namespace detail

// Root-mean-square error.
inline double rmse(std::span<const double> predictions,
                   std::span<const double> references) {
  detail::check_paired(predictions, references);
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    double d = predictions[i] - references[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

// Mean absolute relative difference, in percent.
inline double mard(std::span<const double> predictions,
                   std::span<const double> references) {
  detail::check_paired(predictions, references);
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (references[i] == 0.0)
      throw Error(ErrorKind::kDivisionDomain, "reference value is zero");
    sum += std::abs(predictions[i] - references[i]) / std::abs(references[i]);
  }
  return 100.0 * sum / static_cast<double>(predictions.size());
}

// Accuracy stability as a percentage: 100 * (1 - coefficient of variation),
// floored at zero. Uses the sample (n-1) standard deviation.
inline double stability(const MeasurementSeries& daily_mean_accuracy) {
  const std::vector<double>& v = daily_mean_accuracy.values;
  if (v.size() < 2)
    throw Error(ErrorKind::kInsufficientData,
                "stability needs at least two measurements");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (!(mean > 0.0))
    throw Error(ErrorKind::kDivisionDomain, "series mean must be positive");
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return 100.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return 100.0 * std::max(0.0, 1.0 - sd / mean);
}

// Completed work per second.
inline double throughput(double completed_units, double elapsed_s) {
  if (!(elapsed_s > 0.0))
    throw Error(ErrorKind::kInvalidInput, "elapsed time must be positive");
  if (completed_units < 0.0)
    throw Error(ErrorKind::kInvalidInput, "completed units must be non-negative");
  return completed_units / elapsed_s;
}

}  // namespace dlom::metrics
