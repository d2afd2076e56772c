#include "pfuse/metrics/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "pfuse/common/error.hpp"

namespace pfuse::metrics {

Moments sample_moments(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("moments of an empty sample");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, var / n};
}

CalibrationTransform fit_calibration(std::span<const double> experimental,
                                     std::span<const double> baseline) {
  if (experimental.empty() || baseline.empty()) {
    throw ContractViolation("fit_calibration: both samples must be non-empty");
  }
  const Moments src = sample_moments(experimental);
  const Moments dst = sample_moments(baseline);
  if (!(src.variance > 0.0)) {
    throw NumericError("fit_calibration: experimental scores have zero variance");
  }
  CalibrationTransform t;
  t.source_mean = src.mean;
  t.source_std = std::sqrt(src.variance);
  t.target_mean = dst.mean;
  t.target_std = std::sqrt(dst.variance);
  t.scale = t.target_std / t.source_std;
  t.shift = t.target_mean - t.source_mean * t.scale;
  return t;
}

std::vector<double> apply_calibration_unclipped(const CalibrationTransform& transform,
                                                std::span<const double> scores) {
  std::vector<double> out(scores.size());
  std::transform(scores.begin(), scores.end(), out.begin(),
                 [&](double s) { return transform.map(s); });
  return out;
}

std::vector<double> apply_calibration(const CalibrationTransform& transform,
                                      std::span<const double> scores) {
  auto out = apply_calibration_unclipped(transform, scores);
  for (double& s : out) s = std::clamp(s, kCalibrationClip, 1.0 - kCalibrationClip);
  return out;
}

}  // namespace pfuse::metrics
