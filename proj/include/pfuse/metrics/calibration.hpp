#pragma once

#include <span>
#include <vector>

namespace pfuse::metrics {

inline constexpr double kCalibrationClip = 1e-6;

/// Affine moment matching s' = s·scale + shift, mapping the experimental
/// score distribution onto the baseline's mean and (population) variance.
struct CalibrationTransform {
  double scale = 1.0;
  double shift = 0.0;
  double source_mean = 0.0;
  double source_std = 0.0;
  double target_mean = 0.0;
  double target_std = 0.0;

  double map(double score) const noexcept { return score * scale + shift; }
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};
Moments sample_moments(std::span<const double> values);

/// Throws ContractViolation on empty samples and NumericError when the
/// experimental sample has zero variance.
CalibrationTransform fit_calibration(std::span<const double> experimental,
                                     std::span<const double> baseline);

/// Applies the affine map without clipping.
std::vector<double> apply_calibration_unclipped(const CalibrationTransform& transform,
                                                std::span<const double> scores);
/// Applies the affine map, then clips into [1e-6, 1 - 1e-6].
std::vector<double> apply_calibration(const CalibrationTransform& transform,
                                      std::span<const double> scores);

}  // namespace pfuse::metrics
