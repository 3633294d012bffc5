#pragma once

#include <span>
#include <vector>

namespace fairsim::learn {

// Least-squares non-decreasing fit of labels on scores (pool adjacent
// violators), evaluated by linear interpolation between the fitted points
// and clamped beyond them. Fewer than two pairs leaves the identity map.
class IsotonicCalibrator {
 public:
  static IsotonicCalibrator fit(std::span<const double> scores, std::span<const int> labels);
  static IsotonicCalibrator from_points(std::vector<double> breakpoints,
                                        std::vector<double> values);

  double transform(double score) const;
  std::vector<double> transform(std::span<const double> scores) const;

  bool identity() const { return x_.empty(); }
  const std::vector<double>& breakpoints() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> x_;  // strictly increasing unique scores
  std::vector<double> y_;  // non-decreasing fitted values
};

}  // namespace fairsim::learn
