#pragma once

#include <cstddef>
#include <deque>
#include <utility>

#include "fairsim/learn/isotonic.hpp"

namespace fairsim::learn {

// Sliding-window isotonic refitting for the online pipeline. Every
// `interval` observations the calibrator is refit on the most recent
// `interval` (raw score, label) pairs; between refits the latest fit is
// reused, and before the first fit scores pass through unchanged.
class CalibrationBuffer {
 public:
  explicit CalibrationBuffer(std::size_t interval = 500);

  void observe(double raw_score, int label);
  double calibrate(double raw_score) const { return calibrator_.transform(raw_score); }

  const IsotonicCalibrator& calibrator() const { return calibrator_; }
  std::size_t refit_count() const { return refits_; }
  std::size_t buffered() const { return window_.size(); }
  std::size_t interval() const { return interval_; }

 private:
  std::size_t interval_;
  std::size_t since_fit_ = 0;
  std::size_t refits_ = 0;
  std::deque<std::pair<double, int>> window_;
  IsotonicCalibrator calibrator_;
};

}  // namespace fairsim::learn
