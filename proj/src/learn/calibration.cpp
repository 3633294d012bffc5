#include "fairsim/learn/calibration.hpp"

#include <stdexcept>
#include <vector>

namespace fairsim::learn {

CalibrationBuffer::CalibrationBuffer(std::size_t interval) : interval_(interval) {
  if (interval_ < 2) throw std::invalid_argument("CalibrationBuffer: interval must be >= 2");
}

void CalibrationBuffer::observe(double raw_score, int label) {
  window_.emplace_back(raw_score, label);
  if (window_.size() > interval_) window_.pop_front();
  ++since_fit_;
  if (since_fit_ >= interval_ && window_.size() == interval_) {
    since_fit_ = 0;
    ++refits_;
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(window_.size());
    labels.reserve(window_.size());
    for (const auto& [s, y] : window_) {
      scores.push_back(s);
      labels.push_back(y);
    }
    calibrator_ = IsotonicCalibrator::fit(scores, labels);
  }
}

}  // namespace fairsim::learn
