#include "fairsim/learn/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fairsim::learn {

IsotonicCalibrator IsotonicCalibrator::fit(std::span<const double> scores,
                                           std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("IsotonicCalibrator::fit: size mismatch");
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("IsotonicCalibrator::fit: non-finite score");
  IsotonicCalibrator c;
  if (scores.size() < 2) return c;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Tied scores must map to one value, so duplicates are pooled up front
  // and carry their multiplicity as weight.
  std::vector<double> xs, ys, ws;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double s = scores[order[k]];
    const double y = labels[order[k]];
    if (!xs.empty() && xs.back() == s) {
      ys.back() += y;
      ws.back() += 1.0;
    } else {
      xs.push_back(s);
      ys.push_back(y);
      ws.push_back(1.0);
    }
  }
  for (std::size_t k = 0; k < xs.size(); ++k) ys[k] /= ws[k];

  // PAV over the pooled points: merge backwards while the mean sequence
  // decreases. block[k] covers pooled points [start[k], start[k+1]).
  std::vector<double> bv, bw;
  std::vector<std::size_t> bstart;
  bv.reserve(xs.size());
  bw.reserve(xs.size());
  bstart.reserve(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double v = ys[k], w = ws[k];
    std::size_t start = k;
    while (!bv.empty() && bv.back() > v) {
      v = (bv.back() * bw.back() + v * w) / (bw.back() + w);
      w += bw.back();
      start = bstart.back();
      bv.pop_back();
      bw.pop_back();
      bstart.pop_back();
    }
    bv.push_back(v);
    bw.push_back(w);
    bstart.push_back(start);
  }

  c.x_ = std::move(xs);
  c.y_.resize(c.x_.size());
  for (std::size_t b = 0; b < bv.size(); ++b) {
    const std::size_t end = b + 1 < bv.size() ? bstart[b + 1] : c.x_.size();
    for (std::size_t k = bstart[b]; k < end; ++k) c.y_[k] = bv[b];
  }
  return c;
}

IsotonicCalibrator IsotonicCalibrator::from_points(std::vector<double> breakpoints,
                                                   std::vector<double> values) {
  if (breakpoints.size() != values.size())
    throw std::invalid_argument("IsotonicCalibrator::from_points: size mismatch");
  for (std::size_t k = 1; k < breakpoints.size(); ++k)
    if (breakpoints[k] <= breakpoints[k - 1] || values[k] < values[k - 1])
      throw std::invalid_argument("IsotonicCalibrator::from_points: not monotone");
  IsotonicCalibrator c;
  c.x_ = std::move(breakpoints);
  c.y_ = std::move(values);
  return c;
}

double IsotonicCalibrator::transform(double score) const {
  if (x_.empty()) return std::clamp(score, 0.0, 1.0);
  if (score <= x_.front()) return y_.front();
  if (score >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), score);
  const std::size_t hi = static_cast<std::size_t>(it - x_.begin());
  const std::size_t lo = hi - 1;
  const double t = (score - x_[lo]) / (x_[hi] - x_[lo]);
  return y_[lo] + t * (y_[hi] - y_[lo]);
}

std::vector<double> IsotonicCalibrator::transform(std::span<const double> scores) const {
  std::vector<double> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(transform(s));
  return out;
}

}  // namespace fairsim::learn
