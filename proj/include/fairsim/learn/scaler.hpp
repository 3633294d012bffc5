#pragma once

#include <cstddef>
#include <vector>

namespace fairsim::learn {

// Batch z-score standardization with population variance. Zero-variance
// columns keep std 1, so they transform to all zeros.
class StandardScaler {
 public:
  void fit(const std::vector<std::vector<double>>& x);
  std::vector<double> transform(const std::vector<double>& row) const;
  std::vector<std::vector<double>> transform(const std::vector<std::vector<double>>& x) const;

  bool fitted() const { return !mean_.empty(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& std_dev() const { return std_; }

  static StandardScaler from_stats(std::vector<double> mean, std::vector<double> std_dev);

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
};

// One-pass running moments (Welford), one row at a time. After identical
// observations its statistics match the batch scaler to 1e-9.
class StreamingScaler {
 public:
  explicit StreamingScaler(std::size_t n_features);

  void update(const std::vector<double>& row);
  std::vector<double> transform(const std::vector<double>& row) const;
  // absorbs the row, then scales it with the refreshed statistics
  std::vector<double> learn_transform(const std::vector<double>& row);

  std::size_t count() const { return count_; }
  const std::vector<double>& mean() const { return mean_; }
  std::vector<double> variance() const;  // population

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace fairsim::learn
