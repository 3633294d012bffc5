#include "fairsim/learn/scaler.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fairsim::learn {

namespace {

void check_width(std::size_t expected, std::size_t got, const char* who) {
  if (expected != got) throw std::invalid_argument(std::string(who) + ": feature width mismatch");
}

}  // namespace

void StandardScaler::fit(const std::vector<std::vector<double>>& x) {
  if (x.empty()) throw std::invalid_argument("StandardScaler::fit: empty batch");
  const std::size_t d = x[0].size();
  mean_.assign(d, 0.0);
  std_.assign(d, 0.0);
  for (const auto& row : x) {
    check_width(d, row.size(), "StandardScaler::fit");
    for (std::size_t j = 0; j < d; ++j) mean_[j] += row[j];
  }
  const double n = static_cast<double>(x.size());
  for (std::size_t j = 0; j < d; ++j) mean_[j] /= n;
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - mean_[j];
      std_[j] += c * c;
    }
  for (std::size_t j = 0; j < d; ++j) {
    const double var = std_[j] / n;
    std_[j] = var > 0 ? std::sqrt(var) : 1.0;
  }
}

std::vector<double> StandardScaler::transform(const std::vector<double>& row) const {
  if (!fitted()) throw std::logic_error("StandardScaler::transform: not fitted");
  check_width(mean_.size(), row.size(), "StandardScaler::transform");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean_[j]) / std_[j];
  return out;
}

std::vector<std::vector<double>> StandardScaler::transform(
    const std::vector<std::vector<double>>& x) const {
  std::vector<std::vector<double>> out;
  out.reserve(x.size());
  for (const auto& row : x) out.push_back(transform(row));
  return out;
}

StandardScaler StandardScaler::from_stats(std::vector<double> mean, std::vector<double> std_dev) {
  if (mean.size() != std_dev.size())
    throw std::invalid_argument("StandardScaler::from_stats: size mismatch");
  StandardScaler s;
  s.mean_ = std::move(mean);
  s.std_ = std::move(std_dev);
  return s;
}

StreamingScaler::StreamingScaler(std::size_t n_features)
    : mean_(n_features, 0.0), m2_(n_features, 0.0) {}

void StreamingScaler::update(const std::vector<double>& row) {
  check_width(mean_.size(), row.size(), "StreamingScaler::update");
  ++count_;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double delta = row[j] - mean_[j];
    mean_[j] += delta / static_cast<double>(count_);
    m2_[j] += delta * (row[j] - mean_[j]);
  }
}

std::vector<double> StreamingScaler::transform(const std::vector<double>& row) const {
  check_width(mean_.size(), row.size(), "StreamingScaler::transform");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double var = count_ > 0 ? m2_[j] / static_cast<double>(count_) : 0.0;
    const double sd = var > 0 ? std::sqrt(var) : 1.0;
    out[j] = (row[j] - mean_[j]) / sd;
  }
  return out;
}

std::vector<double> StreamingScaler::learn_transform(const std::vector<double>& row) {
  update(row);
  return transform(row);
}

std::vector<double> StreamingScaler::variance() const {
  std::vector<double> v(m2_.size(), 0.0);
  if (count_ == 0) return v;
  for (std::size_t j = 0; j < m2_.size(); ++j) v[j] = m2_[j] / static_cast<double>(count_);
  return v;
}

}  // namespace fairsim::learn
