#include "deepbarrier/stats.hpp"

#include "deepbarrier/errors.hpp"

#include <algorithm>
#include <cmath>

namespace deepbarrier {

Summary summarize(const Eigen::Ref<const Eigen::VectorXd>& values) {
  Summary s;
  s.count = values.size();
  if (s.count == 0) return s;
  s.mean = values.mean();
  s.min = values.minCoeff();
  s.max = values.maxCoeff();
  if (s.count > 1) {
    s.std_dev = std::sqrt((values.array() - s.mean).square().sum() / static_cast<double>(s.count - 1));
    s.std_error = s.std_dev / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double quantile_range(const std::vector<double>& values, double lo, double hi) {
  return quantile(values, hi) - quantile(values, lo);
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, double lo, double hi, int bins) {
  if (bins < 1 || !(hi > lo)) throw ValidationError("histogram needs bins >= 1 and hi > lo");
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  const double width = (hi - lo) / bins;
  for (int k = 0; k < bins; ++k) {
    out[static_cast<std::size_t>(k)].lo = lo + k * width;
    out[static_cast<std::size_t>(k)].hi = k + 1 == bins ? hi : lo + (k + 1) * width;
  }
  for (double v : values) {
    if (std::isnan(v)) continue;
    int k = static_cast<int>(std::floor((v - lo) / width));
    k = std::clamp(k, 0, bins - 1);
    ++out[static_cast<std::size_t>(k)].count;
  }
  return out;
}

}  // namespace deepbarrier
