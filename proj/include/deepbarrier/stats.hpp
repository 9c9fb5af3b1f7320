#pragma once

#include <Eigen/Dense>

#include <vector>

namespace deepbarrier {

struct Summary {
  long count = 0;
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation
  double std_error = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Linearly interpolated empirical quantile (R type 7), q in [0, 1].
double quantile(std::vector<double> values, double q);

double quantile_range(const std::vector<double>& values, double lo, double hi);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  long count = 0;
};

/// Equal-width bins over [lo, hi]; values outside go to the edge bins.
std::vector<HistogramBin> histogram(const std::vector<double>& values, double lo, double hi, int bins);

}  // namespace deepbarrier
