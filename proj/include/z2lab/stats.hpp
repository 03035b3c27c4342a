#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace z2lab {

/// A Monte Carlo measurement. std_error is the batch-means standard error;
/// autocorr_hint is (batch-means variance of the mean) / (naive variance of
/// the mean), so values well above 1 flag correlated samples.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  double autocorr_hint = 1.0;
  /// Standard error from the spread of replica means; NaN for one replica.
  double replica_error = 0.0;
};

inline constexpr std::size_t kDefaultBatches = 32;

/// Batch-means estimate over one or more independent sample streams of equal
/// weight. Each stream is cut into `batches` equal batches (leftover samples
/// count toward the mean only).
[[nodiscard]] Estimate batch_means(const std::vector<std::vector<double>>& streams,
                                   std::size_t batches = kDefaultBatches);
[[nodiscard]] Estimate batch_means(std::span<const double> samples,
                                   std::size_t batches = kDefaultBatches);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
  double intercept_error = 0.0;
  double chi2 = 0.0;
};

/// Weighted least squares of y on x with weights 1 / sigma^2. Throws
/// std::invalid_argument for fewer than two points or non-positive sigma.
[[nodiscard]] LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                                            std::span<const double> sigma);

}  // namespace z2lab
