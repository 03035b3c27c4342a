#include "z2lab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace z2lab {

Estimate batch_means(const std::vector<std::vector<double>>& streams, std::size_t batches) {
  Estimate est;
  if (streams.empty()) return est;

  double total = 0.0;
  std::size_t n = 0;
  for (const auto& s : streams) {
    for (double v : s) total += v;
    n += s.size();
  }
  est.n_samples = n;
  if (n == 0) return est;
  est.mean = total / static_cast<double>(n);

  double naive = 0.0;
  for (const auto& s : streams)
    for (double v : s) naive += (v - est.mean) * (v - est.mean);
  naive = n > 1 ? naive / static_cast<double>(n - 1) : 0.0;

  std::vector<double> means;
  std::vector<double> replica_means;
  for (const auto& s : streams) {
    if (s.empty()) continue;
    const std::size_t b = std::min(batches, s.size());
    const std::size_t size = s.size() / b;
    for (std::size_t i = 0; i < b; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < size; ++j) acc += s[i * size + j];
      means.push_back(acc / static_cast<double>(size));
    }
    double acc = 0.0;
    for (double v : s) acc += v;
    replica_means.push_back(acc / static_cast<double>(s.size()));
  }

  const auto spread = [](const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    return v / static_cast<double>(xs.size() - 1);
  };

  if (means.size() > 1) {
    const double var_of_mean = spread(means) / static_cast<double>(means.size());
    est.std_error = std::sqrt(var_of_mean);
    const double naive_of_mean = naive / static_cast<double>(n);
    est.autocorr_hint = naive_of_mean > 0.0 ? var_of_mean / naive_of_mean : 1.0;
  }
  est.replica_error = replica_means.size() > 1
                          ? std::sqrt(spread(replica_means) / static_cast<double>(replica_means.size()))
                          : std::numeric_limits<double>::quiet_NaN();
  return est;
}

Estimate batch_means(std::span<const double> samples, std::size_t batches) {
  return batch_means(std::vector<std::vector<double>>{{samples.begin(), samples.end()}}, batches);
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> sigma) {
  if (x.size() != y.size() || x.size() != sigma.size())
    throw std::invalid_argument("weighted_linear_fit: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("weighted_linear_fit: need two points");
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(sigma[i] > 0.0)) throw std::invalid_argument("weighted_linear_fit: sigma must be > 0");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 0.0)) throw std::invalid_argument("weighted_linear_fit: degenerate abscissae");
  LinearFit fit;
  fit.slope = (s * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  fit.slope_error = std::sqrt(s / det);
  fit.intercept_error = std::sqrt(sxx / det);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (y[i] - fit.intercept - fit.slope * x[i]) / sigma[i];
    fit.chi2 += r * r;
  }
  return fit;
}

}  // namespace z2lab
