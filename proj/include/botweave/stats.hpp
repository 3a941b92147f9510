#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace botweave {

/// Upper tail P(X >= statistic) for a chi-square variable with `dof` degrees of freedom.
inline double chi_square_sf(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

/// Fixed-edge histogram. Bin i covers [edges[i], edges[i+1]); the last bin is
/// open above so every finite sample lands somewhere.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;

  static Histogram with_edges(std::vector<double> e) {
    Histogram h;
    h.counts.assign(e.empty() ? 0 : e.size() - 1, 0);
    h.edges = std::move(e);
    return h;
  }

  /// Log-spaced bins: [0, 10^lo_exp), then `per_decade` bins per decade up to 10^hi_exp.
  static Histogram log_spaced(int lo_exp, int hi_exp, int per_decade) {
    std::vector<double> e{0.0};
    for (int k = lo_exp * per_decade; k <= hi_exp * per_decade; ++k)
      e.push_back(std::pow(10.0, static_cast<double>(k) / per_decade));
    return with_edges(std::move(e));
  }

  void add(double x) {
    if (counts.empty()) return;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t bin = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
    counts[std::min(bin, counts.size() - 1)] += 1;
  }

  std::uint64_t total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }
};

/// True if the counts rise to a single peak and then fall, treating any dip or
/// rebound smaller than `tolerance_sigma` Poisson standard deviations as noise.
inline bool is_unimodal(std::span<const std::uint64_t> counts, double tolerance_sigma = 3.0) {
  if (counts.empty()) return false;
  const auto peak = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  auto tol = [&](std::uint64_t a, std::uint64_t b) {
    return tolerance_sigma * std::sqrt(static_cast<double>(std::max<std::uint64_t>({a, b, 1})));
  };
  // Rising side: running maximum from the left may only be undercut by noise.
  std::uint64_t run = 0;
  for (std::size_t i = 0; i <= peak; ++i) {
    if (static_cast<double>(run) - static_cast<double>(counts[i]) > tol(run, counts[i])) return false;
    run = std::max(run, counts[i]);
  }
  run = 0;
  for (std::size_t i = counts.size(); i-- > peak;) {
    if (static_cast<double>(run) - static_cast<double>(counts[i]) > tol(run, counts[i])) return false;
    run = std::max(run, counts[i]);
  }
  return true;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  LinearFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

/// Log-log regression of the empirical complementary CDF over the upper
/// `tail_fraction` of positive samples. A power-law tail gives a straight line
/// (slope = -exponent) with R^2 near 1.
inline LinearFit loglog_tail_fit(std::span<const double> values, double tail_fraction) {
  std::vector<double> v;
  for (double x : values)
    if (x > 0) v.push_back(x);
  std::sort(v.begin(), v.end());
  if (v.size() < 4) return {};
  const auto n = v.size();
  const auto start = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - tail_fraction)));
  std::vector<double> lx, ly;
  for (std::size_t i = start; i < n; ++i) {
    if (i + 1 < n && v[i + 1] == v[i]) continue;  // one point per distinct value
    const double ccdf = static_cast<double>(n - i) / static_cast<double>(n);
    lx.push_back(std::log10(v[i]));
    ly.push_back(std::log10(ccdf));
  }
  return least_squares(lx, ly);
}

inline double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace botweave
