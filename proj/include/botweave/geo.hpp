#pragma once

// Geospatial analysis: 1x1 degree tweet binning, low-density rectangle
// discovery, chi-square uniformity, rectangle split counts and per-user
// mobility (mean distance between consecutive geotagged tweets).

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "botweave/data_model.hpp"
#include "botweave/errors.hpp"
#include "botweave/stats.hpp"

namespace botweave {

inline constexpr double kEarthRadiusKm = 6371.0;

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Great-circle distance on a sphere of mean Earth radius.
inline double haversine_km(GeoPoint a, GeoPoint b) {
  const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = deg2rad(b.lon - a.lon);
  const double s1 = std::sin(dphi / 2), s2 = std::sin(dlambda / 2);
  const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

/// Point reached from `start` after travelling `distance_km` along the great
/// circle with initial bearing `bearing_rad` (clockwise from north).
inline GeoPoint destination_point(GeoPoint start, double bearing_rad, double distance_km) {
  const double delta = distance_km / kEarthRadiusKm;
  const double phi1 = deg2rad(start.lat), lambda1 = deg2rad(start.lon);
  const double sin_phi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(bearing_rad);
  const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
  const double lambda2 = lambda1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(phi1),
                                              std::cos(delta) - std::sin(phi1) * sin_phi2);
  double lon = std::fmod(rad2deg(lambda2) + 540.0, 360.0) - 180.0;
  if (lon >= 180.0) lon -= 360.0;
  return {std::clamp(rad2deg(phi2), -90.0, 90.0), lon};
}

// ---------------------------------------------------------------------------
// Grid

struct CellKey {
  int lat = 0;  // floor(latitude), 90 folds into 89
  int lon = 0;  // floor(longitude)

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

inline CellKey cell_of(GeoPoint p) {
  int lat = static_cast<int>(std::floor(p.lat));
  int lon = static_cast<int>(std::floor(p.lon));
  return {std::min(lat, 89), std::clamp(lon, -180, 179)};
}

class GeoGrid {
 public:
  void add(GeoPoint p, std::uint64_t n = 1) { add(cell_of(p), n); }
  void add(CellKey k, std::uint64_t n = 1) {
    if (n == 0) return;
    counts_[k] += n;
    total_ += n;
  }
  void merge(const GeoGrid& other) {
    for (const auto& [k, n] : other.counts_) add(k, n);
  }
  std::uint64_t count(CellKey k) const {
    auto it = counts_.find(k);
    return it == counts_.end() ? 0 : it->second;
  }
  const std::map<CellKey, std::uint64_t>& cells() const { return counts_; }
  std::uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }
  std::uint64_t max_count() const {
    std::uint64_t m = 0;
    for (const auto& [k, n] : counts_) m = std::max(m, n);
    return m;
  }

 private:
  std::map<CellKey, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// One increment per geotagged tweet; untagged tweets are ignored.
inline GeoGrid bin_tweets(std::span<const UserRecord> users) {
  GeoGrid g;
  for (const UserRecord& u : users)
    for (const Tweet& t : u.tweets)
      if (t.geo) g.add(*t.geo);
  return g;
}

// ---------------------------------------------------------------------------
// Mobility

struct UserDistance {
  UserId id = 0;
  double mean_km = 0.0;
  std::size_t pairs = 0;
  Label population = Label::unknown;
};

struct DistanceStats {
  std::vector<UserDistance> per_user;  // ascending user id
  Histogram bots;
  Histogram reals;

  std::vector<double> means(Label population) const {
    std::vector<double> v;
    for (const auto& d : per_user)
      if (d.population == population) v.push_back(d.mean_km);
    return v;
  }
};

using PopulationFn = std::function<Label(const UserRecord&)>;

inline Label population_by_label(const UserRecord& u) { return u.label.value_or(Label::unknown); }

/// Distance histogram bins: [0, 0.1 km) and then ten log bins per decade to 10^4.5 km.
inline Histogram default_distance_histogram() { return Histogram::log_spaced(-1, 5, 10); }

/// Mean Haversine distance between consecutive geotagged tweets (timestamp
/// order) for every user with at least two geotags, histogrammed per population.
inline DistanceStats consecutive_distance_stats(std::span<const UserRecord> users,
                                                const PopulationFn& population = population_by_label,
                                                const Histogram& bins = default_distance_histogram()) {
  DistanceStats out;
  out.bots = bins;
  out.reals = bins;
  for (const UserRecord& u : users) {
    std::optional<GeoPoint> prev;
    double sum = 0.0;
    std::size_t pairs = 0;
    for (const Tweet& t : u.tweets) {
      if (!t.geo) continue;
      if (prev) {
        sum += haversine_km(*prev, *t.geo);
        ++pairs;
      }
      prev = t.geo;
    }
    if (pairs == 0) continue;
    UserDistance d{u.id, sum / static_cast<double>(pairs), pairs, population(u)};
    if (d.population == Label::bot) out.bots.add(d.mean_km);
    if (d.population == Label::real) out.reals.add(d.mean_km);
    out.per_user.push_back(d);
  }
  std::sort(out.per_user.begin(), out.per_user.end(),
            [](const UserDistance& a, const UserDistance& b) { return a.id < b.id; });
  return out;
}

// ---------------------------------------------------------------------------
// Rectangle discovery

struct AnomalyRegion {
  GeoRect bounds;            // cell-aligned
  std::size_t n_cells = 0;   // anomalous cells in the component
  double fill_ratio = 0.0;   // anomalous / uninhabited cells inside bounds
  double mean_count = 0.0;   // tweets per anomalous cell
  std::vector<CellKey> cells;
};

struct DetectOptions {
  std::uint64_t band_lo = 1;
  std::uint64_t band_hi = 9;
  std::size_t min_cells = 100;
  double min_fill = 0.8;
  /// A baseline cell counts as inhabited when its count exceeds this share of
  /// the baseline's busiest cell; 0 means any baseline tweet marks it inhabited.
  double baseline_rel_threshold = 0.0;
};

namespace detail {

inline bool inhabited(const GeoGrid* baseline, CellKey k, std::uint64_t baseline_max, double rel) {
  if (!baseline) return false;
  const std::uint64_t b = baseline->count(k);
  return b > 0 && static_cast<double>(b) > rel * static_cast<double>(baseline_max);
}

}  // namespace detail

/// Flags cells whose count lies in the low band and that the baseline leaves
/// uninhabited, joins them by 4-neighbour adjacency, and keeps components that
/// are large and solidly filled. Largest regions first.
inline std::vector<AnomalyRegion> detect_rectangles(const GeoGrid& grid, const GeoGrid* baseline = nullptr,
                                                    const DetectOptions& opts = {}) {
  std::vector<AnomalyRegion> regions;
  if (grid.empty()) return regions;
  const std::uint64_t baseline_max = baseline ? baseline->max_count() : 0;

  std::set<CellKey> flagged;
  for (const auto& [k, n] : grid.cells())
    if (n >= opts.band_lo && n <= opts.band_hi &&
        !detail::inhabited(baseline, k, baseline_max, opts.baseline_rel_threshold))
      flagged.insert(k);

  std::set<CellKey> visited;
  for (const CellKey& seed : flagged) {
    if (visited.contains(seed)) continue;
    AnomalyRegion r;
    std::queue<CellKey> frontier;
    frontier.push(seed);
    visited.insert(seed);
    int lat_lo = seed.lat, lat_hi = seed.lat, lon_lo = seed.lon, lon_hi = seed.lon;
    std::uint64_t tweets = 0;
    while (!frontier.empty()) {
      const CellKey c = frontier.front();
      frontier.pop();
      r.cells.push_back(c);
      tweets += grid.count(c);
      lat_lo = std::min(lat_lo, c.lat);
      lat_hi = std::max(lat_hi, c.lat);
      lon_lo = std::min(lon_lo, c.lon);
      lon_hi = std::max(lon_hi, c.lon);
      for (CellKey nb : {CellKey{c.lat + 1, c.lon}, CellKey{c.lat - 1, c.lon}, CellKey{c.lat, c.lon + 1},
                         CellKey{c.lat, c.lon - 1}}) {
        if (flagged.contains(nb) && visited.insert(nb).second) frontier.push(nb);
      }
    }
    r.n_cells = r.cells.size();
    if (r.n_cells < opts.min_cells) continue;
    std::sort(r.cells.begin(), r.cells.end());
    std::size_t open_cells = 0;
    for (int la = lat_lo; la <= lat_hi; ++la)
      for (int lo = lon_lo; lo <= lon_hi; ++lo)
        if (!detail::inhabited(baseline, {la, lo}, baseline_max, opts.baseline_rel_threshold)) ++open_cells;
    r.bounds = {static_cast<double>(lat_lo), static_cast<double>(lat_hi + 1), static_cast<double>(lon_lo),
                static_cast<double>(lon_hi + 1)};
    r.fill_ratio = open_cells == 0 ? 0.0 : static_cast<double>(r.n_cells) / static_cast<double>(open_cells);
    r.mean_count = static_cast<double>(tweets) / static_cast<double>(r.n_cells);
    if (r.fill_ratio < opts.min_fill) continue;
    regions.push_back(std::move(r));
  }
  std::sort(regions.begin(), regions.end(), [](const AnomalyRegion& a, const AnomalyRegion& b) {
    if (a.n_cells != b.n_cells) return a.n_cells > b.n_cells;
    return a.cells.front() < b.cells.front();
  });
  return regions;
}

// ---------------------------------------------------------------------------
// Uniformity

struct UniformityResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t cells = 0;
  std::uint64_t tweets = 0;
  double expected_per_cell = 0.0;
};

inline constexpr double kMinExpectedPerCell = 5.0;

/// Cells lying entirely inside `rect`.
inline std::vector<CellKey> cells_within(const GeoRect& rect) {
  std::vector<CellKey> out;
  const int la0 = static_cast<int>(std::ceil(rect.lat_min)), la1 = static_cast<int>(std::floor(rect.lat_max));
  const int lo0 = static_cast<int>(std::ceil(rect.lon_min)), lo1 = static_cast<int>(std::floor(rect.lon_max));
  for (int la = la0; la < la1; ++la)
    for (int lo = lo0; lo < lo1; ++lo) out.push_back({la, lo});
  return out;
}

/// Chi-square goodness of fit of per-cell counts against the uniform
/// multinomial over the cells fully inside `rect`.
inline UniformityResult uniformity_test(const GeoGrid& grid, const GeoRect& rect) {
  const auto cells = cells_within(rect);
  UniformityResult r;
  r.cells = cells.size();
  for (const CellKey& c : cells) r.tweets += grid.count(c);
  if (r.cells < 2) throw PreconditionError("uniformity test needs at least 2 cells inside the rectangle");
  r.expected_per_cell = static_cast<double>(r.tweets) / static_cast<double>(r.cells);
  if (r.expected_per_cell < kMinExpectedPerCell)
    throw PreconditionError("uniformity test: expected count per cell " + std::to_string(r.expected_per_cell) +
                            " is below the threshold of " + std::to_string(kMinExpectedPerCell));
  for (const CellKey& c : cells) {
    const double d = static_cast<double>(grid.count(c)) - r.expected_per_cell;
    r.statistic += d * d / r.expected_per_cell;
  }
  r.dof = r.cells - 1;
  r.p_value = chi_square_sf(r.statistic, static_cast<double>(r.dof));
  return r;
}

// ---------------------------------------------------------------------------
// Rectangle split

struct RectSplit {
  std::uint64_t in_a = 0;
  std::uint64_t in_b = 0;
  std::uint64_t elsewhere = 0;

  std::uint64_t total() const { return in_a + in_b + elsewhere; }
  friend bool operator==(const RectSplit&, const RectSplit&) = default;
};

inline RectSplit rect_split_stats(std::span<const UserRecord> users, const std::pair<GeoRect, GeoRect>& rects) {
  if (rects.first.overlaps(rects.second)) throw ConfigError("rect_split_stats: rectangles overlap");
  RectSplit s;
  for (const UserRecord& u : users)
    for (const Tweet& t : u.tweets) {
      if (!t.geo) continue;
      if (rects.first.contains(*t.geo))
        ++s.in_a;
      else if (rects.second.contains(*t.geo))
        ++s.in_b;
      else
        ++s.elsewhere;
    }
  return s;
}

}  // namespace botweave
