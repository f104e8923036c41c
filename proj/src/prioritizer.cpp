#include "floodprio/prioritizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "floodprio/error.hpp"
#include "floodprio/text_format.hpp"

namespace floodprio {

void WeightVector::validate() const {
  const auto w = as_array();
  for (const double v : w) {
    if (!std::isfinite(v)) fail_validation("weights must be finite");
  }
  if (!(w[0] <= w[1] && w[1] <= w[2] && w[2] <= w[3])) {
    fail_validation("weights must be non-decreasing (none <= low <= medium <= high), got " +
                    format_weights(*this));
  }
  if (!(w[3] > w[0])) fail_validation("weight of High must exceed weight of None");
}

WeightVector parse_weights(std::string_view text) {
  const std::vector<double> v = parse_number_list(text, "weights");
  if (v.size() != 4) fail_validation("weights: expected 4 numbers (none, low, medium, high)");
  WeightVector w{v[0], v[1], v[2], v[3]};
  w.validate();
  return w;
}

std::string format_weights(const WeightVector& w) {
  const auto a = w.as_array();
  return format_number(a[0]) + "," + format_number(a[1]) + "," + format_number(a[2]) + "," +
         format_number(a[3]);
}

std::string_view to_string(PriorityCategory c) {
  switch (c) {
    case PriorityCategory::Safe:
      return "Safe";
    case PriorityCategory::Exposed:
      return "Exposed";
    case PriorityCategory::Priority:
      return "Priority";
    case PriorityCategory::HighPriority:
      return "HighPriority";
  }
  return "Safe";
}

double pdc(const RiskPosterior& posterior, const WeightVector& w) {
  return w.none * posterior[0] + w.low * posterior[1] + w.medium * posterior[2] +
         w.high * posterior[3];
}

PriorityCategory category_for_rank(std::size_t rank, std::size_t k) {
  if (rank == 0) return PriorityCategory::HighPriority;
  if (rank + 1 >= k) return PriorityCategory::Exposed;
  return PriorityCategory::Priority;
}

std::vector<std::size_t> optimal_partition_1d(std::span<const double> sorted, std::size_t k) {
  const std::size_t n = sorted.size();
  if (k == 0 || k > n) fail_validation("optimal_partition_1d needs 1 <= k <= n");

  // Shift by the mean so the prefix-sum cost formula does not cancel badly.
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  std::vector<double> s(n + 1, 0.0);
  std::vector<double> q(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = sorted[i] - mean;
    s[i + 1] = s[i] + x;
    q[i + 1] = q[i] + x * x;
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    const double sum = s[j] - s[i];
    return std::max(0.0, (q[j] - q[i]) - sum * sum / static_cast<double>(j - i));
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(n + 1, kInf);
  std::vector<double> cur(n + 1, kInf);
  for (std::size_t j = 1; j <= n; ++j) prev[j] = cost(0, j);
  // split[m][j]: start of the last group when j values form m+1 groups.
  std::vector<std::vector<std::size_t>> split(k, std::vector<std::size_t>(n + 1, 0));

  for (std::size_t m = 1; m < k; ++m) {
    std::fill(cur.begin(), cur.end(), kInf);
    // Optimal split points are monotone in j, which licenses divide and conquer.
    auto solve = [&](auto&& self, std::size_t jl, std::size_t jr, std::size_t ol,
                     std::size_t orr) -> void {
      if (jl > jr) return;
      const std::size_t mid = jl + (jr - jl) / 2;
      std::size_t best_i = std::max(ol, m);
      double best = kInf;
      const std::size_t hi = std::min(orr, mid - 1);
      for (std::size_t i = std::max(ol, m); i <= hi; ++i) {
        const double v = prev[i] + cost(i, mid);
        if (v < best) {
          best = v;
          best_i = i;
        }
      }
      cur[mid] = best;
      split[m][mid] = best_i;
      if (mid > jl) self(self, jl, mid - 1, ol, best_i);
      self(self, mid + 1, jr, best_i, orr);
    };
    solve(solve, m + 1, n, m, n - 1);
    std::swap(prev, cur);
  }

  std::vector<std::size_t> starts(k, 0);
  std::size_t j = n;
  for (std::size_t m = k; m-- > 1;) {
    starts[m] = split[m][j];
    j = starts[m];
  }
  return starts;
}

LloydResult lloyd_1d(std::span<const double> values, std::vector<double> centroids,
                     std::size_t max_iterations) {
  LloydResult out;
  out.centroids = std::move(centroids);
  const std::size_t k = out.centroids.size();
  out.assignment.assign(values.size(), 0);
  std::vector<std::size_t> next(values.size(), 0);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = std::abs(values[i] - out.centroids[c]);
        if (d < best_d || (d == best_d && out.centroids[c] >= out.centroids[best])) {
          best_d = d;
          best = c;
        }
      }
      next[i] = best;
    }
    out.iterations = it + 1;
    const bool stable = it > 0 && next == out.assignment;
    out.assignment = next;
    if (stable) break;
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      sum[out.assignment[i]] += values[i];
      ++count[out.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) out.centroids[c] = sum[c] / static_cast<double>(count[c]);
    }
  }
  return out;
}

std::vector<double> quantile_init(std::span<const double> sorted, std::size_t k) {
  std::vector<double> out;
  const std::size_t n = sorted.size();
  for (std::size_t j = 0; j < k; ++j) {
    const double level = (2.0 * static_cast<double>(j) + 1.0) / (2.0 * static_cast<double>(k));
    const auto idx = static_cast<std::size_t>(std::floor(level * static_cast<double>(n)));
    out.push_back(sorted[std::min(idx, n - 1)]);
  }
  return out;
}

Categorization categorize(std::span<const double> pdcs, std::size_t k, double floor) {
  if (k == 0) fail_validation("cluster count must be at least 1");
  Categorization out;
  out.clusters = k;
  out.categories.assign(pdcs.size(), PriorityCategory::Safe);
  out.cluster.assign(pdcs.size(), -1);

  std::vector<std::size_t> active;
  std::vector<double> values;
  for (std::size_t i = 0; i < pdcs.size(); ++i) {
    if (pdcs[i] - floor > kSafeEpsilon) {
      active.push_back(i);
      values.push_back(pdcs[i]);
    }
  }
  if (active.empty()) {
    out.method = "all-safe";
    return out;
  }

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  if (distinct.size() < k) {
    out.method = "distinct-rank";
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto pos = std::lower_bound(distinct.begin(), distinct.end(), values[a]);
      const std::size_t rank = distinct.size() - 1 - static_cast<std::size_t>(pos - distinct.begin());
      out.cluster[active[a]] = static_cast<int>(rank);
      out.categories[active[a]] = category_for_rank(rank, k);
    }
    out.centroids.assign(distinct.rbegin(), distinct.rend());
    return out;
  }

  const std::vector<std::size_t> starts = optimal_partition_1d(sorted, k);
  std::vector<double> centroids;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t lo = starts[c];
    const std::size_t hi = c + 1 < k ? starts[c + 1] : sorted.size();
    centroids.push_back(std::accumulate(sorted.begin() + static_cast<long>(lo),
                                        sorted.begin() + static_cast<long>(hi), 0.0) /
                        static_cast<double>(hi - lo));
  }
  const LloydResult lloyd = lloyd_1d(values, std::move(centroids));
  out.method = "optimal-1d-kmeans";
  for (std::size_t a = 0; a < active.size(); ++a) {
    const std::size_t rank = k - 1 - lloyd.assignment[a];
    out.cluster[active[a]] = static_cast<int>(rank);
    out.categories[active[a]] = category_for_rank(rank, k);
  }
  out.centroids.assign(lloyd.centroids.rbegin(), lloyd.centroids.rend());
  return out;
}

std::array<std::size_t, 4> PriorityMap::counts() const {
  std::array<std::size_t, 4> c{};
  for (const TilePriority& t : tiles) ++c[static_cast<std::size_t>(t.category)];
  return c;
}

PriorityMap build_priority_map(const HexGrid& grid, std::span<const TilePosterior> posteriors,
                               const WeightVector& w, std::size_t k) {
  w.validate();
  std::vector<const TilePosterior*> by_tile(grid.size(), nullptr);
  for (const TilePosterior& tp : posteriors) {
    grid.tile(tp.tile);
    if (by_tile[tp.tile.value]) {
      fail_validation("duplicate posterior for tile " + to_string(tp.tile));
    }
    by_tile[tp.tile.value] = &tp;
  }

  PriorityMap map;
  map.weights = w;
  map.clusters = k;
  std::vector<double> scores;
  scores.reserve(grid.size());
  for (const Tile& t : grid.tiles()) {
    const TilePosterior* tp = by_tile[t.id.value];
    if (!tp) fail_validation("missing posterior for tile " + to_string(t.id));
    const double score = pdc(tp->posterior, w);
    scores.push_back(score);
    map.tiles.push_back({t.id, tp->posterior, score, PriorityCategory::Safe, -1});
  }

  const Categorization cat = categorize(scores, k, w.none);
  for (std::size_t i = 0; i < map.tiles.size(); ++i) {
    map.tiles[i].category = cat.categories[i];
    map.tiles[i].cluster = cat.cluster[i];
  }
  map.centroids = cat.centroids;
  map.method = cat.method;
  return map;
}

}  // namespace floodprio
