#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "floodprio/hexgrid.hpp"
#include "floodprio/risk_network.hpp"

namespace floodprio {

// Criticality weights of the risk states. Must be non-decreasing.
struct WeightVector {
  double none = 0.0;
  double low = 0.33;
  double medium = 0.66;
  double high = 1.0;

  std::array<double, 4> as_array() const { return {none, low, medium, high}; }
  void validate() const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

WeightVector parse_weights(std::string_view text);
std::string format_weights(const WeightVector& w);

// Ordered by criticality: Safe < Exposed < Priority < HighPriority.
enum class PriorityCategory { Safe = 0, Exposed = 1, Priority = 2, HighPriority = 3 };

std::string_view to_string(PriorityCategory c);

// Probability distribution criticality: sum_i w_i * P(s_i).
double pdc(const RiskPosterior& posterior, const WeightVector& w);

inline constexpr double kSafeEpsilon = 1e-12;
inline constexpr std::size_t kDefaultClusters = 3;
inline constexpr std::size_t kMaxLloydIterations = 1000;

struct Categorization {
  std::vector<PriorityCategory> categories;
  std::vector<int> cluster;        // 0 = most critical, -1 = Safe
  std::vector<double> centroids;   // descending, one per non-empty cluster
  std::size_t clusters = kDefaultClusters;
  std::string method;
};

// Tiles with pdc - floor <= kSafeEpsilon are Safe (floor is w_none, i.e.
// the score of an all-None posterior). The rest are split into k clusters by
// optimal one-dimensional k-means followed by Lloyd passes, so that every
// value sits with its nearest centroid and ties go to the more critical
// cluster. Cluster rank 0 is HighPriority, rank k-1 is Exposed and ranks in
// between are Priority. With fewer than k distinct values each distinct
// value gets its own rank, highest first.
Categorization categorize(std::span<const double> pdcs, std::size_t k = kDefaultClusters,
                          double floor = 0.0);

PriorityCategory category_for_rank(std::size_t rank, std::size_t k);

// Lower cluster boundaries of the minimum within-cluster sum of squares
// partition of an ascending sample into k contiguous groups
// (divide-and-conquer dynamic programme). Requires 1 <= k <= sorted.size().
std::vector<std::size_t> optimal_partition_1d(std::span<const double> sorted, std::size_t k);

struct LloydResult {
  std::vector<std::size_t> assignment;  // index into centroids
  std::vector<double> centroids;        // ascending
  std::size_t iterations = 0;
};

// Lloyd iterations from the given ascending centroids until the assignment
// stops changing. Ties go to the higher centroid; empty clusters keep their
// centroid.
LloydResult lloyd_1d(std::span<const double> values, std::vector<double> centroids,
                     std::size_t max_iterations = kMaxLloydIterations);

// Values at the (2j+1)/(2k) quantiles of an ascending sample.
std::vector<double> quantile_init(std::span<const double> sorted, std::size_t k);

struct TilePosterior {
  TileId tile;
  RiskPosterior posterior;
};

struct TilePriority {
  TileId tile;
  RiskPosterior posterior;
  double pdc = 0.0;
  PriorityCategory category = PriorityCategory::Safe;
  int cluster = -1;
};

struct PriorityMap {
  std::vector<TilePriority> tiles;  // indexed by tile id
  std::vector<double> centroids;
  WeightVector weights;
  std::size_t clusters = kDefaultClusters;
  std::string method;

  // Indexed by PriorityCategory.
  std::array<std::size_t, 4> counts() const;
};

PriorityMap build_priority_map(const HexGrid& grid, std::span<const TilePosterior> posteriors,
                               const WeightVector& w, std::size_t k = kDefaultClusters);

}  // namespace floodprio
