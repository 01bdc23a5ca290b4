#pragma once

#include <cstdint>
#include <vector>

#include "egonav/geometry.hpp"

namespace egonav {

struct KMeansResult {
  std::vector<Vec3> centers;
  std::vector<int> labels;  // per point, index into centers
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding from `seed`. k is reduced to the
/// number of points farther than `merge_distance` from every earlier seed, so
/// near-duplicate points never split into separate clusters.
KMeansResult kmeans(const std::vector<Vec3>& points, int k, std::uint64_t seed, int max_iters = 50,
                    double merge_distance = 0.1);

}  // namespace egonav
