#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "egonav/geometry.hpp"

namespace egonav {

/// Static 3D KD-tree over an index array arranged in place (median splits).
class KdTree {
 public:
  struct Neighbor {
    double dist2;
    std::size_t index;
    bool operator<(const Neighbor& o) const {
      return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index);
    }
  };

  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!points_.empty()) build(0, order_.size(), 0);
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// The k nearest points, ascending by (squared distance, index).
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const {
    std::priority_queue<Neighbor> heap;  // max-heap of the current best k
    if (k > 0 && !points_.empty()) search(q, k, 0, order_.size(), 0, heap);
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
      out.push_back(heap.top());
      heap.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  static double dist2(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
  }

 private:
  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void search(const Vec3& q, std::size_t k, std::size_t lo, std::size_t hi, int axis,
              std::priority_queue<Neighbor>& heap) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t idx = order_[mid];
    const Neighbor cand{dist2(q, points_[idx]), idx};
    if (heap.size() < k) {
      heap.push(cand);
    } else if (cand < heap.top()) {
      heap.pop();
      heap.push(cand);
    }
    const double diff = q[axis] - points_[idx][axis];
    const int next = (axis + 1) % 3;
    const bool left_first = diff < 0.0;
    if (left_first) {
      search(q, k, lo, mid, next, heap);
    } else {
      search(q, k, mid + 1, hi, next, heap);
    }
    // The far side can still hold a point at equal distance, so visit on ties too.
    if (heap.size() < k || diff * diff <= heap.top().dist2) {
      if (left_first) {
        search(q, k, mid + 1, hi, next, heap);
      } else {
        search(q, k, lo, mid, next, heap);
      }
    }
  }

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
};

}  // namespace egonav
