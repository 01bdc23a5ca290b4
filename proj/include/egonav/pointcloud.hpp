#pragma once

#include <vector>

#include "egonav/geometry.hpp"
#include "egonav/semantics.hpp"

namespace egonav {

/// Points with parallel class labels, expressed in the frame the producer states.
struct LabeledPointCloud {
  std::vector<Vec3> points;
  std::vector<SemanticClass> classes;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  void push_back(const Vec3& p, SemanticClass c) {
    points.push_back(p);
    classes.push_back(c);
  }
  /// Subset whose class satisfies is_static_class.
  LabeledPointCloud static_subset() const {
    LabeledPointCloud out;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (is_static_class(classes[i])) out.push_back(points[i], classes[i]);
    }
    return out;
  }
};

}  // namespace egonav
