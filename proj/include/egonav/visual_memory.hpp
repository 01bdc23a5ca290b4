#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "egonav/geometry.hpp"
#include "egonav/pointcloud.hpp"
#include "egonav/raycast.hpp"

namespace egonav {

inline constexpr int kPanoRows = 180;  // elevation -90..+90, 1 cell per degree
inline constexpr int kPanoCols = 360;  // azimuth -180..+180
inline constexpr int kPanoChannels = 5;  // R G B depth semantic
inline constexpr std::size_t kPanoCells = static_cast<std::size_t>(kPanoRows) * kPanoCols;
inline constexpr double kEdgeThreshold = 0.15;   // metres per pixel step
inline constexpr std::size_t kFrameBufferCapacity = 32;

/// Semantic channel encoding (k + 0.5) / 8 and its nearest-bin decode.
inline float encode_class(SemanticClass c) {
  return (static_cast<float>(c) + 0.5f) / static_cast<float>(kNumClasses);
}
SemanticClass decode_class(float v);

struct PanoCell {
  int row = 0;
  int col = 0;
  bool operator==(const PanoCell&) const = default;
};

/// Cell containing the direction of `p` (anchor frame, p != 0).
PanoCell point_to_cell(const Vec3& p);
/// Point at range `depth` along the cell's lower-corner direction
/// (azimuth col-180, elevation row-90 degrees).
Vec3 cell_to_point(const PanoCell& cell, double depth);

/// Channel-major 5×180×360 grid expressed in the frame of `anchor`.
struct Panorama {
  std::vector<float> data = std::vector<float>(kPanoChannels * kPanoCells, 0.0f);
  Pose6D anchor;

  Panorama();
  float& at(int ch, int row, int col) {
    return data[static_cast<std::size_t>(ch) * kPanoCells + static_cast<std::size_t>(row) * kPanoCols +
                static_cast<std::size_t>(col)];
  }
  float at(int ch, int row, int col) const {
    return data[static_cast<std::size_t>(ch) * kPanoCells + static_cast<std::size_t>(row) * kPanoCols +
                static_cast<std::size_t>(col)];
  }
  bool observed(int row, int col) const { return is_valid_depth(at(3, row, col)); }
  std::size_t observed_count() const;
};

/// Invalidates both cells of every horizontally or vertically adjacent pair of
/// valid pixels whose depth differs by more than `threshold`.
std::vector<float> clean_depth(const std::vector<float>& depth, int height, int width,
                               double threshold = kEdgeThreshold);
void clean_frame(Frame& frame, double threshold = kEdgeThreshold);

/// Rolling buffer of the most recent frames, oldest first.
class FrameBuffer {
 public:
  explicit FrameBuffer(std::size_t capacity = kFrameBufferCapacity) : capacity_(capacity) {}
  void push(std::shared_ptr<const Frame> frame);
  void push(Frame frame) { push(std::make_shared<const Frame>(std::move(frame))); }
  std::size_t size() const { return frames_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return frames_.empty(); }
  void clear() { frames_.clear(); }
  const Frame& operator[](std::size_t i) const { return *frames_[i]; }
  const Frame& newest() const { return *frames_.back(); }
  const std::deque<std::shared_ptr<const Frame>>& frames() const { return frames_; }

 private:
  std::size_t capacity_;
  std::deque<std::shared_ptr<const Frame>> frames_;
};

/// Fuse every valid depth pixel into an anchor-frame panorama with a
/// nearest-range z-buffer; on range ties the newer frame wins. Throws EmptyBuffer.
Panorama build_panorama(const FrameBuffer& buffer, const Pose6D& anchor);

/// One point per observed cell with depth <= max_range, in the anchor frame.
LabeledPointCloud panorama_to_pointcloud(const Panorama& p, double max_range);

// Panorama file: ASCII header "180 360 5\n", then row-major (row, col, channel)
// little-endian float32.
void save_panorama(const std::string& path, const Panorama& p);
Panorama load_panorama(const std::string& path);

enum class PanoView { Rgb, Depth, Semantic };
/// Binary PPM (P6) rendering of one view, row 0 at the top (elevation +90).
void write_panorama_ppm(const std::string& path, const Panorama& p, PanoView view,
                        double max_depth = 8.0);

}  // namespace egonav
