#include "egonav/visual_memory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

#include "egonav/error.hpp"

namespace egonav {

static_assert(std::endian::native == std::endian::little, "binary formats assume little-endian");

namespace {

constexpr double kRad2Deg = 180.0 / std::numbers::pi;
constexpr double kDeg2Rad = std::numbers::pi / 180.0;
// Absorbs rounding when a direction lies exactly on a cell boundary.
constexpr double kCellEps = 1e-9;

const float kUnobservedClass = encode_class(SemanticClass::Unlabeled);

}  // namespace

SemanticClass decode_class(float v) {
  const int k = std::clamp(static_cast<int>(std::floor(v * kNumClasses)), 0, kNumClasses - 1);
  return static_cast<SemanticClass>(k);
}

PanoCell point_to_cell(const Vec3& p) {
  const double az = std::atan2(p.y(), p.x()) * kRad2Deg;
  const double el = std::atan2(p.z(), std::hypot(p.x(), p.y())) * kRad2Deg;
  int col = static_cast<int>(std::floor(az + kCellEps)) + 180;
  int row = static_cast<int>(std::floor(el + kCellEps)) + 90;
  col = ((col % kPanoCols) + kPanoCols) % kPanoCols;
  row = std::clamp(row, 0, kPanoRows - 1);
  return {row, col};
}

Vec3 cell_to_point(const PanoCell& cell, double depth) {
  const double az = (cell.col - 180) * kDeg2Rad;
  const double el = (cell.row - 90) * kDeg2Rad;
  return depth * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
}

Panorama::Panorama() {
  std::fill(data.begin() + 4 * static_cast<std::ptrdiff_t>(kPanoCells), data.end(), kUnobservedClass);
}

std::size_t Panorama::observed_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kPanoCells; ++i) n += is_valid_depth(data[3 * kPanoCells + i]) ? 1 : 0;
  return n;
}

std::vector<float> clean_depth(const std::vector<float>& depth, int height, int width,
                               double threshold) {
  if (depth.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw ShapeMismatch("depth image size does not match height*width");
  }
  std::vector<char> drop(depth.size(), 0);
  const auto idx = [width](int r, int c) {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c);
  };
  const auto check = [&](std::size_t a, std::size_t b) {
    if (!is_valid_depth(depth[a]) || !is_valid_depth(depth[b])) return;
    if (std::abs(depth[a] - depth[b]) > threshold) drop[a] = drop[b] = 1;
  };
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (c + 1 < width) check(idx(r, c), idx(r, c + 1));
      if (r + 1 < height) check(idx(r, c), idx(r + 1, c));
    }
  }
  std::vector<float> out = depth;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (drop[i]) out[i] = kInvalidDepth;
  }
  return out;
}

void clean_frame(Frame& frame, double threshold) {
  frame.depth = clean_depth(frame.depth, frame.camera.height, frame.camera.width, threshold);
  for (std::size_t i = 0; i < frame.depth.size(); ++i) {
    if (!is_valid_depth(frame.depth[i])) frame.semantic[i] = SemanticClass::Unlabeled;
  }
}

void FrameBuffer::push(std::shared_ptr<const Frame> frame) {
  frames_.push_back(std::move(frame));
  while (frames_.size() > capacity_) frames_.pop_front();
}

Panorama build_panorama(const FrameBuffer& buffer, const Pose6D& anchor) {
  if (buffer.empty()) throw EmptyBuffer("cannot build a panorama from an empty frame buffer");
  Panorama pano;
  pano.anchor = anchor;
  float* red = pano.data.data();
  float* green = red + kPanoCells;
  float* blue = green + kPanoCells;
  float* range = blue + kPanoCells;
  float* sem = range + kPanoCells;

  std::vector<Vec3> dirs;
  CameraModel dirs_for{};
  bool have_dirs = false;
  for (const auto& fp : buffer.frames()) {
    const Frame& f = *fp;
    const auto& cam = f.camera;
    if (!have_dirs || cam.width != dirs_for.width || cam.height != dirs_for.height ||
        cam.hfov_deg != dirs_for.hfov_deg || cam.vfov_deg != dirs_for.vfov_deg) {
      dirs = cam.ray_directions();
      dirs_for = cam;
      have_dirs = true;
    }
    const Mat3 rot = anchor.rotation.transpose() * f.pose.rotation;
    const Vec3 trans = anchor.rotation.transpose() * (f.pose.position - anchor.position);
    for (std::size_t i = 0; i < f.depth.size(); ++i) {
      const float d = f.depth[i];
      if (!is_valid_depth(d)) continue;
      const Vec3 p = rot * (static_cast<double>(d) * dirs[i]) + trans;
      const double r = p.norm();
      if (r <= 0.0) continue;
      const PanoCell cell = point_to_cell(p);
      const std::size_t k = static_cast<std::size_t>(cell.row) * kPanoCols + static_cast<std::size_t>(cell.col);
      const float rf = static_cast<float>(r);
      if (is_valid_depth(range[k]) && rf > range[k]) continue;
      range[k] = rf;
      red[k] = f.color[3 * i];
      green[k] = f.color[3 * i + 1];
      blue[k] = f.color[3 * i + 2];
      sem[k] = encode_class(f.semantic[i]);
    }
  }
  return pano;
}

LabeledPointCloud panorama_to_pointcloud(const Panorama& p, double max_range) {
  LabeledPointCloud cloud;
  for (int r = 0; r < kPanoRows; ++r) {
    for (int c = 0; c < kPanoCols; ++c) {
      const float d = p.at(3, r, c);
      if (!is_valid_depth(d) || d > max_range) continue;
      cloud.push_back(cell_to_point({r, c}, d), decode_class(p.at(4, r, c)));
    }
  }
  return cloud;
}

void save_panorama(const std::string& path, const Panorama& p) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << kPanoRows << ' ' << kPanoCols << ' ' << kPanoChannels << '\n';
  std::vector<float> interleaved(p.data.size());
  for (std::size_t cell = 0; cell < kPanoCells; ++cell) {
    for (std::size_t ch = 0; ch < kPanoChannels; ++ch) {
      interleaved[cell * kPanoChannels + ch] = p.data[ch * kPanoCells + cell];
    }
  }
  os.write(reinterpret_cast<const char*>(interleaved.data()),
           static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
  if (!os) throw IoFailure("write failed: " + path);
}

Panorama load_panorama(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open " + path);
  int rows = 0, cols = 0, chans = 0;
  if (!(is >> rows >> cols >> chans) || is.get() != '\n') {
    throw ParseError("panorama header must be \"180 360 5\"");
  }
  if (rows != kPanoRows || cols != kPanoCols || chans != kPanoChannels) {
    throw ShapeMismatch("panorama shape " + std::to_string(rows) + "x" + std::to_string(cols) + "x" +
                        std::to_string(chans));
  }
  std::vector<float> interleaved(kPanoCells * kPanoChannels);
  is.read(reinterpret_cast<char*>(interleaved.data()),
          static_cast<std::streamsize>(interleaved.size() * sizeof(float)));
  if (!is) throw ParseError("truncated panorama file: " + path);
  Panorama p;
  for (std::size_t cell = 0; cell < kPanoCells; ++cell) {
    for (std::size_t ch = 0; ch < kPanoChannels; ++ch) {
      p.data[ch * kPanoCells + cell] = interleaved[cell * kPanoChannels + ch];
    }
  }
  return p;
}

void write_panorama_ppm(const std::string& path, const Panorama& p, PanoView view, double max_depth) {
  static const float palette[kNumClasses][3] = {
      {0.55f, 0.50f, 0.45f}, {0.80f, 0.60f, 0.20f}, {0.60f, 0.30f, 0.15f}, {0.85f, 0.85f, 0.80f},
      {0.25f, 0.45f, 0.70f}, {0.80f, 0.20f, 0.25f}, {0.35f, 0.45f, 0.25f}, {0.0f, 0.0f, 0.0f}};
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << "P6\n" << kPanoCols << ' ' << kPanoRows << "\n255\n";
  const auto byte = [](float v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  };
  std::vector<unsigned char> px;
  px.reserve(kPanoCells * 3);
  for (int r = kPanoRows - 1; r >= 0; --r) {
    for (int c = 0; c < kPanoCols; ++c) {
      float rgb[3] = {0.0f, 0.0f, 0.0f};
      if (p.observed(r, c)) {
        switch (view) {
          case PanoView::Rgb:
            for (int k = 0; k < 3; ++k) rgb[k] = p.at(k, r, c);
            break;
          case PanoView::Depth: {
            const float v = 1.0f - static_cast<float>(p.at(3, r, c) / max_depth);
            rgb[0] = rgb[1] = rgb[2] = v;
            break;
          }
          case PanoView::Semantic: {
            const auto k = static_cast<std::size_t>(decode_class(p.at(4, r, c)));
            for (int j = 0; j < 3; ++j) rgb[j] = palette[k][j];
            break;
          }
        }
      }
      for (float v : rgb) px.push_back(byte(v));
    }
  }
  os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!os) throw IoFailure("write failed: " + path);
}

}  // namespace egonav
