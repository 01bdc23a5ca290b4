#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "egonav/geometry.hpp"
#include "egonav/raycast.hpp"
#include "egonav/scene.hpp"
#include "egonav/walker.hpp"

namespace egonav {

struct CorpusConfig {
  std::size_t past_steps = kHorizon;
  std::size_t future_steps = kHorizon;
  std::size_t stride = 10;         // window stride in steps (0.5 s)
  std::size_t frames_per_sample = 32;
  std::size_t frame_stride = 3;    // keyframe spacing in 20 Hz steps
  bool clean_depth = true;
  std::size_t max_walks_per_scene = 0;  // 0: derived from samples_per_scene
  CameraModel camera;
  WalkerConfig walker;
};

/// Past/future windows in the world frame; the egocentric anchor is past.back().
struct DemoSample {
  Trajectory past;
  Trajectory future;
  std::vector<std::shared_ptr<const Frame>> frames;  // oldest first, newest at past.back()
  std::size_t scene_index = 0;
  std::size_t walk_index = 0;
  std::size_t past_start = 0;  // step index of past[0] within the walk

  const Pose6D& anchor() const { return past.back(); }
};

/// Start indices of every window of `window` steps at `stride` within n steps.
std::vector<std::size_t> window_starts(std::size_t n, std::size_t window, std::size_t stride);

/// Walk step indices of the keyframes for a past window ending at step `end`.
std::vector<std::size_t> keyframe_steps(std::size_t end, const CorpusConfig& cfg);

/// One scripted walk with its rendered keyframes and the samples cut from it.
struct WalkRecord {
  std::size_t scene_index = 0;
  std::size_t walk_index = 0;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  std::vector<std::size_t> frame_steps;               // sorted walk steps with a frame
  std::vector<std::shared_ptr<const Frame>> frames;   // parallel to frame_steps
  std::vector<DemoSample> samples;
};

/// Cut samples from a walk, rendering the keyframes they need.
WalkRecord extract_walk(const SceneSpec& scene, const Trajectory& walk, const CorpusConfig& cfg,
                        std::size_t max_samples);

/// Streams walks scene by scene until each scene has `samples_per_scene` samples
/// (or its walk budget runs out). Deterministic in `seed`.
void for_each_walk(const std::vector<SceneSpec>& scenes, std::size_t samples_per_scene,
                   std::uint64_t seed, const CorpusConfig& cfg,
                   const std::function<void(WalkRecord&)>& sink);

std::vector<DemoSample> make_corpus(const std::vector<SceneSpec>& scenes, std::size_t samples_per_scene,
                                    std::uint64_t seed, const CorpusConfig& cfg = {});

// On-disk corpus: <dir>/manifest.json plus, per walk, walk_NNNN/trajectory.txt
// and walk_NNNN/frames.bin (little-endian float32 records).
void write_corpus(const std::string& dir, const std::vector<SceneSpec>& scenes,
                  std::size_t samples_per_scene, std::uint64_t seed, const CorpusConfig& cfg = {});

/// Reads walks back one at a time.
void read_corpus(const std::string& dir, const std::function<void(WalkRecord&)>& sink);

void write_frames(const std::string& path, const std::vector<std::shared_ptr<const Frame>>& frames);
std::vector<std::shared_ptr<const Frame>> read_frames(const std::string& path);

}  // namespace egonav
