#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgbt/bench.hpp"

namespace rgbt::synth {

enum class EventKind { occlusion, crossover, illum_drop, camera_motion };

std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view s);

/// Scripted challenge active on frames [start, end).
struct Event {
  EventKind kind = EventKind::occlusion;
  int start = 0;
  int end = 0;
  double margin = 6.0;        // occlusion: px added around the covered target boxes
  double level = 1.0;         // crossover: 1 = thermal target fully blended into the background
  double gain = 0.08;         // illum_drop: visible-band gain
  double dx = 0.0;            // camera_motion: per-frame translation, px
  double dy = 0.0;
  double rotation_deg = 0.0;  // camera_motion: per-frame rotation about the frame centre
  double scale = 1.0;         // camera_motion: per-frame scale about the frame centre
};

/// From `frame` on, the target moves by (vx, vy) per frame.
struct VelocityChange {
  int frame = 0;
  double vx = 0.0;
  double vy = 0.0;
};

struct Scenario {
  std::string name = "synthetic";
  int frames = 60;
  int width = 320;
  int height = 240;
  Box target{140.0, 100.0, 40.0, 40.0};  // initial box, world coordinates
  double vx = 0.0;                         // target velocity, px/frame
  double vy = 0.0;
  std::vector<VelocityChange> path;        // ascending frames
  std::uint64_t texture_seed = 7;
  double noise_sigma = 0.01;
  std::vector<Event> events;
};

/// Throws RangeError describing the first violated constraint.
void validate(const Scenario& sc);

/// Top-left corner of the target at frame t in world coordinates.
Point target_position(const Scenario& sc, int t);

Scenario scenario_from_json(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& sc);

struct Generated {
  bench::Sequence seq;
  std::vector<Transform2D> camera;  // camera[t] maps frame t-1 coordinates to frame t; camera[0] = identity
  std::vector<int> occluded;        // frames inside occlusion windows
  std::vector<Box> occluders;       // per occlusion event, image coordinates
};

/// Deterministic rendering of the scenario.
Generated generate(const Scenario& sc, std::uint64_t seed);

/// Named scenarios used by tests and the CLI: static, occlusion, crossover,
/// illum, pan, mixed, occlusion_pan. `variant` perturbs positions and velocities.
Scenario preset(const std::string& name, std::uint64_t variant = 0);

/// Writes frames (PNG), ground truth, manifest.json and transforms.json.
/// Returns the manifest path.
std::string write_sequence(const Generated& g, const std::string& dir);

}  // namespace rgbt::synth
