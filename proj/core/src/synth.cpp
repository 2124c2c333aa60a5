#include "rgbt/synth.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "rgbt/error.hpp"
#include "rgbt/rng.hpp"

namespace rgbt::synth {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::occlusion: return "occlusion";
    case EventKind::crossover: return "crossover";
    case EventKind::illum_drop: return "illum_drop";
    case EventKind::camera_motion: return "camera_motion";
  }
  return "unknown";
}

EventKind parse_event_kind(std::string_view s) {
  for (EventKind k : {EventKind::occlusion, EventKind::crossover, EventKind::illum_drop, EventKind::camera_motion}) {
    if (to_string(k) == s) return k;
  }
  throw RangeError("unknown event kind '" + std::string(s) + "'");
}

namespace {

bool active(const Event& e, int t) { return t >= e.start && t < e.end; }

Transform2D increment(const Event& e, int width, int height) {
  const double cx = 0.5 * width, cy = 0.5 * height;
  const double a = e.rotation_deg * std::numbers::pi / 180.0;
  const Transform2D about = Transform2D::translation(cx, cy) * Transform2D::similarity(e.scale, a, 0.0, 0.0) *
                            Transform2D::translation(-cx, -cy);
  return Transform2D::translation(e.dx, e.dy) * about;
}

// Camera transforms and ground truth in image coordinates.
struct Track {
  std::vector<Transform2D> inc;
  std::vector<Transform2D> cum;
  std::vector<Box> gt;
};

Track plan(const Scenario& sc) {
  Track tr;
  Transform2D c = Transform2D::identity(MotionModel::similarity);
  for (int t = 0; t < sc.frames; ++t) {
    Transform2D inc = Transform2D::identity(MotionModel::similarity);
    if (t > 0) {
      for (const auto& e : sc.events) {
        if (e.kind == EventKind::camera_motion && active(e, t)) inc = increment(e, sc.width, sc.height) * inc;
      }
    }
    c = inc * c;
    tr.inc.push_back(inc);
    tr.cum.push_back(c);
    const Eigen::Matrix2d lin = c.matrix().topLeftCorner<2, 2>();
    const double s = std::sqrt(std::abs(lin.determinant()));
    const Point tl = target_position(sc, t);
    const Point wc{tl.x + 0.5 * sc.target.w, tl.y + 0.5 * sc.target.h};
    tr.gt.push_back(Box::from_center(c.apply(wc), sc.target.w * s, sc.target.h * s));
  }
  return tr;
}

Box occluder_box(const Scenario& sc, const Event& e, const std::vector<Box>& gt) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (int t = e.start; t < e.end; ++t) {
    const Box& b = gt[static_cast<std::size_t>(t)];
    x0 = std::min(x0, b.x);
    y0 = std::min(y0, b.y);
    x1 = std::max(x1, b.x + b.w);
    y1 = std::max(y1, b.y + b.h);
  }
  x0 = std::max(0.0, std::floor(x0 - e.margin));
  y0 = std::max(0.0, std::floor(y0 - e.margin));
  x1 = std::min(static_cast<double>(sc.width), std::ceil(x1 + e.margin));
  y1 = std::min(static_cast<double>(sc.height), std::ceil(y1 + e.margin));
  return {x0, y0, x1 - x0, y1 - y0};
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  const std::uint64_t h = mix(mix(seed, static_cast<std::uint64_t>(ix)), static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(double x, double y, double cell, std::uint64_t seed) {
  const double gx = x / cell, gy = y / cell;
  const double fx0 = std::floor(gx), fy0 = std::floor(gy);
  const auto ix = static_cast<std::int64_t>(fx0), iy = static_cast<std::int64_t>(fy0);
  auto smooth = [](double f) { return f * f * (3.0 - 2.0 * f); };
  const double fx = smooth(gx - fx0), fy = smooth(gy - fy0);
  const double a = lattice(ix, iy, seed), b = lattice(ix + 1, iy, seed);
  const double c = lattice(ix, iy + 1, seed), d = lattice(ix + 1, iy + 1, seed);
  return (1 - fy) * ((1 - fx) * a + fx * b) + fy * ((1 - fx) * c + fx * d);
}

// Two-octave value noise sampled at pixel centres, smoothed by a 3x3 box
// filter and stretched to roughly [0, 1]. Sampling between centres is bilinear.
struct Raster {
  double x0 = 0.0, y0 = 0.0;  // world position of the corner of sample (0, 0)
  int w = 0, h = 0;
  std::vector<float> v;

  Raster(double x0_, double y0_, int w_, int h_, std::uint64_t seed) : x0(x0_), y0(y0_), w(w_), h(h_) {
    const int rw = w + 2, rh = h + 2;
    std::vector<double> raw(static_cast<std::size_t>(rw) * static_cast<std::size_t>(rh));
    for (int j = 0; j < rh; ++j) {
      for (int i = 0; i < rw; ++i) {
        const double x = x0 + i - 0.5, y = y0 + j - 0.5;
        raw[static_cast<std::size_t>(j) * rw + i] =
            0.6 * value_noise(x, y, 9.0, seed) + 0.4 * value_noise(x, y, 3.5, seed ^ 0x5bd1e995ULL);
      }
    }
    v.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        double acc = 0.0;
        for (int dy = 0; dy < 3; ++dy) {
          for (int dx = 0; dx < 3; ++dx) acc += raw[static_cast<std::size_t>(j + dy) * rw + i + dx];
        }
        v[static_cast<std::size_t>(j) * w + i] = static_cast<float>(std::clamp(0.5 + 2.2 * (acc / 9.0 - 0.5), 0.0, 1.0));
      }
    }
  }

  double at(int i, int j) const {
    i = std::clamp(i, 0, w - 1);
    j = std::clamp(j, 0, h - 1);
    return v[static_cast<std::size_t>(j) * w + i];
  }

  double sample(double x, double y) const {
    const double fx = x - x0 - 0.5, fy = y - y0 - 0.5;
    const double ix = std::floor(fx), iy = std::floor(fy);
    const double ax = fx - ix, ay = fy - iy;
    const int i = static_cast<int>(ix), j = static_cast<int>(iy);
    return (1 - ay) * ((1 - ax) * at(i, j) + ax * at(i + 1, j)) + ay * ((1 - ax) * at(i, j + 1) + ax * at(i + 1, j + 1));
  }
};

// Raster covering every world point seen by the camera over the sequence.
Raster world_raster(const Scenario& sc, const Track& tr, std::uint64_t seed) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& c : tr.cum) {
    const Eigen::Matrix3d inv = c.matrix().inverse();
    for (const double px : {0.0, static_cast<double>(sc.width)}) {
      for (const double py : {0.0, static_cast<double>(sc.height)}) {
        const Eigen::Vector3d q = inv * Eigen::Vector3d(px, py, 1.0);
        x0 = std::min(x0, q.x() / q.z());
        x1 = std::max(x1, q.x() / q.z());
        y0 = std::min(y0, q.y() / q.z());
        y1 = std::max(y1, q.y() / q.z());
      }
    }
  }
  x0 = std::floor(x0) - 2.0;
  y0 = std::floor(y0) - 2.0;
  const double w = std::ceil(x1) + 2.0 - x0, h = std::ceil(y1) + 2.0 - y0;
  if (w * h > 64e6) throw RangeError("scenario: camera path covers too large a world area");
  return Raster(x0, y0, static_cast<int>(w), static_cast<int>(h), seed);
}

}  // namespace

Point target_position(const Scenario& sc, int t) {
  Point p{sc.target.x, sc.target.y};
  double vx = sc.vx, vy = sc.vy;
  std::size_t next = 0;
  for (int k = 1; k <= t; ++k) {
    while (next < sc.path.size() && sc.path[next].frame <= k) {
      vx = sc.path[next].vx;
      vy = sc.path[next].vy;
      ++next;
    }
    p.x += vx;
    p.y += vy;
  }
  return p;
}

void validate(const Scenario& sc) {
  if (sc.frames < 1) throw RangeError("scenario: frames must be >= 1");
  if (sc.width < 32 || sc.height < 32) throw RangeError("scenario: frame must be at least 32x32");
  if (!sc.target.valid()) throw RangeError("scenario: invalid target box");
  if (!std::isfinite(sc.vx) || !std::isfinite(sc.vy) || !(sc.noise_sigma >= 0.0)) throw RangeError("scenario: invalid motion or noise");
  for (std::size_t i = 0; i < sc.path.size(); ++i) {
    const auto& c = sc.path[i];
    if (c.frame < 1 || c.frame >= sc.frames || (i > 0 && c.frame <= sc.path[i - 1].frame) || !std::isfinite(c.vx) ||
        !std::isfinite(c.vy)) {
      throw RangeError("scenario: velocity changes need ascending frames inside the sequence");
    }
  }
  for (const auto& e : sc.events) {
    if (e.start < 0 || e.end > sc.frames || e.start >= e.end) {
      throw RangeError("scenario: event '" + std::string(to_string(e.kind)) + "' range [" + std::to_string(e.start) + ", " +
                       std::to_string(e.end) + ") outside the sequence");
    }
    if (e.kind == EventKind::crossover && !(e.level >= 0.0 && e.level <= 1.0)) throw RangeError("scenario: crossover level outside [0, 1]");
    if (e.kind == EventKind::illum_drop && !(e.gain >= 0.0 && e.gain <= 1.0)) throw RangeError("scenario: illumination gain outside [0, 1]");
    if (e.kind == EventKind::camera_motion && !(e.scale > 0.0)) throw RangeError("scenario: camera scale must be > 0");
    if (e.kind == EventKind::occlusion && !(e.margin >= 0.0)) throw RangeError("scenario: occlusion margin must be >= 0");
  }
  for (const auto& a : sc.events) {
    for (const auto& b : sc.events) {
      if (a.kind == EventKind::occlusion && b.kind == EventKind::crossover && a.start < b.end && b.start < a.end) {
        throw RangeError("scenario: occlusion and crossover may not overlap");
      }
    }
  }
  const Track tr = plan(sc);
  for (std::size_t t = 0; t < tr.gt.size(); ++t) {
    const Box& b = tr.gt[t];
    if (b.x < 0.0 || b.y < 0.0 || b.x + b.w > sc.width || b.y + b.h > sc.height) {
      throw RangeError("scenario: target leaves the frame at frame " + std::to_string(t));
    }
  }
}

Generated generate(const Scenario& sc, std::uint64_t seed) {
  validate(sc);
  const Track tr = plan(sc);
  Generated g;
  g.seq.name = sc.name;
  g.seq.gt_rgb = tr.gt;
  g.seq.gt_t = tr.gt;
  g.camera = tr.inc;
  for (const auto& e : sc.events) {
    const char* tag = e.kind == EventKind::occlusion    ? "OCC"
                      : e.kind == EventKind::crossover  ? "TC"
                      : e.kind == EventKind::illum_drop ? "LI"
                                                        : "CM";
    if (!g.seq.has_attribute(tag)) g.seq.attributes.push_back(tag);
    if (e.kind == EventKind::occlusion) g.occluders.push_back(occluder_box(sc, e, tr.gt));
  }
  std::sort(g.seq.attributes.begin(), g.seq.attributes.end());

  const std::uint64_t ts = sc.texture_seed;
  const Raster bg_rgb = world_raster(sc, tr, mix(ts, 1));
  const Raster bg_t = world_raster(sc, tr, mix(ts, 2));
  const int tw = static_cast<int>(std::ceil(sc.target.w)) + 2, th_ = static_cast<int>(std::ceil(sc.target.h)) + 2;
  const Raster tgt_rgb(-1.0, -1.0, tw, th_, mix(ts, 3));
  const Raster tgt_t(-1.0, -1.0, tw, th_, mix(ts, 4));
  const Raster occ(0.0, 0.0, sc.width, sc.height, mix(ts, 5));
  for (int t = 0; t < sc.frames; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    const Eigen::Matrix3d inv = tr.cum[ut].matrix().inverse();
    const Point tl = target_position(sc, t);
    const Box world{tl.x, tl.y, sc.target.w, sc.target.h};
    double gain = 1.0, extra_noise = 0.0, cross = 0.0;
    bool occl_any = false;
    std::vector<Box> occ_now;
    std::size_t occ_idx = 0;
    for (const auto& e : sc.events) {
      const bool on = active(e, t);
      if (e.kind == EventKind::occlusion) {
        if (on) {
          occ_now.push_back(g.occluders[occ_idx]);
          occl_any = true;
        }
        ++occ_idx;
      }
      if (!on) continue;
      if (e.kind == EventKind::illum_drop) {
        gain = std::min(gain, e.gain);
        extra_noise = std::max(extra_noise, 0.02);
      }
      if (e.kind == EventKind::crossover) cross = std::max(cross, e.level);
    }
    if (occl_any) g.occluded.push_back(t);

    Image rgb(sc.width, sc.height, 3), th(sc.width, sc.height, 1);
    Rng noise(mix(seed, static_cast<std::uint64_t>(t)));
    for (int y = 0; y < sc.height; ++y) {
      for (int x = 0; x < sc.width; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double wx = inv(0, 0) * px + inv(0, 1) * py + inv(0, 2);
        const double wy = inv(1, 0) * px + inv(1, 1) * py + inv(1, 2);
        const double bg = bg_rgb.sample(wx, wy);
        double r = 0.05 + 0.9 * bg, gr = 0.1 + 0.8 * bg, b = 0.15 + 0.7 * bg;
        const double bgt = 0.25 + 0.2 * bg_t.sample(wx, wy);
        double tv = bgt;
        if (wx >= world.x && wx < world.x + world.w && wy >= world.y && wy < world.y + world.h) {
          const double lx = wx - world.x, ly = wy - world.y;
          const double tt = tgt_rgb.sample(lx, ly);
          r = 0.3 + 0.7 * tt;
          gr = 0.1 + 0.5 * tt;
          b = 0.05 + 0.25 * tt;
          const double hot = 0.65 + 0.3 * tgt_t.sample(lx, ly);
          tv = (1.0 - cross) * hot + cross * bgt;
        }
        for (const Box& o : occ_now) {
          if (px >= o.x && px < o.x + o.w && py >= o.y && py < o.y + o.h) {
            const double ov = occ.sample(px, py);
            r = 0.2 + 0.5 * ov;
            gr = 0.25 + 0.5 * ov;
            b = 0.35 + 0.5 * ov;
            tv = 0.3 + 0.25 * ov;
          }
        }
        const double nr = sc.noise_sigma * noise.normal() + extra_noise * noise.normal();
        const double ng = sc.noise_sigma * noise.normal() + extra_noise * noise.normal();
        const double nb = sc.noise_sigma * noise.normal() + extra_noise * noise.normal();
        const double nt = sc.noise_sigma * noise.normal();
        rgb.at(x, y, 0) = static_cast<float>(std::clamp(gain * r + nr, 0.0, 1.0));
        rgb.at(x, y, 1) = static_cast<float>(std::clamp(gain * gr + ng, 0.0, 1.0));
        rgb.at(x, y, 2) = static_cast<float>(std::clamp(gain * b + nb, 0.0, 1.0));
        th.at(x, y) = static_cast<float>(std::clamp(tv + nt, 0.0, 1.0));
      }
    }
    quantize8(rgb);
    quantize8(th);
    g.seq.rgb_frames.push_back(std::move(rgb));
    g.seq.t_frames.push_back(std::move(th));
  }
  return g;
}

Scenario preset(const std::string& name, std::uint64_t variant) {
  Rng rng(mix(0xC0FFEE, variant));
  Scenario sc;
  sc.name = name + "_" + std::to_string(variant);
  sc.texture_seed = mix(17, variant);
  const double sx = rng.uniform(-1.0, 1.0) >= 0.0 ? 1.0 : -1.0;
  const double speed = rng.uniform(0.8, 1.6);
  sc.target = {sc.width * 0.5 - 20.0 - sx * 50.0 + rng.uniform(-10.0, 10.0), 100.0 + rng.uniform(-30.0, 30.0), 40.0, 40.0};
  sc.vx = sx * speed;
  sc.vy = rng.uniform(-0.4, 0.4);
  // Turns head vertically towards the middle of the frame.
  const double sy = sc.target.y + 0.5 * sc.target.h > 0.5 * sc.height ? -1.0 : 1.0;
  auto turn = [&](int frame) { sc.path.push_back({frame, -sx * 0.3 * speed, sy * speed}); };
  Event e;
  if (name == "static") {
    sc.vx = sc.vy = 0.0;
  } else if (name == "moving") {
  } else if (name == "occlusion") {
    e.kind = EventKind::occlusion;
    e.start = 25;
    e.end = 33;
    sc.events.push_back(e);
  } else if (name == "crossover" || name == "illum") {
    e.kind = name == "crossover" ? EventKind::crossover : EventKind::illum_drop;
    e.start = 15;
    e.end = 45;
    sc.events.push_back(e);
    turn(30);
  } else if (name == "mixed") {
    e.kind = EventKind::crossover;
    e.start = 8;
    e.end = 26;
    sc.events.push_back(e);
    Event d;
    d.kind = EventKind::illum_drop;
    d.start = 34;
    d.end = 52;
    sc.events.push_back(d);
    turn(17);
    sc.path.push_back({43, sx * speed, -sy * 0.5 * speed});
  } else if (name == "pan") {
    e.kind = EventKind::camera_motion;
    e.start = 10;
    e.end = 40;
    e.dx = -sx * rng.uniform(2.0, 3.0);
    e.dy = rng.uniform(-1.0, 1.0);
    sc.events.push_back(e);
  } else if (name == "occlusion_pan") {
    e.kind = EventKind::camera_motion;
    e.start = 5;
    e.end = 50;
    e.dx = -sx * rng.uniform(1.5, 2.5);
    e.dy = rng.uniform(-0.5, 0.5);
    sc.events.push_back(e);
    Event o;
    o.kind = EventKind::occlusion;
    o.start = 28;
    o.end = 36;
    sc.events.push_back(o);
  } else {
    throw RangeError("unknown scenario preset '" + name + "'");
  }
  return sc;
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw RangeError(std::string("scenario: malformed JSON: ") + e.what());
  }
  Scenario sc;
  try {
    if (j.contains("preset")) sc = preset(j.at("preset").get<std::string>(), j.value("variant", std::uint64_t{0}));
    sc.name = j.value("name", sc.name);
    sc.frames = j.value("frames", sc.frames);
    sc.width = j.value("width", sc.width);
    sc.height = j.value("height", sc.height);
    sc.texture_seed = j.value("texture_seed", sc.texture_seed);
    sc.noise_sigma = j.value("noise_sigma", sc.noise_sigma);
    if (j.contains("target")) {
      const json& t = j.at("target");
      if (t.contains("box")) {
        const auto b = t.at("box").get<std::vector<double>>();
        if (b.size() != 4) throw RangeError("scenario: target.box needs 4 numbers");
        sc.target = {b[0], b[1], b[2], b[3]};
      }
      if (t.contains("velocity")) {
        const auto v = t.at("velocity").get<std::vector<double>>();
        if (v.size() != 2) throw RangeError("scenario: target.velocity needs 2 numbers");
        sc.vx = v[0];
        sc.vy = v[1];
      }
      if (t.contains("path")) {
        sc.path.clear();
        for (const json& jc : t.at("path")) {
          const auto v = jc.at("velocity").get<std::vector<double>>();
          if (v.size() != 2) throw RangeError("scenario: path velocity needs 2 numbers");
          sc.path.push_back({jc.at("frame").get<int>(), v[0], v[1]});
        }
      }
    }
    if (j.contains("events")) {
      sc.events.clear();
      for (const json& je : j.at("events")) {
        Event e;
        e.kind = parse_event_kind(je.at("kind").get<std::string>());
        e.start = je.at("start").get<int>();
        e.end = je.at("end").get<int>();
        e.margin = je.value("margin", e.margin);
        e.level = je.value("level", e.level);
        e.gain = je.value("gain", e.gain);
        if (je.contains("translation")) {
          const auto tr = je.at("translation").get<std::vector<double>>();
          if (tr.size() != 2) throw RangeError("scenario: translation needs 2 numbers");
          e.dx = tr[0];
          e.dy = tr[1];
        }
        e.rotation_deg = je.value("rotation_deg", e.rotation_deg);
        e.scale = je.value("scale", e.scale);
        sc.events.push_back(e);
      }
    }
  } catch (const json::exception& e) {
    throw RangeError(std::string("scenario: ") + e.what());
  }
  validate(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("scenario file not found: '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["frames"] = sc.frames;
  j["width"] = sc.width;
  j["height"] = sc.height;
  j["texture_seed"] = sc.texture_seed;
  j["noise_sigma"] = sc.noise_sigma;
  j["target"] = {{"box", {sc.target.x, sc.target.y, sc.target.w, sc.target.h}}, {"velocity", {sc.vx, sc.vy}}};
  j["target"]["path"] = json::array();
  for (const auto& c : sc.path) j["target"]["path"].push_back({{"frame", c.frame}, {"velocity", {c.vx, c.vy}}});
  j["events"] = json::array();
  for (const auto& e : sc.events) {
    j["events"].push_back({{"kind", std::string(to_string(e.kind))},
                           {"start", e.start},
                           {"end", e.end},
                           {"margin", e.margin},
                           {"level", e.level},
                           {"gain", e.gain},
                           {"translation", {e.dx, e.dy}},
                           {"rotation_deg", e.rotation_deg},
                           {"scale", e.scale}});
  }
  return j.dump(2);
}

std::string write_sequence(const Generated& g, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root / "rgb");
  fs::create_directories(root / "t");
  for (std::size_t i = 0; i < g.seq.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.png", i);
    save_image(g.seq.rgb_frames.at(i), (root / "rgb" / name).string());
    save_image(g.seq.t_frames.at(i), (root / "t" / name).string());
  }
  bench::write_boxes(g.seq.gt_rgb, (root / "gt_rgb.txt").string());
  bench::write_boxes(g.seq.gt_t, (root / "gt_t.txt").string());
  json m;
  m["name"] = g.seq.name;
  m["rgb_dir"] = "rgb";
  m["t_dir"] = "t";
  m["gt_rgb"] = "gt_rgb.txt";
  m["gt_t"] = "gt_t.txt";
  m["attributes"] = g.seq.attributes;
  const fs::path manifest = root / "manifest.json";
  {
    std::ofstream out(manifest);
    if (!out) throw DataError("cannot write '" + manifest.string() + "'");
    out << m.dump(2) << '\n';
  }
  json side;
  side["camera"] = json::array();
  for (const auto& t : g.camera) {
    json row = json::array();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) row.push_back(t.matrix()(r, c));
    }
    side["camera"].push_back(row);
  }
  side["occluded_frames"] = g.occluded;
  side["occluders"] = json::array();
  for (const Box& b : g.occluders) side["occluders"].push_back({b.x, b.y, b.w, b.h});
  std::ofstream out(root / "transforms.json");
  if (!out) throw DataError("cannot write transforms.json");
  out << side.dump(2) << '\n';
  return manifest.string();
}

}  // namespace rgbt::synth
