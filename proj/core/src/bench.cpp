#include "rgbt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rgbt/error.hpp"
#include "rgbt/rng.hpp"

namespace rgbt::bench {

namespace fs = std::filesystem;

Image Sequence::rgb(std::size_t i) const { return rgb_frames.empty() ? load_image(rgb_paths.at(i)) : rgb_frames.at(i); }

Image Sequence::thermal(std::size_t i) const {
  // Thermal frames are always used as grayscale.
  return to_gray(t_frames.empty() ? load_image(t_paths.at(i)) : t_frames.at(i));
}

bool Sequence::has_attribute(const std::string& tag) const {
  return std::find(attributes.begin(), attributes.end(), tag) != attributes.end();
}

void validate(const Sequence& s) {
  const std::size_t n = s.gt_t.size();
  const std::size_t n_rgb = s.rgb_frames.empty() ? s.rgb_paths.size() : s.rgb_frames.size();
  const std::size_t n_t = s.t_frames.empty() ? s.t_paths.size() : s.t_frames.size();
  if (n == 0) throw DataError("sequence '" + s.name + "' has no frames");
  if (s.gt_rgb.size() != n || n_rgb != n || n_t != n) {
    std::ostringstream os;
    os << "sequence '" << s.name << "': count mismatch (rgb frames " << n_rgb << ", thermal frames " << n_t << ", gt_rgb "
       << s.gt_rgb.size() << ", gt_t " << n << ")";
    throw DataError(os.str());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.gt_rgb[i].valid() || !s.gt_t[i].valid()) {
      throw DataError("sequence '" + s.name + "': invalid ground-truth box at frame " + std::to_string(i));
    }
  }
}

std::vector<Box> read_boxes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open box file '" + path + "'");
  std::vector<Box> boxes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Box b;
    std::string rest;
    if (!(ls >> b.x >> b.y >> b.w >> b.h) || (ls >> rest)) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed box line");
    }
    boxes.push_back(b);
  }
  return boxes;
}

void write_boxes(const std::vector<Box>& boxes, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  // shortest text that parses back to the same doubles
  auto put = [&out](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, r.ptr - buf);
  };
  for (const Box& b : boxes) {
    put(b.x);
    out << ',';
    put(b.y);
    out << ',';
    put(b.w);
    out << ',';
    put(b.h);
    out << '\n';
  }
}

namespace {

std::vector<std::string> image_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("frame directory not found: '" + dir.string() + "'");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Sequence load_sequence(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("manifest not found: '" + manifest_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest '" + manifest_path + "': " + e.what());
  }
  const fs::path base = fs::path(manifest_path).parent_path();
  auto str = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw DataError("manifest '" + manifest_path + "' lacks string field '" + key + "'");
    return j[key].get<std::string>();
  };
  Sequence s;
  s.name = str("name");
  s.rgb_paths = image_files(base / str("rgb_dir"));
  s.t_paths = image_files(base / str("t_dir"));
  s.gt_rgb = read_boxes((base / str("gt_rgb")).string());
  s.gt_t = read_boxes((base / str("gt_t")).string());
  if (j.contains("attributes")) {
    if (!j["attributes"].is_array()) throw DataError("manifest attributes must be an array");
    for (const auto& a : j["attributes"]) {
      if (!a.is_string()) throw DataError("manifest attributes must be strings");
      s.attributes.push_back(a.get<std::string>());
    }
  }
  validate(s);
  return s;
}

namespace {

template <class E>
[[noreturn]] void rethrow_at(const E& e, std::size_t frame, const std::string& name) {
  throw E("sequence '" + name + "', frame " + std::to_string(frame) + ": " + e.what());
}

}  // namespace

Trajectory run_ope(const Sequence& seq, const TrackerConfig& cfg, const fusion::MfNet& net, const OpeOptions& opts,
                   const RefineHook& hook) {
  validate(seq);
  Tracker tracker(cfg, net);
  if (hook) tracker.set_refine_hook(hook);
  Trajectory traj;
  std::size_t i = 0;
  try {
    const Box init = opts.init_on_thermal ? seq.gt_t[0] : seq.gt_rgb[0];
    tracker.init(seq.rgb(0), seq.thermal(0), init);
    traj.boxes.push_back(init);
    FrameResult first;
    first.box = init;
    first.appearance_box = init;
    first.motion_box = init;
    traj.frames.push_back(first);
    for (i = 1; i < seq.size(); ++i) {
      const FrameResult r = tracker.track(seq.rgb(i), seq.thermal(i));
      traj.boxes.push_back(r.box);
      traj.frames.push_back(r);
    }
  } catch (const DataError& e) {
    rethrow_at(e, i, seq.name);
  } catch (const ConfigError& e) {
    rethrow_at(e, i, seq.name);
  } catch (const DimensionError& e) {
    rethrow_at(e, i, seq.name);
  } catch (const DegenerateError& e) {
    rethrow_at(e, i, seq.name);
  } catch (const StateError& e) {
    rethrow_at(e, i, seq.name);
  } catch (const RangeError& e) {
    rethrow_at(e, i, seq.name);
  }
  return traj;
}

std::vector<Trajectory> run_many(const std::vector<const Sequence*>& seqs, const TrackerConfig& cfg, const fusion::MfNet& net,
                                 int workers, const OpeOptions& opts) {
  std::vector<Trajectory> out(seqs.size());
  std::vector<std::exception_ptr> errors(seqs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < seqs.size(); k = next++) {
      try {
        out[k] = run_ope(*seqs[k], cfg, net, opts);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(1, seqs.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<double> overlaps(const std::vector<Box>& traj, const Sequence& seq) {
  if (traj.size() != seq.size()) throw DimensionError("trajectory length differs from the sequence length");
  std::vector<double> o(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) o[i] = std::max(iou(traj[i], seq.gt_rgb[i]), iou(traj[i], seq.gt_t[i]));
  return o;
}

std::vector<double> center_errors(const std::vector<Box>& traj, const Sequence& seq) {
  if (traj.size() != seq.size()) throw DimensionError("trajectory length differs from the sequence length");
  std::vector<double> e(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    e[i] = std::min(center_error(traj[i], seq.gt_rgb[i]), center_error(traj[i], seq.gt_t[i]));
  }
  return e;
}

Curve success_curve(const std::vector<double>& ov) {
  Curve c;
  for (int k = 0; k <= 20; ++k) {
    const double t = k / 20.0;
    const auto n = std::count_if(ov.begin(), ov.end(), [t](double v) { return v > t; });
    c.thresholds.push_back(t);
    c.values.push_back(ov.empty() ? 0.0 : static_cast<double>(n) / static_cast<double>(ov.size()));
  }
  double s = 0.0;
  for (double v : c.values) s += v;
  c.summary = s / static_cast<double>(c.values.size());
  return c;
}

double precision_at(const std::vector<double>& errors, double px) {
  if (errors.empty()) return 0.0;
  const auto n = std::count_if(errors.begin(), errors.end(), [px](double e) { return e <= px; });
  return static_cast<double>(n) / static_cast<double>(errors.size());
}

Curve precision_curve(const std::vector<double>& errors, double px_thresh) {
  Curve c;
  for (int t = 0; t <= 50; ++t) {
    c.thresholds.push_back(t);
    c.values.push_back(precision_at(errors, t));
  }
  c.summary = precision_at(errors, px_thresh);
  return c;
}

Curve msr(const std::vector<Box>& traj, const Sequence& seq) { return success_curve(overlaps(traj, seq)); }

Curve mpr(const std::vector<Box>& traj, const Sequence& seq, double px_thresh) {
  return precision_curve(center_errors(traj, seq), px_thresh);
}

std::vector<MetricRow> attribute_report(const std::vector<Evaluated>& results, double px_thresh) {
  std::set<std::string> tags;
  for (const auto& r : results) tags.insert(r.seq->attributes.begin(), r.seq->attributes.end());
  auto row = [&](const std::string& name, auto&& include) {
    MetricRow m;
    m.attribute = name;
    std::vector<double> ov, err;
    for (const auto& r : results) {
      if (!include(*r.seq)) continue;
      ++m.sequences;
      const auto o = overlaps(r.boxes, *r.seq);
      const auto e = center_errors(r.boxes, *r.seq);
      ov.insert(ov.end(), o.begin(), o.end());
      err.insert(err.end(), e.begin(), e.end());
    }
    m.frames = ov.size();
    m.msr = success_curve(ov).summary;
    m.mpr = precision_at(err, px_thresh);
    return m;
  };
  std::vector<MetricRow> rows;
  for (const auto& t : tags) rows.push_back(row(t, [&](const Sequence& s) { return s.has_attribute(t); }));
  rows.push_back(row("ALL", [](const Sequence&) { return true; }));
  return rows;
}

std::vector<fusion::TrainPair> make_pairs(const Sequence& seq, const TrackerConfig& cfg, int patch, const PairOptions& opts) {
  validate(seq);
  if (opts.interval < 1 || opts.stride < 1) throw ConfigError("pair interval and stride must be >= 1");
  if (patch < 1) throw ConfigError("pair patch size must be >= 1");
  Rng rng(opts.seed);
  std::vector<fusion::TrainPair> out;
  for (std::size_t a = 0; a + 1 < seq.size(); a += static_cast<std::size_t>(opts.stride)) {
    const auto k = 1 + rng.below(static_cast<std::uint64_t>(opts.interval));
    const std::size_t b = std::min(seq.size() - 1, a + static_cast<std::size_t>(k));
    const Box& init = seq.gt_t[a];
    const Box& truth = seq.gt_t[b];
    const Image rgb_a = seq.rgb(a), t_a = seq.thermal(a), rgb_b = seq.rgb(b), t_b = seq.thermal(b);
    const cf::CfState s_rgb = cf::cf_init(rgb_a, init, cfg.cf);
    const cf::CfState s_t = cf::cf_init(t_a, init, cfg.cf);
    const Point tc = truth.center();
    const Point c{tc.x + opts.jitter * init.w * rng.uniform(-1.0, 1.0), tc.y + opts.jitter * init.h * rng.uniform(-1.0, 1.0)};
    const std::size_t mid = static_cast<std::size_t>(cfg.cf.scales / 2);
    fusion::TrainPair p;
    p.r_rgb = cf::cf_respond(s_rgb, rgb_b, c).maps[mid];
    p.r_t = cf::cf_respond(s_t, t_b, c).maps[mid];
    const double ww = s_rgb.target_w * s_rgb.window_ratio_x, wh = s_rgb.target_h * s_rgb.window_ratio_y;
    p.p_rgb = sample_patch(rgb_b, c, ww, wh, patch, patch);
    p.p_t = sample_patch(t_b, c, ww, wh, patch, patch);
    const double cell_x = ww / s_rgb.map_w, cell_y = wh / s_rgb.map_h;
    const double sigma = cfg.cf.sigma_factor * std::sqrt(init.w * init.h) / std::sqrt(cell_x * cell_y);
    const double px = 0.5 * (s_rgb.map_w - 1) + (tc.x - c.x) / cell_x;
    const double py = 0.5 * (s_rgb.map_h - 1) + (tc.y - c.y) / cell_y;
    p.y = ResponseMap(s_rgb.map_w, s_rgb.map_h);
    for (int j = 0; j < p.y.height; ++j) {
      for (int i = 0; i < p.y.width; ++i) {
        const double dx = i - px, dy = j - py;
        p.y.at(i, j) = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma * sigma));
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_curve_csv(const Curve& c, const std::string& path, const std::string& x_name, const std::string& y_name) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << x_name << ',' << y_name << '\n' << std::setprecision(10);
  for (std::size_t i = 0; i < c.values.size(); ++i) out << c.thresholds[i] << ',' << c.values[i] << '\n';
}

}  // namespace rgbt::bench
