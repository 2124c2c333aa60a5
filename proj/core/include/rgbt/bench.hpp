#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rgbt/pipeline.hpp"

namespace rgbt::bench {

/// Paired RGB/thermal stream. Frames come either from files or from memory.
struct Sequence {
  std::string name;
  std::vector<std::string> rgb_paths;
  std::vector<std::string> t_paths;
  std::vector<Image> rgb_frames;
  std::vector<Image> t_frames;
  std::vector<Box> gt_rgb;
  std::vector<Box> gt_t;
  std::vector<std::string> attributes;

  std::size_t size() const { return gt_t.size(); }
  Image rgb(std::size_t i) const;
  Image thermal(std::size_t i) const;
  bool has_attribute(const std::string& tag) const;
};

/// Throws DataError on count mismatches or invalid boxes.
void validate(const Sequence& seq);

/// Manifest: JSON {name, rgb_dir, t_dir, gt_rgb, gt_t, attributes[]}, paths
/// relative to the manifest; frames are the sorted image files of each dir.
Sequence load_sequence(const std::string& manifest_path);

/// One "x,y,w,h" line per frame.
std::vector<Box> read_boxes(const std::string& path);
void write_boxes(const std::vector<Box>& boxes, const std::string& path);

struct Trajectory {
  std::vector<Box> boxes;
  std::vector<FrameResult> frames;  // frames[0] describes the initial box
};

struct OpeOptions {
  bool init_on_thermal = true;
  friend bool operator==(const OpeOptions&, const OpeOptions&) = default;
};

/// Initialise on frame 0 and track every later frame once.
Trajectory run_ope(const Sequence& seq, const TrackerConfig& cfg, const fusion::MfNet& net, const OpeOptions& opts = {},
                   const RefineHook& hook = {});

/// Runs independent sessions over `workers` threads; output order follows input.
std::vector<Trajectory> run_many(const std::vector<const Sequence*>& seqs, const TrackerConfig& cfg,
                                 const fusion::MfNet& net, int workers, const OpeOptions& opts = {});

struct Curve {
  std::vector<double> thresholds;
  std::vector<double> values;
  double summary = 0.0;  // AUC for success curves, value at the reporting threshold for precision
};

/// Per-frame max IoU against either modality's ground truth.
std::vector<double> overlaps(const std::vector<Box>& traj, const Sequence& seq);
/// Per-frame min centre error against either modality's ground truth.
std::vector<double> center_errors(const std::vector<Box>& traj, const Sequence& seq);

/// Success curve over IoU thresholds 0:0.05:1 (strict >); AUC = mean.
Curve success_curve(const std::vector<double>& overlaps);
/// Precision curve over 0:1:50 px (error <= threshold).
Curve precision_curve(const std::vector<double>& errors, double px_thresh);
double precision_at(const std::vector<double>& errors, double px_thresh);

Curve msr(const std::vector<Box>& traj, const Sequence& seq);
Curve mpr(const std::vector<Box>& traj, const Sequence& seq, double px_thresh = 20.0);

struct MetricRow {
  std::string attribute;  // "ALL" for the aggregate
  std::size_t sequences = 0;
  std::size_t frames = 0;
  double msr = 0.0;
  double mpr = 0.0;
};

struct Evaluated {
  const Sequence* seq;
  std::vector<Box> boxes;
};

/// Rows per attribute (sorted) followed by ALL; metrics over the union of frames.
std::vector<MetricRow> attribute_report(const std::vector<Evaluated>& results, double px_thresh = 20.0);

struct PairOptions {
  int interval = 5;   // label frame drawn up to this many frames after the init frame
  int stride = 1;     // init frames taken every `stride` frames
  double jitter = 0.2;  // search-centre offset, fraction of the target size
  std::uint64_t seed = 1;
};

/// Fusion training pairs: both modality trackers are initialised on the
/// ground truth of an init frame and respond around a jittered centre on a
/// later label frame; Y is the Gaussian label at the true centre.
std::vector<fusion::TrainPair> make_pairs(const Sequence& seq, const TrackerConfig& cfg, int patch, const PairOptions& opts = {});

void write_curve_csv(const Curve& c, const std::string& path, const std::string& x_name, const std::string& y_name);

}  // namespace rgbt::bench
