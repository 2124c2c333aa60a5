// rgbt: batch front end for tracking, evaluation, fusion training and
// synthetic data generation.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "rgbt/bench.hpp"
#include "rgbt/config.hpp"
#include "rgbt/error.hpp"
#include "rgbt/synth.hpp"

namespace fs = std::filesystem;
using namespace rgbt;

namespace {

Config read_config(const std::string& path, int workers) {
  Config cfg = path.empty() ? Config{} : load_config(path);
  if (workers >= 0) cfg.workers = workers;
  validate(cfg);
  return cfg;
}

int worker_count(const Config& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

fusion::MfNet network(const Config& cfg) {
  return cfg.checkpoint.empty() ? fusion::MfNet(cfg.mfnet) : fusion::load_mfnet(cfg.checkpoint);
}

void write_diagnostics(const bench::Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "frame,x,y,w,h,source,suspended,cme_gate,cme_estimated,q,s_a,s_m,tm_skipped,decided,w_g,mean_wf,refined\n";
  out << std::setprecision(10);
  for (std::size_t i = 0; i < traj.frames.size(); ++i) {
    const FrameResult& r = traj.frames[i];
    out << i << ',' << r.box.x << ',' << r.box.y << ',' << r.box.w << ',' << r.box.h << ',' << to_string(r.source) << ','
        << r.suspended << ',' << r.cme_gate << ',' << r.cme_estimated << ',' << r.q << ',' << r.s_a << ',' << r.s_m << ','
        << r.tm_skipped << ',' << r.decided << ',' << r.w_g << ',' << r.mean_wf << ',' << r.refined << '\n';
  }
}

int cmd_track(const std::vector<std::string>& manifests, const std::string& config, const std::string& out,
              const std::string& ablation, int workers) {
  Config cfg = read_config(config, workers);
  if (!ablation.empty()) apply_ablation(cfg.tracker, parse_ablation(ablation));
  const fusion::MfNet net = network(cfg);
  std::vector<bench::Sequence> seqs;
  for (const auto& m : manifests) seqs.push_back(bench::load_sequence(m));
  std::vector<const bench::Sequence*> ptrs;
  for (const auto& s : seqs) ptrs.push_back(&s);
  const auto trajs = bench::run_many(ptrs, cfg.tracker, net, worker_count(cfg), cfg.ope);
  if (seqs.size() == 1) {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    bench::write_boxes(trajs[0].boxes, out);
    write_diagnostics(trajs[0], fs::path(out).replace_extension(".frames.csv").string());
    return 0;
  }
  fs::create_directories(out);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const fs::path base = fs::path(out) / seqs[i].name;
    bench::write_boxes(trajs[i].boxes, base.string() + ".txt");
    write_diagnostics(trajs[i], base.string() + ".frames.csv");
  }
  return 0;
}

int cmd_eval(const std::string& results, const std::string& manifests, const std::string& out, double px) {
  if (!fs::is_directory(results)) throw DataError("results directory not found: '" + results + "'");
  if (!fs::is_directory(manifests)) throw DataError("manifest directory not found: '" + manifests + "'");
  std::map<std::string, bench::Sequence> by_name;
  for (const auto& e : fs::recursive_directory_iterator(manifests)) {
    if (e.is_regular_file() && e.path().filename() == "manifest.json") {
      bench::Sequence s = bench::load_sequence(e.path().string());
      const std::string name = s.name;
      if (!by_name.emplace(name, std::move(s)).second) throw DataError("duplicate sequence name '" + name + "'");
    }
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(results)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no result files in '" + results + "'");
  std::vector<bench::Evaluated> evals;
  for (const auto& f : files) {
    const std::string name = f.stem().string();
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("result '" + f.filename().string() + "' has no matching manifest");
    evals.push_back({&it->second, bench::read_boxes(f.string())});
    if (evals.back().boxes.size() != it->second.size()) {
      throw DataError("result '" + f.filename().string() + "' has " + std::to_string(evals.back().boxes.size()) +
                      " boxes for " + std::to_string(it->second.size()) + " frames");
    }
  }
  const fs::path dir(out);
  fs::create_directories(dir / "curves");
  nlohmann::json summary;
  std::ofstream seq_csv(dir / "sequences.csv");
  seq_csv << "sequence,frames,msr,mpr\n" << std::setprecision(10);
  std::vector<double> all_ov, all_err;
  for (const auto& ev : evals) {
    const auto ov = bench::overlaps(ev.boxes, *ev.seq);
    const auto err = bench::center_errors(ev.boxes, *ev.seq);
    const bench::Curve s = bench::success_curve(ov);
    const bench::Curve p = bench::precision_curve(err, px);
    seq_csv << ev.seq->name << ',' << ev.seq->size() << ',' << s.summary << ',' << p.summary << '\n';
    bench::write_curve_csv(s, (dir / "curves" / (ev.seq->name + "_success.csv")).string(), "iou", "success");
    bench::write_curve_csv(p, (dir / "curves" / (ev.seq->name + "_precision.csv")).string(), "px", "precision");
    summary["sequences"][ev.seq->name] = {{"frames", ev.seq->size()}, {"msr", s.summary}, {"mpr", p.summary}};
    all_ov.insert(all_ov.end(), ov.begin(), ov.end());
    all_err.insert(all_err.end(), err.begin(), err.end());
  }
  bench::write_curve_csv(bench::success_curve(all_ov), (dir / "curves" / "ALL_success.csv").string(), "iou", "success");
  bench::write_curve_csv(bench::precision_curve(all_err, px), (dir / "curves" / "ALL_precision.csv").string(), "px", "precision");
  std::ofstream attr_csv(dir / "attributes.csv");
  attr_csv << "attribute,sequences,frames,msr,mpr\n" << std::setprecision(10);
  for (const auto& row : bench::attribute_report(evals, px)) {
    attr_csv << row.attribute << ',' << row.sequences << ',' << row.frames << ',' << row.msr << ',' << row.mpr << '\n';
    summary["attributes"][row.attribute] = {{"sequences", row.sequences}, {"frames", row.frames}, {"msr", row.msr}, {"mpr", row.mpr}};
  }
  summary["pr_threshold"] = px;
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
  std::cout << summary["attributes"]["ALL"].dump() << '\n';
  return 0;
}

int cmd_train_fusion(const std::string& pairs_dir, const std::string& config, const std::string& out, std::string loss_path) {
  const Config cfg = read_config(config, -1);
  const auto pairs = fusion::load_pairs(pairs_dir);
  if (pairs.empty()) throw DataError("no training pairs in '" + pairs_dir + "'");
  fusion::MfNet net = network(cfg);
  const fusion::TrainReport rep = fusion::mfnet_train(net, pairs, cfg.train);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  fusion::save_mfnet(net, out);
  if (loss_path.empty()) loss_path = out + ".loss.csv";
  std::ofstream trace(loss_path);
  if (!trace) throw DataError("cannot write '" + loss_path + "'");
  trace << "stage,epoch,mean_loss\n" << std::setprecision(10);
  trace << "init,0," << rep.initial_loss << '\n';
  for (const auto& e : rep.epochs) trace << fusion::to_string(e.stage) << ',' << e.epoch << ',' << e.mean_loss << '\n';
  trace << "final,0," << rep.final_loss << '\n';
  std::cout << "initial loss " << rep.initial_loss << ", final loss " << rep.final_loss << '\n';
  return 0;
}

int cmd_fuse(const std::string& rgb_path, const std::string& t_path, const std::string& checkpoint, const std::string& out,
             bool metrics) {
  const Image rgb = to_gray(load_image(rgb_path));
  const Image t = to_gray(load_image(t_path));
  if (rgb.width != t.width || rgb.height != t.height) throw DataError("visible and thermal images differ in size");
  fusion::MfNet net = fusion::load_mfnet(checkpoint);
  const int p = net.patch();
  const Point c{0.5 * rgb.width, 0.5 * rgb.height};
  const fusion::FusionWeights w = fusion::mfnet_forward(net, sample_patch(rgb, c, rgb.width, rgb.height, p, p),
                                                        sample_patch(t, c, t.width, t.height, p, p), rgb.width, rgb.height);
  const Image fused = fusion::fuse_images(rgb, t, w.w_f);
  save_image(fused, out);
  if (metrics) {
    const nlohmann::json j = {{"en", fusion::entropy(fused)},
                              {"mi", fusion::mutual_information(fused, rgb) + fusion::mutual_information(fused, t)},
                              {"mi_rgb", fusion::mutual_information(fused, rgb)},
                              {"mi_t", fusion::mutual_information(fused, t)},
                              {"ssim_rgb", fusion::ssim(fused, rgb)},
                              {"ssim_t", fusion::ssim(fused, t)},
                              {"w_g", w.w_g}};
    std::cout << j.dump() << '\n';
  }
  return 0;
}

synth::Scenario scenario(const std::string& path, const std::string& preset, std::uint64_t variant) {
  try {
    if (!path.empty()) return synth::load_scenario(path);
    return synth::preset(preset, variant);
  } catch (const RangeError& e) {
    throw DataError(std::string("invalid scenario: ") + e.what());
  }
}

int cmd_synth(const std::string& path, const std::string& preset, std::uint64_t variant, std::uint64_t seed, const std::string& out) {
  const synth::Scenario sc = scenario(path, preset, variant);
  const synth::Generated g = synth::generate(sc, seed);
  std::cout << synth::write_sequence(g, out) << '\n';
  return 0;
}

int cmd_make_pairs(const std::vector<std::string>& manifests, const std::string& config, const std::string& out,
                   const bench::PairOptions& opts) {
  const Config cfg = read_config(config, -1);
  std::vector<fusion::TrainPair> pairs;
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    bench::PairOptions o = opts;
    o.seed = opts.seed + i;
    auto p = bench::make_pairs(bench::load_sequence(manifests[i]), cfg.tracker, cfg.mfnet.patch, o);
    pairs.insert(pairs.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  }
  fusion::save_pairs(pairs, out);
  std::cout << pairs.size() << " pairs\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RGB-T tracking toolkit"};
  app.set_version_flag("--version", std::string("rgbt ") + RGBT_VERSION);
  std::string config;
  int workers = -1;
  bool print = false;
  app.add_option("--config", config, "configuration file (TOML-style)");
  app.add_option("--workers", workers, "parallel sequences; 0 = available cores")->check(CLI::NonNegativeNumber);
  app.add_flag("--print-config", print, "print the effective configuration and exit");

  std::vector<std::string> manifests;
  std::string out, ablation;
  auto* track = app.add_subcommand("track", "run one-pass evaluation on sequences");
  track->add_option("--manifest", manifests, "sequence manifest (repeatable)")->required();
  track->add_option("--config", config, "configuration file");
  track->add_option("--out", out, "trajectory file, or directory for several manifests")->required();
  track->add_option("--ablation", ablation, "MF, MF+CME, MF+CME+TMP or FULL");
  track->add_option("--workers", workers, "parallel sequences; 0 = available cores")->check(CLI::NonNegativeNumber);

  std::string results, manifest_dir;
  double px = -1.0;
  auto* eval = app.add_subcommand("eval", "score trajectories against ground truth");
  eval->add_option("--results", results, "directory of <sequence>.txt trajectories")->required();
  eval->add_option("--manifests", manifest_dir, "directory searched for manifest.json files")->required();
  eval->add_option("--out", out, "report directory")->required();
  eval->add_option("--pr-threshold", px, "precision threshold, px (default from config, 20)");
  eval->add_option("--config", config, "configuration file");

  std::string pairs_dir, loss;
  auto* train = app.add_subcommand("train-fusion", "train the fusion weight network");
  train->add_option("--pairs", pairs_dir, "directory of cached training pairs")->required();
  train->add_option("--config", config, "configuration file");
  train->add_option("--out", out, "checkpoint path")->required();
  train->add_option("--loss", loss, "loss trace CSV (default <out>.loss.csv)");

  std::string rgb_path, t_path, checkpoint;
  bool metrics = false;
  auto* fuse = app.add_subcommand("fuse", "fuse a visible/thermal image pair");
  fuse->add_option("--rgb", rgb_path, "visible image")->required();
  fuse->add_option("--t", t_path, "thermal image")->required();
  fuse->add_option("--checkpoint", checkpoint, "fusion network checkpoint")->required();
  fuse->add_option("--out", out, "fused image (PNG/PGM)")->required();
  fuse->add_flag("--metrics", metrics, "print EN/MI/SSIM as JSON");

  std::string scenario_path, preset;
  std::uint64_t seed = 1, variant = 0;
  auto* syn = app.add_subcommand("synth", "render a synthetic RGB-T sequence");
  auto* sc_opt = syn->add_option("--scenario", scenario_path, "scenario JSON");
  syn->add_option("--preset", preset, "named scenario instead of a file")->excludes(sc_opt);
  syn->add_option("--variant", variant, "preset variant");
  syn->add_option("--seed", seed, "noise seed");
  syn->add_option("--out", out, "output directory")->required();

  bench::PairOptions popts;
  auto* mp = app.add_subcommand("make-pairs", "cache fusion training pairs from sequences");
  mp->add_option("--manifest", manifests, "sequence manifest (repeatable)")->required();
  mp->add_option("--config", config, "configuration file");
  mp->add_option("--out", out, "output directory")->required();
  mp->add_option("--interval", popts.interval, "max frames between init and label frame");
  mp->add_option("--stride", popts.stride, "init frame stride");
  mp->add_option("--jitter", popts.jitter, "search centre jitter, fraction of target size");
  mp->add_option("--seed", popts.seed, "sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (print) {
      std::cout << print_config(read_config(config, workers));
      return 0;
    }
    if (*track) return cmd_track(manifests, config, out, ablation, workers);
    if (*eval) {
      const Config cfg = read_config(config, -1);
      return cmd_eval(results, manifest_dir, out, px >= 0.0 ? px : cfg.pr_threshold);
    }
    if (*train) return cmd_train_fusion(pairs_dir, config, out, loss);
    if (*fuse) return cmd_fuse(rgb_path, t_path, checkpoint, out, metrics);
    if (*syn) {
      if (scenario_path.empty() && preset.empty()) throw ConfigError("synth needs --scenario or --preset");
      return cmd_synth(scenario_path, preset, variant, seed, out);
    }
    if (*mp) return cmd_make_pairs(manifests, config, out, popts);
    std::cout << app.help();
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
}
