#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rgbt/bench.hpp"
#include "rgbt/error.hpp"
#include "rgbt/synth.hpp"

using namespace rgbt;
using namespace rgbt::bench;

namespace fs = std::filesystem;

namespace {

Sequence boxes_only(std::vector<Box> gt_rgb, std::vector<Box> gt_t) {
  Sequence s;
  s.name = "s";
  s.gt_rgb = std::move(gt_rgb);
  s.gt_t = std::move(gt_t);
  return s;
}

// Direct recomputation of the success AUC from its definition.
double auc_oracle(const std::vector<double>& ov) {
  double sum = 0.0;
  for (int k = 0; k <= 20; ++k) {
    int n = 0;
    for (double v : ov) n += v > k / 20.0 ? 1 : 0;
    sum += static_cast<double>(n) / static_cast<double>(ov.size());
  }
  return sum / 21.0;
}

}  // namespace

TEST(Metrics, PerfectTrajectory) {
  const std::vector<Box> gt = {{0, 0, 10, 10}, {5, 5, 10, 10}, {9, 3, 8, 12}};
  const Sequence s = boxes_only(gt, gt);
  // IoU 1 passes every threshold except 1.0 itself (strict comparison)
  EXPECT_NEAR(msr(gt, s).summary, 20.0 / 21.0, 1e-12);
  EXPECT_NEAR(mpr(gt, s).summary, 1.0, 1e-12);
}

TEST(Metrics, MaxOverModalities) {
  const Sequence s = boxes_only({{0, 0, 10, 10}}, {{20, 0, 10, 10}});
  EXPECT_DOUBLE_EQ(overlaps({{20, 0, 10, 10}}, s)[0], 1.0);
  EXPECT_DOUBLE_EQ(center_errors({{2, 0, 10, 10}}, s)[0], 2.0);
}

TEST(Metrics, CurvesMatchOracleAndAreMonotone) {
  Rng rng(4);
  std::vector<double> ov, err;
  for (int i = 0; i < 300; ++i) {
    ov.push_back(rng.uniform() < 0.1 ? 0.05 * static_cast<double>(rng.below(21)) : rng.uniform());
    err.push_back(rng.uniform(0, 60));
  }
  const Curve sc = success_curve(ov);
  EXPECT_NEAR(sc.summary, auc_oracle(ov), 1e-12);
  for (std::size_t i = 1; i < sc.values.size(); ++i) EXPECT_LE(sc.values[i], sc.values[i - 1]);
  const Curve pc = precision_curve(err, 20.0);
  for (std::size_t i = 1; i < pc.values.size(); ++i) EXPECT_GE(pc.values[i], pc.values[i - 1]);
  const auto n = std::count_if(err.begin(), err.end(), [](double e) { return e <= 20.0; });
  EXPECT_NEAR(pc.summary, static_cast<double>(n) / 300.0, 1e-12);
  EXPECT_EQ(sc.thresholds.size(), 21u);
  EXPECT_EQ(pc.thresholds.size(), 51u);
}

TEST(Metrics, AttributeReportUsesFrameUnion) {
  Sequence a = boxes_only({{0, 0, 10, 10}, {0, 0, 10, 10}}, {{0, 0, 10, 10}, {0, 0, 10, 10}});
  a.name = "a";
  a.attributes = {"OCC"};
  Sequence b = boxes_only({{0, 0, 10, 10}}, {{0, 0, 10, 10}});
  b.name = "b";
  const std::vector<Evaluated> ev = {{&a, {{0, 0, 10, 10}, {50, 50, 10, 10}}}, {&b, {{0, 0, 10, 10}}}};
  const auto rows = attribute_report(ev);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].attribute, "OCC");
  EXPECT_EQ(rows[0].frames, 2u);
  EXPECT_EQ(rows[1].attribute, "ALL");
  EXPECT_EQ(rows[1].sequences, 2u);
  EXPECT_NEAR(rows[1].mpr, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(rows[1].msr, auc_oracle({1.0, 0.0, 1.0}), 1e-12);
}

TEST(Io, BoxesRoundTripAndErrors) {
  const fs::path dir = fs::temp_directory_path() / "rgbt_test_bench";
  fs::create_directories(dir);
  const std::vector<Box> b = {{1.5, 2, 30, 40}, {0, 0, 1, 1}};
  write_boxes(b, (dir / "b.txt").string());
  EXPECT_EQ(read_boxes((dir / "b.txt").string()), b);
  std::ofstream(dir / "bad.txt") << "1,2,3\n";
  EXPECT_THROW(read_boxes((dir / "bad.txt").string()), DataError);
  EXPECT_THROW(load_sequence((dir / "none.json").string()), DataError);
  fs::remove_all(dir);
}

TEST(Io, ManifestLoadsWrittenSequence) {
  const fs::path dir = fs::temp_directory_path() / "rgbt_test_bench_seq";
  synth::Scenario sc = synth::preset("static");
  sc.frames = 4;
  const synth::Generated g = synth::generate(sc, 3);
  const std::string manifest = synth::write_sequence(g, dir.string());
  const Sequence s = load_sequence(manifest);
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(s.rgb_paths.size(), 4u);
  EXPECT_EQ(s.rgb(2), g.seq.rgb(2));
  EXPECT_EQ(s.gt_t, g.seq.gt_t);
  EXPECT_EQ(s.name, g.seq.name);
  fs::remove_all(dir);
}

TEST(Validate, CountMismatch) {
  Sequence s = boxes_only({{0, 0, 1, 1}}, {{0, 0, 1, 1}, {0, 0, 1, 1}});
  EXPECT_THROW(validate(s), DataError);
}

TEST(Ope, DeterministicAndParallelConsistent) {
  synth::Scenario sc = synth::preset("moving", 2);
  sc.frames = 12;
  const synth::Generated g = synth::generate(sc, 1);
  TrackerConfig cfg;
  cfg.fusion = FusionMode::constant;
  const fusion::MfNet net;
  const Trajectory a = run_ope(g.seq, cfg, net);
  const Trajectory b = run_ope(g.seq, cfg, net);
  EXPECT_EQ(a.boxes, b.boxes);
  EXPECT_EQ(a.boxes.size(), g.seq.size());
  EXPECT_EQ(a.boxes[0], g.seq.gt_t[0]);
  const auto many = run_many({&g.seq, &g.seq}, cfg, net, 2);
  EXPECT_EQ(many[1].boxes, a.boxes);
}

TEST(Pairs, ShapesAndLabelPeak) {
  synth::Scenario sc = synth::preset("moving", 0);
  sc.frames = 12;
  const synth::Generated g = synth::generate(sc, 1);
  TrackerConfig cfg;
  PairOptions opts;
  opts.stride = 4;
  const auto pairs = make_pairs(g.seq, cfg, 32, opts);
  ASSERT_FALSE(pairs.empty());
  for (const auto& p : pairs) {
    EXPECT_EQ(p.p_rgb.width, 32);
    EXPECT_EQ(p.p_t.height, 32);
    EXPECT_TRUE(p.y.same_shape(p.r_rgb));
    EXPECT_TRUE(p.y.same_shape(p.r_t));
    EXPECT_NEAR(*std::max_element(p.y.data.begin(), p.y.data.end()), 1.0, 0.2);
  }
  EXPECT_EQ(make_pairs(g.seq, cfg, 32, opts), pairs);
}
