// One line per acceptance criterion: PASS|FAIL <name> <measurements>.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cli/cli.hpp"
#include "cutler/droploss.hpp"
#include "cutler/eval.hpp"
#include "cutler/maskcut.hpp"
#include "cutler/postprocess.hpp"
#include "cutler/pseudolabels.hpp"
#include "fixtures.hpp"
#include "jacobi.hpp"
#include "naive_crf.hpp"

using namespace cutler;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("%s %s %s time=%.2fs\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Outcome eigen_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> n01;
  int accepted = 0, skipped = 0;
  double worst_lambda = 0, worst_vec = 0, worst_res = 0;
  while (accepted < 200) {
    const int gh = 2 + static_cast<int>(rng() % 7), gw = 2 + static_cast<int>(rng() % 7);
    const int n = gh * gw, dim = 2 + static_cast<int>(rng() % 8), centers = 1 + static_cast<int>(rng() % 4);
    Eigen::MatrixXd c(centers, dim), f(n, dim);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = n01(rng);
    const double spread = 0.2 + 0.8 * std::uniform_real_distribution<double>()(rng);
    for (int i = 0; i < n; ++i) {
      f.row(i) = c.row(static_cast<Eigen::Index>(rng() % centers));
      for (int j = 0; j < dim; ++j) f(i, j) += spread * n01(rng);
    }
    const double tau = std::uniform_real_distribution<double>(-0.2, 0.6)(rng);
    const AffinityMatrix a = threshold_affinity(build_affinity(FeatureMap(gh, gw, f)), tau);
    const auto o = oracle::ncut_oracle(fixtures::to_rows(a.weights));
    if (o.spectrum[1] - o.spectrum[0] < 1e-6 || o.spectrum[2] - o.spectrum[1] < 1e-6) {
      ++skipped;
      const EigenSolution s = solve_ncut(a);
      worst_res = std::max(worst_res, ncut_residual(a, s.eigenvalue, s.vector));
      continue;
    }
    ++accepted;
    const EigenSolution s = solve_ncut(a);
    double plus = 0, minus = 0;
    for (int i = 0; i < n; ++i) {
      plus = std::max(plus, std::abs(s.vector(i) - o.x[i]));
      minus = std::max(minus, std::abs(s.vector(i) + o.x[i]));
    }
    worst_lambda = std::max(worst_lambda, std::abs(s.eigenvalue - o.lambda));
    worst_vec = std::max(worst_vec, std::min(plus, minus));
    worst_res = std::max(worst_res, ncut_residual(a, s.eigenvalue, s.vector));
  }
  const double t = seconds_since(start);
  return {worst_lambda <= 1e-8 && worst_vec <= 1e-6 && worst_res <= 1e-6 && t < 10.0,
          fmt("cases=%d skipped_small_gap=%d max_dlambda=%.2e max_dvec=%.2e max_residual=%.2e", accepted, skipped,
              worst_lambda, worst_vec, worst_res)};
}

Outcome planted_recovery() {
  const auto start = Clock::now();
  double worst_noisy = 1.0, worst_clean = 1.0;
  int runs = 0;
  for (int blocks = 1; blocks <= 3; ++blocks) {
    const auto& lay = fixtures::layout(blocks);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      for (double sigma : {0.0, 0.05}) {
        if (sigma == 0.0 && seed > 0) continue;
        const auto r = maskcut(fixtures::planted(lay, sigma, seed), {blocks, kDefaultTauNcut});
        ++runs;
        for (const auto& b : lay) {
          double best = 0;
          for (const auto& m : r.masks) best = std::max(best, mask_iou(m, fixtures::block_mask(b)));
          (sigma == 0.0 ? worst_clean : worst_noisy) = std::min(sigma == 0.0 ? worst_clean : worst_noisy, best);
        }
      }
    }
  }
  const double t = seconds_since(start);
  return {worst_noisy >= 0.9 && worst_clean == 1.0 && t < 5.0,
          fmt("runs=%d min_iou_sigma0.05=%.4f min_iou_sigma0=%.4f", runs, worst_noisy, worst_clean)};
}

Outcome foreground_exhaustive() {
  const auto start = Clock::now();
  long checked = 0, violations = 0;
  const std::array<int, 4> corners{0, 3, 12, 15};
  for (unsigned bits = 0; bits < (1u << 16); ++bits) {
    PatchMask m(4, 4);
    for (int i = 0; i < 16; ++i) m.set(static_cast<std::size_t>(i), (bits >> i) & 1u);
    for (int peak = 0; peak < 16; ++peak) {
      Eigen::VectorXd x = Eigen::VectorXd::Constant(16, 0.25);
      x(peak) = -1.0;
      const PatchMask out = select_foreground(m, x);
      ++checked;
      int c = 0, cc = 0;
      for (int k : corners) {
        c += out[static_cast<std::size_t>(k)];
        cc += !out[static_cast<std::size_t>(k)];
      }
      const bool orientation_ok = out == m || out == m.complement();
      if (!orientation_ok || !(c <= 1 || cc >= 2)) ++violations;
    }
  }
  const double t = seconds_since(start);
  return {violations == 0 && t < 1.0, fmt("cases=%ld violations=%ld", checked, violations)};
}

Outcome crf_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(55);
  std::size_t mismatched = 0, fixtures_run = 0;
  double worst_norm = 0;
  const auto run_case = [&](const ImageBuffer& img, const PixelMask& mask) {
    CrfParams p;
    const CrfTrace t = crf_refine_traced(img, mask, p);
    oracle::CrfSetup s;
    s.width = img.width();
    s.height = img.height();
    s.channels = img.channels();
    s.pixels.assign(img.data().begin(), img.data().end());
    s.mask.assign(mask.bits().begin(), mask.bits().end());
    const auto o = oracle::naive_mean_field(s);
    for (std::size_t i = 0; i < mask.size(); ++i) mismatched += (t.labels[i] ? 1 : 0) != o.labels[i];
    for (double e : t.normalization_error) worst_norm = std::max(worst_norm, e);
    for (double e : o.normalization_error) worst_norm = std::max(worst_norm, e);
    ++fixtures_run;
    return t.labels;
  };

  ImageBuffer edge(32, 32, 3);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      for (int c = 0; c < 3; ++c) edge.at(x, y, c) = x < 16 ? 40 : 210;
  const PixelMask truth = fixtures::rect_mask(32, 32, 0, 0, 16, 32);
  const PixelMask offset = fixtures::rect_mask(32, 32, 0, 0, 18, 32);
  const PixelMask snapped = run_case(edge, offset);
  const double iou_before = mask_iou(offset, truth), iou_after = mask_iou(snapped, truth);

  for (int k = 0; k < 3; ++k) {
    ImageBuffer img(32, 32, 3);
    const int bx = 8 + static_cast<int>(rng() % 16), by = 8 + static_cast<int>(rng() % 16);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x)
        for (int c = 0; c < 3; ++c)
          img.at(x, y, c) = static_cast<std::uint8_t>((x < bx) == (y < by) ? 60 + rng() % 6 : 180 + rng() % 6);
    run_case(img, fixtures::random_mask(rng, 32, 32, 0.5));
  }
  const double t = seconds_since(start);
  return {mismatched == 0 && worst_norm <= 1e-9 && iou_after > iou_before && t < 10.0,
          fmt("fixtures=%zu label_mismatches=%zu max_norm_err=%.2e edge_iou %.4f->%.4f", fixtures_run, mismatched,
              worst_norm, iou_before, iou_after)};
}

Outcome evaluator_conformance() {
  const fs::path dir = fixtures::data_dir() / "eval";
  const auto gts = load_annotations(dir / "gt.json");
  const auto preds = load_annotations(dir / "preds.json");
  std::ifstream in(dir / "golden.json");
  const auto golden = nlohmann::json::parse(in);
  double worst = 0;
  for (auto [kind, name] : {std::pair{IouKind::box, "box"}, std::pair{IouKind::mask, "mask"}}) {
    const auto r = evaluate(preds, gts, kind);
    const auto& g = golden.at(name);
    worst = std::max({worst, std::abs(r.ap - g.at("ap").get<double>()),
                      std::abs(r.ap50 - g.at("ap50").get<double>()), std::abs(r.ap75 - g.at("ap75").get<double>()),
                      std::abs(r.ar100 - g.at("ar100").get<double>())});
  }
  return {worst <= 1e-6, fmt("images=%zu max_abs_diff=%.2e", gts.size(), worst)};
}

double raster_iou(const BoundingBox& a, const BoundingBox& b) {
  const int x1 = std::max(a.x + a.w, b.x + b.w), y1 = std::max(a.y + a.h, b.y + b.h);
  long inter = 0, uni = 0;
  for (int y = std::min(a.y, b.y); y < y1; ++y)
    for (int x = std::min(a.x, b.x); x < x1; ++x) {
      const bool ia = x >= a.x && x < a.x + a.w && y >= a.y && y < a.y + a.h;
      const bool ib = x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
      inter += ia && ib;
      uni += ia || ib;
    }
  return uni ? static_cast<double>(inter) / uni : 0.0;
}

Outcome droploss_sweep() {
  // Predictions on a 6x6 lattice of 8x8 boxes with stride 5 against 3 GT boxes.
  std::vector<RegionPrediction> preds;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) preds.push_back({{c * 5, r * 5, 8, 8}, 1.0 + r + c});
  const std::vector<BoundingBox> gt{{0, 0, 10, 10}, {12, 7, 6, 9}, {22, 20, 12, 5}};
  int mismatches = 0, monotone_breaks = 0;
  std::size_t previous = preds.size() + 1;
  std::string counts;
  for (double tau : {0.0, 0.01, 0.1, 0.2}) {
    const auto d = drop_loss(preds, gt, tau);
    double expected_loss = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      double best = 0;
      for (const auto& g : gt) best = std::max(best, raster_iou(preds[i].bbox, g));
      const bool keep = best > tau;
      if (keep != d.keep[i] || std::abs(best - d.max_iou[i]) > 1e-12) ++mismatches;
      if (keep) expected_loss += preds[i].loss_value;
    }
    if (std::abs(expected_loss - d.effective_loss) > 1e-9) ++mismatches;
    if (d.kept() > previous) ++monotone_breaks;
    previous = d.kept();
    counts += fmt("%s%g:%zu", counts.empty() ? "" : ",", tau, d.kept());
  }
  return {mismatches == 0 && monotone_breaks == 0,
          fmt("regions=%zu kept_by_tau={%s} mismatches=%d", preds.size(), counts.c_str(), mismatches)};
}

Outcome merge_fuzz() {
  std::mt19937_64 rng(777);
  long violations = 0, bookkeeping = 0, pairs = 0;
  const auto random_set = [&](int count, int round) {
    AnnotationSet s{"img", 24, 18, round, {}};
    for (int i = 0; i < count; ++i) {
      PixelMask m = fixtures::random_mask(rng, 24, 18, 0.0);
      const int bw = 1 + static_cast<int>(rng() % 12), bh = 1 + static_cast<int>(rng() % 10);
      const int x = static_cast<int>(rng() % (24 - bw + 1)), y = static_cast<int>(rng() % (18 - bh + 1));
      for (int yy = y; yy < y + bh; ++yy)
        for (int xx = x; xx < x + bw; ++xx)
          if (rng() % 5) m.set(xx, yy, true);
      if (m.empty()) m.set(x, y, true);
      s.annotations.push_back(InstanceAnnotation::from_mask(
          m, std::uniform_real_distribution<double>()(rng),
          round ? AnnotationSource::prediction : AnnotationSource::maskcut, round));
    }
    return s;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const AnnotationSet gt = random_set(static_cast<int>(rng() % 7), 0);
    const AnnotationSet preds = random_set(static_cast<int>(rng() % 7), 1);
    const int round = 1 + static_cast<int>(rng() % 3);
    const auto [out, rep] = merge_round(gt, preds, round);
    if (rep.kept_gt + rep.dropped_gt != gt.annotations.size() ||
        out.annotations.size() != rep.kept_gt + rep.added_pred)
      ++bookkeeping;
    for (const auto& g : out.annotations) {
      if (g.source != AnnotationSource::maskcut) continue;
      const PixelMask gm = decode_rle(g.mask);
      for (const auto& p : out.annotations) {
        if (p.source != AnnotationSource::prediction) continue;
        ++pairs;
        if (mask_iou(gm, decode_rle(p.mask)) > 0.5) ++violations;
      }
    }
  }
  const double t1 = confidence_threshold(1), t2 = confidence_threshold(2), t3 = confidence_threshold(3);
  return {violations == 0 && bookkeeping == 0 && t1 == 0.25 && t2 == 0.0 && t3 == 0.0,
          fmt("cases=1000 pairs_checked=%ld violations=%ld thresholds={%g,%g,%g}", pairs, violations, t1, t2, t3)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  fixtures::TempDir dir("accept_det");
  const fs::path corpus = fixtures::data_dir() / "corpus";
  std::ostringstream sink;
  int codes = 0;
  for (const char* name : {"a.json", "b.json"}) {
    cli::MaskCutCommand cmd{corpus / "features", corpus / "images", dir / name, {}};
    codes += cli::run_maskcut(cmd, sink, sink);
  }
  const std::string a = slurp(dir / "a.json"), b = slurp(dir / "b.json");
  return {codes == 0 && !a.empty() && a == b, fmt("exit_codes_sum=%d bytes=%zu identical=%s", codes, a.size(),
                                                  a == b ? "yes" : "no")};
}

}  // namespace

int main() {
  report("eigen-oracle-equivalence", eigen_oracle);
  report("planted-object-recovery", planted_recovery);
  report("foreground-criteria-exhaustive", foreground_exhaustive);
  report("crf-oracle", crf_oracle);
  report("evaluator-conformance", evaluator_conformance);
  report("droploss-indicator-sweep", droploss_sweep);
  report("merge-semantics", merge_fuzz);
  report("maskcut-determinism", determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
