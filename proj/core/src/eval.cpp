#include "cutler/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "cutler/droploss.hpp"
#include "cutler/error.hpp"

namespace cutler {
namespace {

constexpr double kSpacingOne = std::numeric_limits<double>::epsilon();

// numpy.linspace arithmetic, so thresholds match the reference bit for bit.
std::vector<double> linspace(double start, double stop, int num) {
  std::vector<double> v(static_cast<std::size_t>(num));
  const double step = (stop - start) / (num - 1);
  for (int i = 0; i < num; ++i) v[static_cast<std::size_t>(i)] = static_cast<double>(i) * step + start;
  v.back() = stop;
  return v;
}

struct AreaRange {
  double lo;
  double hi;
};

constexpr AreaRange kAreaAll{0.0, 1e10};
constexpr AreaRange kAreaSmall{0.0, 32.0 * 32.0};
constexpr AreaRange kAreaMedium{32.0 * 32.0, 96.0 * 96.0};
constexpr AreaRange kAreaLarge{96.0 * 96.0, 1e10};

// Greedy matching with ignore semantics: ground truth is ordered with
// ignored entries last, and a prediction matched to regular ground truth
// never switches to an ignored one.
Matches match_with_ignore(const std::vector<std::vector<double>>& ious, double thresh,
                          const std::vector<bool>& gt_ignore) {
  const std::size_t d = ious.size();
  const std::size_t g = gt_ignore.size();
  Matches m{std::vector<int>(d, -1), std::vector<int>(g, -1)};
  for (std::size_t di = 0; di < d; ++di) {
    double best = std::min(thresh, 1.0 - 1e-10);
    int match = -1;
    for (std::size_t gi = 0; gi < g; ++gi) {
      if (m.gt_match[gi] >= 0) continue;
      if (match > -1 && !gt_ignore[static_cast<std::size_t>(match)] && gt_ignore[gi]) break;
      if (ious[di][gi] < best) continue;
      best = ious[di][gi];
      match = static_cast<int>(gi);
    }
    if (match == -1) continue;
    m.pred_match[di] = match;
    m.gt_match[static_cast<std::size_t>(match)] = static_cast<int>(di);
  }
  return m;
}

struct ImageEval {
  std::vector<double> scores;               // kept detections, descending
  std::vector<std::vector<bool>> matched;   // [threshold][detection]
  std::vector<std::vector<bool>> ignored;   // [threshold][detection]
  std::size_t regular_gt = 0;
};

double detection_area(const InstanceAnnotation& a, IouKind kind) {
  return kind == IouKind::box ? static_cast<double>(a.bbox.area()) : static_cast<double>(a.area());
}

std::optional<ImageEval> evaluate_image(const AnnotationSet* gt_set, const AnnotationSet* dt_set, IouKind kind,
                                        const AreaRange& range, const std::vector<double>& thresholds,
                                        int max_detections) {
  const std::size_t n_gt = gt_set ? gt_set->annotations.size() : 0;
  const std::size_t n_dt_all = dt_set ? dt_set->annotations.size() : 0;
  if (n_gt == 0 && n_dt_all == 0) return std::nullopt;

  // Ground truth: regular first, ignored last, each group in input order.
  std::vector<std::size_t> gt_order;
  std::vector<bool> gt_ignore;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < n_gt; ++i) {
      const double area = static_cast<double>(gt_set->annotations[i].area());
      const bool ignore = area < range.lo || area > range.hi;
      if (ignore == (pass == 1)) {
        gt_order.push_back(i);
        gt_ignore.push_back(ignore);
      }
    }
  }

  std::vector<std::size_t> dt_order(n_dt_all);
  std::iota(dt_order.begin(), dt_order.end(), std::size_t{0});
  std::stable_sort(dt_order.begin(), dt_order.end(), [&](std::size_t a, std::size_t b) {
    return dt_set->annotations[a].score > dt_set->annotations[b].score;
  });
  if (dt_order.size() > static_cast<std::size_t>(max_detections))
    dt_order.resize(static_cast<std::size_t>(max_detections));
  const std::size_t n_dt = dt_order.size();

  std::vector<std::vector<double>> ious(n_dt, std::vector<double>(n_gt, 0.0));
  for (std::size_t d = 0; d < n_dt; ++d)
    for (std::size_t g = 0; g < n_gt; ++g)
      ious[d][g] = annotation_iou(dt_set->annotations[dt_order[d]], gt_set->annotations[gt_order[g]], kind);

  ImageEval out;
  out.regular_gt = static_cast<std::size_t>(std::count(gt_ignore.begin(), gt_ignore.end(), false));
  for (auto idx : dt_order) out.scores.push_back(dt_set->annotations[idx].score);
  for (double t : thresholds) {
    const Matches m = match_with_ignore(ious, t, gt_ignore);
    std::vector<bool> matched(n_dt), ignored(n_dt);
    for (std::size_t d = 0; d < n_dt; ++d) {
      const int g = m.pred_match[d];
      matched[d] = g >= 0;
      if (g >= 0) {
        ignored[d] = gt_ignore[static_cast<std::size_t>(g)];
      } else {
        const double area = detection_area(dt_set->annotations[dt_order[d]], kind);
        ignored[d] = area < range.lo || area > range.hi;
      }
    }
    out.matched.push_back(std::move(matched));
    out.ignored.push_back(std::move(ignored));
  }
  return out;
}

struct Accumulated {
  std::vector<std::vector<double>> precision;  // -1 rows when undefined
  std::vector<double> recall;                  // -1 when undefined
};

Accumulated accumulate(const std::vector<ImageEval>& images, const std::vector<double>& thresholds,
                       const std::vector<double>& recall_thresholds) {
  Accumulated acc;
  const std::size_t n_t = thresholds.size();
  const std::size_t n_r = recall_thresholds.size();
  acc.precision.assign(n_t, std::vector<double>(n_r, -1.0));
  acc.recall.assign(n_t, -1.0);

  std::vector<double> scores;
  std::size_t regular_gt = 0;
  for (const auto& img : images) {
    scores.insert(scores.end(), img.scores.begin(), img.scores.end());
    regular_gt += img.regular_gt;
  }
  if (regular_gt == 0) return acc;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  for (std::size_t t = 0; t < n_t; ++t) {
    std::vector<bool> matched, ignored;
    for (const auto& img : images) {
      matched.insert(matched.end(), img.matched[t].begin(), img.matched[t].end());
      ignored.insert(ignored.end(), img.ignored[t].begin(), img.ignored[t].end());
    }
    std::vector<double> rc, pr;
    double tp = 0.0, fp = 0.0;
    for (auto idx : order) {
      if (ignored[idx]) continue;
      if (matched[idx]) tp += 1.0;
      else fp += 1.0;
      rc.push_back(tp / static_cast<double>(regular_gt));
      pr.push_back(tp / (fp + tp + kSpacingOne));
    }
    acc.recall[t] = rc.empty() ? 0.0 : rc.back();
    for (std::size_t i = pr.size(); i-- > 1;)
      if (pr[i] > pr[i - 1]) pr[i - 1] = pr[i];
    std::vector<double> q(n_r, 0.0);
    for (std::size_t r = 0; r < n_r; ++r) {
      const auto pos = std::lower_bound(rc.begin(), rc.end(), recall_thresholds[r]) - rc.begin();
      if (static_cast<std::size_t>(pos) >= pr.size()) break;
      q[r] = pr[static_cast<std::size_t>(pos)];
    }
    acc.precision[t] = std::move(q);
  }
  return acc;
}

double mean_defined(const std::vector<std::vector<double>>& rows, std::size_t only_row = SIZE_MAX) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (only_row != SIZE_MAX && t != only_row) continue;
    for (double v : rows[t])
      if (v > -1.0) {
        sum += v;
        ++count;
      }
  }
  return count == 0 ? -1.0 : sum / static_cast<double>(count);
}

double mean_defined(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : values)
    if (v > -1.0) {
      sum += v;
      ++count;
    }
  return count == 0 ? -1.0 : sum / static_cast<double>(count);
}

}  // namespace

std::vector<double> coco_iou_thresholds() {
  return linspace(0.5, 0.95, static_cast<int>(std::round((0.95 - 0.5) / 0.05)) + 1);
}

std::vector<double> coco_recall_thresholds() {
  return linspace(0.0, 1.0, static_cast<int>(std::round((1.0 - 0.0) / 0.01)) + 1);
}

double annotation_iou(const InstanceAnnotation& pred, const InstanceAnnotation& gt, IouKind kind) {
  return kind == IouKind::box ? box_iou(pred.bbox, gt.bbox) : rle_iou(pred.mask, gt.mask);
}

Matches match_greedy(const std::vector<std::vector<double>>& ious, double iou_thresh) {
  const std::size_t g = ious.empty() ? 0 : ious.front().size();
  for (const auto& row : ious)
    if (row.size() != g) throw Error(Errc::invalid_argument, "ragged IoU matrix");
  return match_with_ignore(ious, iou_thresh, std::vector<bool>(g, false));
}

Matches match_greedy(std::span<const InstanceAnnotation> preds_sorted, std::span<const InstanceAnnotation> gts,
                     double iou_thresh, IouKind kind) {
  std::vector<std::vector<double>> ious(preds_sorted.size(), std::vector<double>(gts.size()));
  for (std::size_t d = 0; d < preds_sorted.size(); ++d)
    for (std::size_t g = 0; g < gts.size(); ++g) ious[d][g] = annotation_iou(preds_sorted[d], gts[g], kind);
  return match_with_ignore(ious, iou_thresh, std::vector<bool>(gts.size(), false));
}

std::optional<double> average_precision(const std::vector<bool>& is_true_positive, std::size_t n_gt) {
  if (n_gt == 0) return std::nullopt;
  ImageEval img;
  img.regular_gt = n_gt;
  img.matched.push_back({});
  img.ignored.push_back({});
  // Already ranked: give strictly decreasing scores so the stable sort keeps order.
  for (std::size_t i = 0; i < is_true_positive.size(); ++i) {
    img.scores.push_back(-static_cast<double>(i));
    img.matched[0].push_back(is_true_positive[i]);
    img.ignored[0].push_back(false);
  }
  const auto acc = accumulate({img}, {0.5}, coco_recall_thresholds());
  return mean_defined(acc.precision);
}

EvalResult evaluate(const std::vector<AnnotationSet>& preds, const std::vector<AnnotationSet>& gts, IouKind kind,
                    int max_detections) {
  if (max_detections < 1) throw Error(Errc::invalid_argument, "max_detections must be >= 1");
  std::map<std::string, const AnnotationSet*> gt_by_id, dt_by_id;
  for (const auto& s : gts)
    if (!gt_by_id.emplace(s.image_id, &s).second)
      throw Error(Errc::duplicate_image, "ground truth repeats image '" + s.image_id + "'");
  for (const auto& s : preds) {
    if (!dt_by_id.emplace(s.image_id, &s).second)
      throw Error(Errc::duplicate_image, "predictions repeat image '" + s.image_id + "'");
    const auto it = gt_by_id.find(s.image_id);
    if (it == gt_by_id.end())
      throw Error(Errc::image_mismatch, "predictions for unknown image '" + s.image_id + "'");
    if (it->second->width != s.width || it->second->height != s.height)
      throw Error(Errc::image_mismatch, "image size differs for '" + s.image_id + "'");
  }

  EvalResult result;
  result.iou_thresholds = coco_iou_thresholds();
  result.recall_thresholds = coco_recall_thresholds();

  const auto run = [&](const AreaRange& range) {
    std::vector<ImageEval> images;
    for (const auto& [id, gt] : gt_by_id) {
      const auto dt = dt_by_id.find(id);
      auto img = evaluate_image(gt, dt == dt_by_id.end() ? nullptr : dt->second, kind, range, result.iou_thresholds,
                                max_detections);
      if (img) images.push_back(std::move(*img));
    }
    return accumulate(images, result.iou_thresholds, result.recall_thresholds);
  };

  const Accumulated all = run(kAreaAll);
  result.ap = mean_defined(all.precision);
  result.ap50 = mean_defined(all.precision, 0);
  result.ap75 = mean_defined(all.precision, 5);
  result.ar100 = mean_defined(all.recall);
  result.precision = all.precision;
  result.recall = all.recall;
  result.ap_small = mean_defined(run(kAreaSmall).precision);
  result.ap_medium = mean_defined(run(kAreaMedium).precision);
  result.ap_large = mean_defined(run(kAreaLarge).precision);
  return result;
}

}  // namespace cutler
