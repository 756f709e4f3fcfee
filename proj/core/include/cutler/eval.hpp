#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cutler/annotations.hpp"

namespace cutler {

enum class IouKind { box, mask };

/// Class-agnostic COCO-protocol metrics. A metric is -1 when undefined
/// (no ground truth in the evaluated range), as the official tooling reports.
struct EvalResult {
  double ap = -1.0;    // mean over IoU 0.50:0.05:0.95
  double ap50 = -1.0;
  double ap75 = -1.0;
  double ar100 = -1.0;
  double ap_small = -1.0;   // area < 32^2
  double ap_medium = -1.0;  // 32^2 <= area <= 96^2
  double ap_large = -1.0;   // area > 96^2
  std::vector<double> iou_thresholds;
  std::vector<double> recall_thresholds;
  /// Interpolated precision per IoU threshold (rows) and recall threshold (columns), area "all".
  std::vector<std::vector<double>> precision;
  /// Final recall per IoU threshold, area "all".
  std::vector<double> recall;
};

/// One-to-one assignment: pred_match[d] is the matched ground-truth index or -1.
struct Matches {
  std::vector<int> pred_match;
  std::vector<int> gt_match;
};

/// Greedy matching over an IoU matrix (rows: predictions already in
/// descending score order; columns: ground truth). Each prediction takes the
/// unmatched ground truth of highest IoU >= iou_thresh.
Matches match_greedy(const std::vector<std::vector<double>>& ious, double iou_thresh);

/// Same, computing IoUs from the annotations.
Matches match_greedy(std::span<const InstanceAnnotation> preds_sorted, std::span<const InstanceAnnotation> gts,
                     double iou_thresh, IouKind kind);

double annotation_iou(const InstanceAnnotation& pred, const InstanceAnnotation& gt, IouKind kind);

/// 101-point interpolated AP of a ranked list of true/false positives.
/// Undefined (nullopt) when n_gt == 0.
std::optional<double> average_precision(const std::vector<bool>& is_true_positive, std::size_t n_gt);

/// COCO linspace grids.
std::vector<double> coco_iou_thresholds();
std::vector<double> coco_recall_thresholds();

/// Throws Errc::duplicate_image on repeated image ids and
/// Errc::image_mismatch for predictions on images without ground truth.
EvalResult evaluate(const std::vector<AnnotationSet>& preds, const std::vector<AnnotationSet>& gts, IouKind kind,
                    int max_detections = 100);

}  // namespace cutler
