#pragma once

#include <span>
#include <vector>

#include "cutler/mask.hpp"
#include "cutler/rle.hpp"

namespace cutler {

inline constexpr double kDefaultTauIou = 0.01;

struct RegionPrediction {
  BoundingBox bbox;
  double loss_value = 0.0;  // externally computed per-region loss, >= 0
};

struct DropDecision {
  std::vector<bool> keep;
  std::vector<double> max_iou;
  double effective_loss = 0.0;  // sum of loss_value over kept regions

  std::size_t kept() const;
};

double box_iou(const BoundingBox& a, const BoundingBox& b);

/// A region keeps its loss iff its best IoU against the pseudo ground truth
/// is strictly above tau_iou; with no ground truth every region is dropped.
DropDecision drop_loss(std::span<const RegionPrediction> preds, std::span<const BoundingBox> gt,
                       double tau_iou = kDefaultTauIou);

/// Same indicator with mask IoU as the overlap measure.
DropDecision drop_loss_masks(std::span<const RleMask> preds, std::span<const double> losses,
                             std::span<const RleMask> gt, double tau_iou = kDefaultTauIou);

}  // namespace cutler
