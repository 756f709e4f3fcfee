#include "cutler/droploss.hpp"

#include <algorithm>

#include "cutler/error.hpp"

namespace cutler {
namespace {

void check_tau(double tau_iou) {
  if (!(tau_iou >= 0.0 && tau_iou < 1.0)) throw Error(Errc::invalid_argument, "tau_iou must lie in [0, 1)");
}

template <class IouOf>
DropDecision decide(std::size_t n_preds, std::span<const double> losses, IouOf&& iou_of, std::size_t n_gt,
                    double tau_iou) {
  DropDecision d;
  d.keep.resize(n_preds);
  d.max_iou.resize(n_preds);
  for (std::size_t i = 0; i < n_preds; ++i) {
    if (!(losses[i] >= 0.0)) throw Error(Errc::invalid_argument, "region loss must be non-negative");
    double best = 0.0;
    for (std::size_t j = 0; j < n_gt; ++j) best = std::max(best, iou_of(i, j));
    d.max_iou[i] = best;
    d.keep[i] = best > tau_iou;
    if (d.keep[i]) d.effective_loss += losses[i];
  }
  return d;
}

}  // namespace

std::size_t DropDecision::kept() const { return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true)); }

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const long long iw = std::min<long long>(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const long long ih = std::min<long long>(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (iw <= 0 || ih <= 0) return 0.0;
  const long long inter = iw * ih;
  const long long uni = a.area() + b.area() - inter;
  return uni <= 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

DropDecision drop_loss(std::span<const RegionPrediction> preds, std::span<const BoundingBox> gt, double tau_iou) {
  check_tau(tau_iou);
  std::vector<double> losses;
  losses.reserve(preds.size());
  for (const auto& p : preds) losses.push_back(p.loss_value);
  return decide(
      preds.size(), losses, [&](std::size_t i, std::size_t j) { return box_iou(preds[i].bbox, gt[j]); }, gt.size(),
      tau_iou);
}

DropDecision drop_loss_masks(std::span<const RleMask> preds, std::span<const double> losses,
                             std::span<const RleMask> gt, double tau_iou) {
  check_tau(tau_iou);
  if (losses.size() != preds.size()) throw Error(Errc::invalid_argument, "one loss value per prediction required");
  return decide(
      preds.size(), losses, [&](std::size_t i, std::size_t j) { return rle_iou(preds[i], gt[j]); }, gt.size(),
      tau_iou);
}

}  // namespace cutler
