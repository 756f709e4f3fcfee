#include "cutler/pseudolabels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cutler/error.hpp"
#include "cutler/postprocess.hpp"

namespace cutler {
namespace {

// Uniform double in [0, 1) from the top 53 bits; keeps sampling identical
// across standard library implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>(unit_uniform(rng) * static_cast<double>(bound));
}

int scaled_extent(int extent, double scale) {
  return std::max(1, static_cast<int>(std::floor(extent * scale)));
}

}  // namespace

MergeReport& MergeReport::operator+=(const MergeReport& other) {
  kept_gt += other.kept_gt;
  dropped_gt += other.dropped_gt;
  added_pred += other.added_pred;
  threshold_used = other.threshold_used;
  return *this;
}

double confidence_threshold(double round) {
  if (!(round >= 1.0) || std::floor(round) != round)
    throw Error(Errc::invalid_argument, "round index must be an integer >= 1");
  return std::max(0.75 - 0.5 * round, 0.0);
}

std::pair<AnnotationSet, MergeReport> merge_round(const AnnotationSet& gt, const AnnotationSet& preds,
                                                  int round) {
  if (gt.image_id != preds.image_id || gt.width != preds.width || gt.height != preds.height)
    throw Error(Errc::image_mismatch, "cannot merge '" + preds.image_id + "' into '" + gt.image_id + "'");

  MergeReport report;
  report.threshold_used = confidence_threshold(round);

  std::vector<const InstanceAnnotation*> retained;
  for (const auto& p : preds.annotations)
    if (p.score > report.threshold_used) retained.push_back(&p);

  AnnotationSet out;
  out.image_id = gt.image_id;
  out.width = gt.width;
  out.height = gt.height;
  out.round = round + 1;
  for (const auto& g : gt.annotations) {
    const bool duplicate = std::any_of(retained.begin(), retained.end(),
                                       [&](const InstanceAnnotation* p) { return rle_iou(g.mask, p->mask) > kDedupIou; });
    if (duplicate) {
      ++report.dropped_gt;
    } else {
      ++report.kept_gt;
      out.annotations.push_back(g);
    }
  }
  for (const auto* p : retained) {
    InstanceAnnotation a = *p;
    a.source = AnnotationSource::prediction;
    a.round = round;
    out.annotations.push_back(std::move(a));
    ++report.added_pred;
  }
  return {std::move(out), report};
}

PasteResult paste_instance(const ImageBuffer& donor_image, const AnnotationSet& donor, const ImageBuffer& host,
                           const PastePlacement& placement) {
  if (placement.instance >= donor.annotations.size())
    throw Error(Errc::invalid_argument, "donor instance index out of range");
  if (donor_image.width() != donor.width || donor_image.height() != donor.height)
    throw Error(Errc::image_mismatch, "donor image and annotations differ in size");
  if (donor_image.channels() != host.channels())
    throw Error(Errc::image_mismatch, "donor and host channel counts differ");
  if (!(placement.scale > 0.0)) throw Error(Errc::invalid_argument, "paste scale must be positive");

  const auto& inst = donor.annotations[placement.instance];
  const PixelMask full = decode_rle(inst.mask);
  const BoundingBox box = mask_to_bbox(full);

  PixelMask crop_mask(box.w, box.h);
  ImageBuffer crop(box.w, box.h, donor_image.channels());
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      crop_mask.set(x, y, full.at(box.x + x, box.y + y));
      for (int c = 0; c < donor_image.channels(); ++c) crop.at(x, y, c) = donor_image.at(box.x + x, box.y + y, c);
    }
  }

  const int w = scaled_extent(box.w, placement.scale);
  const int h = scaled_extent(box.h, placement.scale);
  if (placement.x < 0 || placement.y < 0 || placement.x + w > host.width() || placement.y + h > host.height())
    throw Error(Errc::placement_failed, "scaled instance does not fit at the requested position");

  const PixelMask small_mask = resize_mask(crop_mask, w, h);
  const ImageBuffer small = resize_image(crop, w, h);
  if (small_mask.empty()) throw Error(Errc::placement_failed, "instance vanished after scaling");

  PasteResult result{host, {}, placement};
  PixelMask pasted(host.width(), host.height());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!small_mask.at(x, y)) continue;
      pasted.set(placement.x + x, placement.y + y, true);
      for (int c = 0; c < host.channels(); ++c)
        result.image.at(placement.x + x, placement.y + y, c) = small.at(x, y, c);
    }
  }
  result.annotation = InstanceAnnotation::from_mask(pasted, inst.score, inst.source, inst.round);
  return result;
}

PasteResult copy_paste(const ImageBuffer& donor_image, const AnnotationSet& donor, const ImageBuffer& host,
                       std::uint64_t seed) {
  if (donor.annotations.empty()) throw Error(Errc::invalid_argument, "donor has no instances");
  std::mt19937_64 rng(seed);
  PastePlacement placement;
  placement.instance = static_cast<std::size_t>(uniform_index(rng, donor.annotations.size()));
  const BoundingBox box = mask_to_bbox(decode_rle(donor.annotations[placement.instance].mask));

  for (int attempt = 0; attempt < kPasteAttempts; ++attempt) {
    placement.scale = kMinPasteScale + (kMaxPasteScale - kMinPasteScale) * unit_uniform(rng);
    const int w = scaled_extent(box.w, placement.scale);
    const int h = scaled_extent(box.h, placement.scale);
    if (w > host.width() || h > host.height()) continue;
    placement.x = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(host.width() - w + 1)));
    placement.y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(host.height() - h + 1)));
    try {
      return paste_instance(donor_image, donor, host, placement);
    } catch (const Error& e) {
      if (e.code() != Errc::placement_failed) throw;
    }
  }
  throw Error(Errc::placement_failed, "no valid placement after " + std::to_string(kPasteAttempts) + " attempts");
}

}  // namespace cutler
