#pragma once

#include <cstdint>
#include <utility>

#include "cutler/annotations.hpp"
#include "cutler/image.hpp"

namespace cutler {

inline constexpr double kDedupIou = 0.5;
inline constexpr double kMinPasteScale = 0.3;
inline constexpr double kMaxPasteScale = 1.0;
inline constexpr int kPasteAttempts = 10;

struct MergeReport {
  std::size_t kept_gt = 0;
  std::size_t dropped_gt = 0;
  std::size_t added_pred = 0;
  double threshold_used = 0.0;

  MergeReport& operator+=(const MergeReport& other);
};

/// Score a round-t prediction must exceed to become a pseudo label:
/// max(0.75 - 0.5 t, 0). `round` must be an integer >= 1.
double confidence_threshold(double round);

/// Keeps predictions scoring above confidence_threshold(round), drops every
/// ground-truth instance whose mask IoU with a kept prediction exceeds 0.5,
/// and returns kept ground truth followed by kept predictions, labelled
/// round + 1. Throws Errc::image_mismatch if the two sets describe different images.
std::pair<AnnotationSet, MergeReport> merge_round(const AnnotationSet& gt, const AnnotationSet& preds,
                                                  int round);

struct PastePlacement {
  std::size_t instance = 0;
  double scale = 1.0;
  int x = 0;
  int y = 0;
};

struct PasteResult {
  ImageBuffer image;
  InstanceAnnotation annotation;
  PastePlacement placement;
};

/// Pastes donor instance `placement.instance`, cropped to its box and
/// resampled by `placement.scale`, with its top-left corner at (x, y).
/// Scaled extent is max(1, floor(extent * scale)) per axis.
PasteResult paste_instance(const ImageBuffer& donor_image, const AnnotationSet& donor,
                           const ImageBuffer& host, const PastePlacement& placement);

/// Draws instance, scale ~ U[0.3, 1.0] and position uniformly from `seed`,
/// retrying up to kPasteAttempts times when the scaled instance does not fit.
/// Throws Errc::placement_failed when every attempt fails.
PasteResult copy_paste(const ImageBuffer& donor_image, const AnnotationSet& donor, const ImageBuffer& host,
                       std::uint64_t seed);

}  // namespace cutler
