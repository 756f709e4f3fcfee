#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cutler/mask.hpp"
#include "cutler/rle.hpp"

namespace cutler {

enum class AnnotationSource { maskcut, prediction };

/// One discovered object: run-length mask, its tight box and a confidence.
struct InstanceAnnotation {
  RleMask mask;
  BoundingBox bbox;
  double score = 0.0;
  AnnotationSource source = AnnotationSource::maskcut;
  int round = 0;

  /// Builds an annotation whose box is the tight box of `mask`.
  static InstanceAnnotation from_mask(const PixelMask& mask, double score, AnnotationSource source,
                                      int round);

  long long area() const { return static_cast<long long>(rle_area(mask)); }
};

/// All annotations for one image.
struct AnnotationSet {
  std::string image_id;
  int width = 0;
  int height = 0;
  int round = 0;
  std::vector<InstanceAnnotation> annotations;

  /// Checks mask sizes, score range and box consistency; throws Errc::invalid_argument.
  void validate() const;
};

/// JSON schema per image:
///   {"image_id", "width", "height", "round",
///    "annotations": [{"bbox": [x,y,w,h], "score", "segmentation": {"counts": [...], "size": [h,w]},
///                     "source", "round"}]}
/// An annotation file holds either one such object or an array of them.
std::string annotations_to_json(const std::vector<AnnotationSet>& sets);
std::vector<AnnotationSet> annotations_from_json(const std::string& text);

std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::vector<AnnotationSet>& sets, const std::filesystem::path& path);

}  // namespace cutler
