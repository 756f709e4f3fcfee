#include "cutler/annotations.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace cutler {
namespace {

using Json = nlohmann::ordered_json;

const char* source_name(AnnotationSource s) {
  return s == AnnotationSource::maskcut ? "maskcut" : "prediction";
}

AnnotationSource parse_source(const std::string& name) {
  if (name == "maskcut") return AnnotationSource::maskcut;
  if (name == "prediction") return AnnotationSource::prediction;
  throw Error(Errc::parse_error, "unknown annotation source '" + name + "'");
}

Json to_json(const InstanceAnnotation& a) {
  Json j;
  j["bbox"] = {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h};
  j["score"] = a.score;
  j["segmentation"] = {{"counts", a.mask.counts}, {"size", {a.mask.height, a.mask.width}}};
  j["source"] = source_name(a.source);
  j["round"] = a.round;
  return j;
}

Json to_json(const AnnotationSet& s) {
  Json j;
  j["image_id"] = s.image_id;
  j["width"] = s.width;
  j["height"] = s.height;
  j["round"] = s.round;
  j["annotations"] = Json::array();
  for (const auto& a : s.annotations) j["annotations"].push_back(to_json(a));
  return j;
}

InstanceAnnotation annotation_from_json(const Json& j, const AnnotationSet& owner) {
  InstanceAnnotation a;
  const auto& seg = j.at("segmentation");
  const auto& size = seg.at("size");
  a.mask.height = size.at(0).get<int>();
  a.mask.width = size.at(1).get<int>();
  a.mask.counts = seg.at("counts").get<std::vector<std::uint32_t>>();
  const auto& box = j.at("bbox");
  if (box.size() != 4) throw Error(Errc::parse_error, "bbox must have 4 entries");
  a.bbox = {box[0].get<int>(), box[1].get<int>(), box[2].get<int>(), box[3].get<int>()};
  a.score = j.at("score").get<double>();
  a.source = parse_source(j.value("source", std::string("maskcut")));
  a.round = j.value("round", owner.round);
  return a;
}

AnnotationSet set_from_json(const Json& j) {
  AnnotationSet s;
  s.image_id = j.at("image_id").get<std::string>();
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  s.round = j.value("round", 0);
  for (const auto& a : j.at("annotations")) s.annotations.push_back(annotation_from_json(a, s));
  s.validate();
  return s;
}

}  // namespace

InstanceAnnotation InstanceAnnotation::from_mask(const PixelMask& mask, double score,
                                                 AnnotationSource source, int round) {
  InstanceAnnotation a;
  a.bbox = mask_to_bbox(mask);
  a.mask = encode_rle(mask);
  a.score = score;
  a.source = source;
  a.round = round;
  return a;
}

void AnnotationSet::validate() const {
  if (width <= 0 || height <= 0)
    throw Error(Errc::invalid_argument, "image '" + image_id + "' has non-positive size");
  if (round < 0) throw Error(Errc::invalid_argument, "round must be >= 0");
  for (const auto& a : annotations) {
    if (a.mask.width != width || a.mask.height != height)
      throw Error(Errc::invalid_argument, "mask size differs from image size in '" + image_id + "'");
    if (!(a.score >= 0.0 && a.score <= 1.0))
      throw Error(Errc::invalid_argument, "score outside [0,1] in '" + image_id + "'");
    if (a.bbox.w < 1 || a.bbox.h < 1 || a.bbox.x < 0 || a.bbox.y < 0 || a.bbox.x + a.bbox.w > width ||
        a.bbox.y + a.bbox.h > height)
      throw Error(Errc::invalid_argument, "bbox outside image in '" + image_id + "'");
    std::uint64_t sum = 0;
    for (auto c : a.mask.counts) sum += c;
    if (sum != static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height))
      throw Error(Errc::count_mismatch, "segmentation counts do not cover image '" + image_id + "'");
  }
}

std::string annotations_to_json(const std::vector<AnnotationSet>& sets) {
  Json doc = Json::array();
  for (const auto& s : sets) doc.push_back(to_json(s));
  return doc.dump(1) + "\n";
}

std::vector<AnnotationSet> annotations_from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(Errc::parse_error, e.what());
  }
  std::vector<AnnotationSet> sets;
  try {
    if (doc.is_array()) {
      for (const auto& j : doc) sets.push_back(set_from_json(j));
    } else {
      sets.push_back(set_from_json(doc));
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::parse_error, e.what());
  }
  return sets;
}

std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return annotations_from_json(buf.str());
}

void save_annotations(const std::vector<AnnotationSet>& sets, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  out << annotations_to_json(sets);
  if (!out) throw Error(Errc::io_failure, "failed writing " + path.string());
}

}  // namespace cutler
