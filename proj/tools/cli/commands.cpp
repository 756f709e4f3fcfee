#include <algorithm>
#include <array>
#include <atomic>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

#include <nlohmann/json.hpp>

#include "cli/cli.hpp"
#include "cutler/droploss.hpp"
#include "cutler/error.hpp"
#include "cutler/maskcut.hpp"
#include "cutler/pseudolabels.hpp"
#include "cutler/tensor_io.hpp"

namespace fs = std::filesystem;

namespace cutler::cli {
namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 10> kPalette{{
    {31, 119, 180},
    {255, 127, 14},
    {44, 160, 44},
    {214, 39, 40},
    {148, 103, 189},
    {140, 86, 75},
    {227, 119, 194},
    {127, 127, 127},
    {188, 189, 34},
    {23, 190, 207},
}};

bool is_image_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

std::map<std::string, fs::path> list_dir(const fs::path& dir, bool images) {
  if (!fs::is_directory(dir)) throw Error(Errc::io_failure, "not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    if (images ? !is_image_file(p) : p.extension() != ".ctf") continue;
    if (!out.emplace(p.stem().string(), p).second)
      throw Error(Errc::duplicate_image, "several files for image '" + p.stem().string() + "' in " + dir.string());
  }
  return out;
}

struct ImageJob {
  std::string image_id;
  std::optional<fs::path> image;
  std::optional<fs::path> features;
};

struct ImageOutcome {
  std::variant<AnnotationSet, std::string> value;
  std::uint64_t overlap_px = 0;
};

ImageOutcome process_image(const ImageJob& job, const PipelineConfig& config) {
  if (!job.image) return {"no image for features " + job.features->string()};
  if (!job.features) return {"no features for image " + job.image->string()};
  try {
    const ImageBuffer image = load_image(*job.image).to_rgb();
    const FeatureMap features = FeatureMap::from_tensor(load_tensor(*job.features));
    const int work_w = config.image_size > 0 ? config.image_size : image.width();
    const int work_h = config.image_size > 0 ? config.image_size : image.height();
    const bool resized = work_w != image.width() || work_h != image.height();
    const ImageBuffer work = resized ? resize_image(image, work_w, work_h) : image;

    const MaskCutResult result = maskcut(features, {config.n_masks, config.tau_ncut});

    AnnotationSet set{job.image_id, image.width(), image.height(), 0, {}};
    std::vector<std::uint16_t> cover(image.pixel_count(), 0);
    ImageOutcome outcome;
    for (std::size_t k = 0; k < result.masks.size(); ++k) {
      PixelMask mask = upsample_mask(result.masks[k], work_w, work_h);
      if (config.use_crf) mask = crf_refine(work, mask, config.crf);
      if (resized) mask = resize_mask(mask, image.width(), image.height());
      if (mask.empty()) continue;
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && cover[i]++ == 1) ++outcome.overlap_px;
      const double score = score_mask(result.eigen[k], result.masks[k]);
      set.annotations.push_back(InstanceAnnotation::from_mask(mask, score, AnnotationSource::maskcut, 0));
    }
    outcome.value = std::move(set);
    return outcome;
  } catch (const std::exception& e) {
    return {std::string(e.what())};
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(Errc::io_failure, "write failed: " + path.string());
}

std::map<std::string, const AnnotationSet*> index_sets(const std::vector<AnnotationSet>& sets,
                                                       const fs::path& origin) {
  std::map<std::string, const AnnotationSet*> out;
  for (const auto& s : sets)
    if (!out.emplace(s.image_id, &s).second)
      throw Error(Errc::duplicate_image, "image '" + s.image_id + "' repeated in " + origin.string());
  return out;
}

void draw_box(ImageBuffer& img, const BoundingBox& b, const std::array<std::uint8_t, 3>& color) {
  const auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
    for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[static_cast<std::size_t>(c)];
  };
  for (int x = b.x; x < b.x + b.w; ++x) {
    put(x, b.y);
    put(x, b.y + b.h - 1);
  }
  for (int y = b.y; y < b.y + b.h; ++y) {
    put(b.x, y);
    put(b.x + b.w - 1, y);
  }
}

}  // namespace

int run_maskcut(const MaskCutCommand& cmd, std::ostream& out, std::ostream& err) {
  std::vector<ImageJob> jobs;
  int threads = 1;
  try {
    cmd.config.validate();
    threads = resolve_jobs(cmd.config.jobs);
    const auto images = list_dir(cmd.images, true);
    const auto features = list_dir(cmd.features, false);
    std::map<std::string, ImageJob> merged;
    for (const auto& [id, p] : images) merged[id].image = p;
    for (const auto& [id, p] : features) merged[id].features = p;
    for (auto& [id, job] : merged) {
      job.image_id = id;
      jobs.push_back(std::move(job));
    }
  } catch (const std::exception& e) {
    err << "maskcut: " << e.what() << '\n';
    return kExitConfig;
  }
  if (jobs.empty()) {
    err << "maskcut: no inputs found\n";
    return kExitConfig;
  }

  std::vector<ImageOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) outcomes[i] = process_image(jobs[i], cmd.config);
  };
  {
    std::vector<std::jthread> pool;
    const auto extra = std::min<std::size_t>(static_cast<std::size_t>(threads), jobs.size()) - 1;
    for (std::size_t t = 0; t < extra; ++t) pool.emplace_back(worker);
    worker();
  }

  std::vector<AnnotationSet> sets;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (const auto* msg = std::get_if<std::string>(&outcomes[i].value)) {
      ++failures;
      err << jobs[i].image_id << ": " << *msg << '\n';
      continue;
    }
    auto& set = std::get<AnnotationSet>(outcomes[i].value);
    out << set.image_id << " instances=" << set.annotations.size() << " overlap_px=" << outcomes[i].overlap_px
        << '\n';
    sets.push_back(std::move(set));
  }
  try {
    save_annotations(sets, cmd.out);
  } catch (const std::exception& e) {
    err << "maskcut: " << e.what() << '\n';
    return kExitConfig;
  }
  out << "images=" << jobs.size() << " failed=" << failures << '\n';
  return failures == 0 ? kExitOk : kExitPartial;
}

int run_merge(const MergeCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    const auto gt = load_annotations(cmd.gt);
    const auto preds = load_annotations(cmd.preds);
    const auto gt_index = index_sets(gt, cmd.gt);
    const auto pred_index = index_sets(preds, cmd.preds);
    for (const auto& [id, set] : pred_index)
      if (!gt_index.contains(id)) throw Error(Errc::image_mismatch, "predictions for unknown image '" + id + "'");

    std::vector<AnnotationSet> merged;
    MergeReport total;
    for (const auto& [id, g] : gt_index) {
      const auto it = pred_index.find(id);
      AnnotationSet empty{g->image_id, g->width, g->height, g->round, {}};
      auto [set, report] = merge_round(*g, it == pred_index.end() ? empty : *it->second, cmd.round);
      total += report;
      merged.push_back(std::move(set));
    }
    save_annotations(merged, cmd.out);
    out << "kept_gt=" << total.kept_gt << " dropped_gt=" << total.dropped_gt << " added_pred=" << total.added_pred
        << " threshold=" << total.threshold_used << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "merge: " << e.what() << '\n';
    return kExitConfig;
  }
}

int run_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    const auto result = evaluate(load_annotations(cmd.preds), load_annotations(cmd.gt), cmd.iou_kind);
    nlohmann::ordered_json j;
    j["iou_kind"] = cmd.iou_kind == IouKind::box ? "box" : "mask";
    j["ap"] = result.ap;
    j["ap50"] = result.ap50;
    j["ap75"] = result.ap75;
    j["ar100"] = result.ar100;
    j["ap_small"] = result.ap_small;
    j["ap_medium"] = result.ap_medium;
    j["ap_large"] = result.ap_large;
    out << j.dump(1) << '\n';
    if (cmd.pr_csv) {
      std::ostringstream csv;
      csv.precision(17);
      csv << "iou_threshold,recall_threshold,precision\n";
      for (std::size_t t = 0; t < result.precision.size(); ++t)
        for (std::size_t r = 0; r < result.recall_thresholds.size(); ++r)
          csv << result.iou_thresholds[t] << ',' << result.recall_thresholds[r] << ',' << result.precision[t][r]
              << '\n';
      write_text(*cmd.pr_csv, csv.str());
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "eval: " << e.what() << '\n';
    return kExitConfig;
  }
}

ImageBuffer render_overlay(const ImageBuffer& image, const AnnotationSet& set) {
  ImageBuffer img = image.to_rgb();
  if (set.width != img.width() || set.height != img.height())
    throw Error(Errc::image_mismatch, "annotation size differs from image for '" + set.image_id + "'");
  for (std::size_t k = 0; k < set.annotations.size(); ++k) {
    const auto& color = kPalette[k % kPalette.size()];
    const PixelMask mask = decode_rle(set.annotations[k].mask);
    auto data = img.data();
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        auto& v = data[i * 3 + c];
        v = static_cast<std::uint8_t>((v + color[c] + 1) / 2);
      }
    }
  }
  for (std::size_t k = 0; k < set.annotations.size(); ++k)
    draw_box(img, set.annotations[k].bbox, kPalette[k % kPalette.size()]);
  return img;
}

int run_visualize(const VisualizeCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    const ImageBuffer image = load_image(cmd.image);
    const auto sets = load_annotations(cmd.annotations);
    const std::string id = cmd.image_id.value_or(cmd.image.stem().string());
    const AnnotationSet* chosen = nullptr;
    for (const auto& s : sets)
      if (s.image_id == id) chosen = &s;
    if (!chosen && !cmd.image_id && sets.size() == 1) chosen = &sets.front();
    if (!chosen) throw Error(Errc::image_mismatch, "no annotations for image '" + id + "'");
    save_image(render_overlay(image, *chosen), cmd.out);
    out << chosen->image_id << " instances=" << chosen->annotations.size() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "visualize: " << e.what() << '\n';
    return kExitConfig;
  }
}

int run_droploss_audit(const DropLossAuditCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    const auto preds = load_annotations(cmd.preds);
    const auto gt = load_annotations(cmd.gt);
    const auto pred_index = index_sets(preds, cmd.preds);
    const auto gt_index = index_sets(gt, cmd.gt);
    std::size_t total = 0, kept = 0;
    for (const auto& [id, p] : pred_index) {
      const auto it = gt_index.find(id);
      const std::vector<InstanceAnnotation> none;
      const auto& g = it == gt_index.end() ? none : it->second->annotations;
      DropDecision d;
      if (cmd.iou_kind == IouKind::box) {
        std::vector<RegionPrediction> regions;
        for (const auto& a : p->annotations) regions.push_back({a.bbox, 1.0});
        std::vector<BoundingBox> boxes;
        for (const auto& a : g) boxes.push_back(a.bbox);
        d = drop_loss(regions, boxes, cmd.tau_iou);
      } else {
        std::vector<RleMask> masks, gt_masks;
        for (const auto& a : p->annotations) masks.push_back(a.mask);
        for (const auto& a : g) gt_masks.push_back(a.mask);
        const std::vector<double> losses(masks.size(), 1.0);
        d = drop_loss_masks(masks, losses, gt_masks, cmd.tau_iou);
      }
      const std::size_t k = d.kept();
      out << id << " regions=" << d.keep.size() << " kept=" << k << " dropped=" << d.keep.size() - k << '\n';
      total += d.keep.size();
      kept += k;
    }
    out << "total regions=" << total << " kept=" << kept << " dropped=" << total - kept << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "droploss-audit: " << e.what() << '\n';
    return kExitConfig;
  }
}

int run_copy_paste(const CopyPasteCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    const ImageBuffer donor_image = load_image(cmd.donor_image).to_rgb();
    const auto donors = load_annotations(cmd.donor_annotations);
    const std::string donor_id = cmd.donor_image.stem().string();
    const AnnotationSet* donor = nullptr;
    for (const auto& s : donors)
      if (s.image_id == donor_id) donor = &s;
    if (!donor && donors.size() == 1) donor = &donors.front();
    if (!donor) throw Error(Errc::image_mismatch, "no annotations for donor '" + donor_id + "'");
    const ImageBuffer host = load_image(cmd.host).to_rgb();

    PasteResult r;
    try {
      r = copy_paste(donor_image, *donor, host, cmd.seed);
    } catch (const Error& e) {
      if (e.code() != Errc::placement_failed) throw;
      err << "copy-paste: " << e.what() << '\n';
      return kExitPartial;
    }
    save_image(r.image, cmd.out_image);
    AnnotationSet set{cmd.host.stem().string(), host.width(), host.height(), 0, {r.annotation}};
    save_annotations({set}, cmd.out_annotations);
    out << "instance=" << r.placement.instance << " scale=" << r.placement.scale << " x=" << r.placement.x
        << " y=" << r.placement.y << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "copy-paste: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace cutler::cli
