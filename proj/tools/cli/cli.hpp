#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "cutler/eval.hpp"
#include "cutler/postprocess.hpp"

namespace cutler::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitPartial = 1,
  kExitConfig = 2,
};

struct PipelineConfig {
  double tau_ncut = 0.15;
  int n_masks = 3;
  int image_size = 480;  // square working resolution; 0 keeps the native size
  double tau_iou = 0.01;
  CrfParams crf;
  bool use_crf = true;
  int rounds = 3;
  std::uint64_t rng_seed = 0;
  int jobs = 0;  // 0 = unset
  IouKind droploss_iou = IouKind::box;

  void validate() const;
};

/// `key = value` lines; `#` starts a comment. Unknown keys are errors.
void apply_config_text(PipelineConfig& config, std::string_view text);
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// --jobs, then CUTLER_CORE_JOBS, then the processor count.
int resolve_jobs(int flag_jobs);

IouKind parse_iou_kind(std::string_view text);

struct MaskCutCommand {
  std::filesystem::path features;
  std::filesystem::path images;
  std::filesystem::path out;
  PipelineConfig config;
};

struct MergeCommand {
  std::filesystem::path gt;
  std::filesystem::path preds;
  std::filesystem::path out;
  int round = 1;
};

struct EvalCommand {
  std::filesystem::path preds;
  std::filesystem::path gt;
  IouKind iou_kind = IouKind::mask;
  std::optional<std::filesystem::path> pr_csv;
};

struct VisualizeCommand {
  std::filesystem::path image;
  std::filesystem::path annotations;
  std::filesystem::path out;
  std::optional<std::string> image_id;
};

struct DropLossAuditCommand {
  std::filesystem::path preds;
  std::filesystem::path gt;
  double tau_iou = 0.01;
  IouKind iou_kind = IouKind::box;
};

struct CopyPasteCommand {
  std::filesystem::path donor_image;
  std::filesystem::path donor_annotations;
  std::filesystem::path host;
  std::filesystem::path out_image;
  std::filesystem::path out_annotations;
  std::uint64_t seed = 0;
};

int run_maskcut(const MaskCutCommand& cmd, std::ostream& out, std::ostream& err);
int run_merge(const MergeCommand& cmd, std::ostream& out, std::ostream& err);
int run_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& err);
int run_visualize(const VisualizeCommand& cmd, std::ostream& out, std::ostream& err);
int run_droploss_audit(const DropLossAuditCommand& cmd, std::ostream& out, std::ostream& err);
int run_copy_paste(const CopyPasteCommand& cmd, std::ostream& out, std::ostream& err);

/// The palette-blend overlay used by `visualize`.
ImageBuffer render_overlay(const ImageBuffer& image, const AnnotationSet& set);

/// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cutler::cli
