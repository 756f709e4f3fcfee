#include <ostream>

#include <CLI11.hpp>

#include "cli/cli.hpp"
#include "cutler/error.hpp"

namespace cutler::cli {
namespace {

template <class T>
void override_if(const CLI::Option* opt, T& target, const T& value) {
  if (opt->count() > 0) target = value;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised multi-object mask discovery and pseudo-label tooling", "cutler"};
  app.require_subcommand(1);

  // maskcut
  MaskCutCommand mc;
  std::string config_path;
  double tau_ncut = 0;
  int num_masks = 0, image_size = 0, jobs = 0;
  bool no_crf = false;
  auto* maskcut = app.add_subcommand("maskcut", "Discover instance masks from patch features");
  maskcut->add_option("--features", mc.features, "Directory of <id>.ctf feature tensors")->required();
  maskcut->add_option("--images", mc.images, "Directory of <id>.ppm/.pgm images")->required();
  maskcut->add_option("--out", mc.out, "Output annotation file")->required();
  auto* o_config = maskcut->add_option("--config", config_path, "key = value configuration file");
  auto* o_tau = maskcut->add_option("--tau-ncut", tau_ncut, "Affinity binarization threshold");
  auto* o_masks = maskcut->add_option("--num-masks", num_masks, "Masks per image");
  auto* o_size = maskcut->add_option("--image-size", image_size, "Square working size, 0 for native");
  auto* o_nocrf = maskcut->add_flag("--no-crf", no_crf, "Skip CRF refinement");
  auto* o_jobs = maskcut->add_option("--jobs", jobs, "Worker threads");

  // merge
  MergeCommand mg;
  auto* merge = app.add_subcommand("merge", "Merge a self-training round into the pseudo labels");
  merge->add_option("--gt", mg.gt, "Current pseudo ground truth")->required();
  merge->add_option("--preds", mg.preds, "Model predictions for this round")->required();
  merge->add_option("--round", mg.round, "Round index t >= 1")->required();
  merge->add_option("--out", mg.out, "Merged annotation file")->required();

  // eval
  EvalCommand ev;
  std::string eval_kind = "mask";
  std::string pr_csv;
  auto* eval = app.add_subcommand("eval", "Class-agnostic AP/AR");
  eval->add_option("--preds", ev.preds, "Predictions")->required();
  eval->add_option("--gt", ev.gt, "Ground truth")->required();
  eval->add_option("--iou-kind", eval_kind, "box or mask")->check(CLI::IsMember({"box", "mask"}));
  auto* o_csv = eval->add_option("--pr-csv", pr_csv, "Write precision/recall curves");

  // visualize
  VisualizeCommand vz;
  std::string image_id;
  auto* visualize = app.add_subcommand("visualize", "Overlay masks and boxes on an image");
  visualize->add_option("--image", vz.image, "Input P5/P6 image")->required();
  visualize->add_option("--annotations", vz.annotations, "Annotation file")->required();
  visualize->add_option("--out", vz.out, "Output P6 image")->required();
  auto* o_id = visualize->add_option("--image-id", image_id, "Annotation set to draw (default: image file stem)");

  // droploss-audit
  DropLossAuditCommand da;
  std::string da_config;
  std::string da_kind;
  double tau_iou = 0;
  auto* audit = app.add_subcommand("droploss-audit", "Count regions whose loss would be kept or dropped");
  audit->add_option("--preds", da.preds, "Predicted regions")->required();
  audit->add_option("--gt", da.gt, "Pseudo ground truth")->required();
  auto* o_da_config = audit->add_option("--config", da_config, "key = value configuration file");
  auto* o_tau_iou = audit->add_option("--tau-iou", tau_iou, "Overlap threshold");
  auto* o_da_kind = audit->add_option("--iou-kind", da_kind, "box or mask")->check(CLI::IsMember({"box", "mask"}));

  // copy-paste
  CopyPasteCommand cp;
  auto* paste = app.add_subcommand("copy-paste", "Paste one donor instance into a host image");
  paste->add_option("--donor-image", cp.donor_image, "Donor image")->required();
  paste->add_option("--donor-annotations", cp.donor_annotations, "Donor annotations")->required();
  paste->add_option("--host", cp.host, "Host image")->required();
  paste->add_option("--out-image", cp.out_image, "Composited image")->required();
  paste->add_option("--out-annotations", cp.out_annotations, "Annotation of the pasted instance")->required();
  paste->add_option("--seed", cp.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (maskcut->parsed()) {
      if (o_config->count() > 0) apply_config_file(mc.config, config_path);
      override_if(o_tau, mc.config.tau_ncut, tau_ncut);
      override_if(o_masks, mc.config.n_masks, num_masks);
      override_if(o_size, mc.config.image_size, image_size);
      override_if(o_nocrf, mc.config.use_crf, !no_crf);
      override_if(o_jobs, mc.config.jobs, jobs);
      if (o_jobs->count() > 0 && jobs < 1) throw Error(Errc::invalid_argument, "--jobs must be >= 1");
      return run_maskcut(mc, out, err);
    }
    if (merge->parsed()) return run_merge(mg, out, err);
    if (eval->parsed()) {
      ev.iou_kind = parse_iou_kind(eval_kind);
      if (o_csv->count() > 0) ev.pr_csv = pr_csv;
      return run_eval(ev, out, err);
    }
    if (visualize->parsed()) {
      if (o_id->count() > 0) vz.image_id = image_id;
      return run_visualize(vz, out, err);
    }
    if (audit->parsed()) {
      PipelineConfig config;
      if (o_da_config->count() > 0) apply_config_file(config, da_config);
      override_if(o_tau_iou, config.tau_iou, tau_iou);
      if (o_da_kind->count() > 0) config.droploss_iou = parse_iou_kind(da_kind);
      config.validate();
      da.tau_iou = config.tau_iou;
      da.iou_kind = config.droploss_iou;
      return run_droploss_audit(da, out, err);
    }
    if (paste->parsed()) return run_copy_paste(cp, out, err);
  } catch (const std::exception& e) {
    err << "cutler: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace cutler::cli
