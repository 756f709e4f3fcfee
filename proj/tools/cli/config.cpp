#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "cli/cli.hpp"
#include "cutler/error.hpp"

namespace cutler::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end)
    throw Error(Errc::parse_error, "bad value for '" + std::string(key) + "': '" + std::string(value) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(Errc::parse_error, "bad boolean for '" + std::string(key) + "': '" + std::string(value) + "'");
}

CrfPath parse_crf_path(std::string_view value) {
  if (value == "automatic") return CrfPath::automatic;
  if (value == "direct") return CrfPath::direct;
  if (value == "lattice") return CrfPath::lattice;
  throw Error(Errc::parse_error, "unknown crf.path '" + std::string(value) + "'");
}

void apply(PipelineConfig& c, std::string_view key, std::string_view value) {
  if (key == "tau_ncut") c.tau_ncut = parse_number<double>(key, value);
  else if (key == "n_masks") c.n_masks = parse_number<int>(key, value);
  else if (key == "image_size") c.image_size = parse_number<int>(key, value);
  else if (key == "tau_iou") c.tau_iou = parse_number<double>(key, value);
  else if (key == "use_crf") c.use_crf = parse_bool(key, value);
  else if (key == "rounds") c.rounds = parse_number<int>(key, value);
  else if (key == "rng_seed") c.rng_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "jobs") c.jobs = parse_number<int>(key, value);
  else if (key == "droploss.iou_kind") c.droploss_iou = parse_iou_kind(value);
  else if (key == "crf.n_iters") c.crf.n_iters = parse_number<int>(key, value);
  else if (key == "crf.w_appearance") c.crf.w_appearance = parse_number<double>(key, value);
  else if (key == "crf.w_smoothness") c.crf.w_smoothness = parse_number<double>(key, value);
  else if (key == "crf.theta_alpha") c.crf.theta_alpha = parse_number<double>(key, value);
  else if (key == "crf.theta_beta") c.crf.theta_beta = parse_number<double>(key, value);
  else if (key == "crf.theta_gamma") c.crf.theta_gamma = parse_number<double>(key, value);
  else if (key == "crf.unary_fg_prob") c.crf.unary_fg_prob = parse_number<double>(key, value);
  else if (key == "crf.path") c.crf.path = parse_crf_path(value);
  else throw Error(Errc::parse_error, "unknown config key '" + std::string(key) + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(tau_ncut >= -1.0 && tau_ncut <= 1.0)) throw Error(Errc::invalid_argument, "tau_ncut must lie in [-1, 1]");
  if (n_masks < 1) throw Error(Errc::invalid_argument, "n_masks must be >= 1");
  if (image_size < 0 || image_size == 1) throw Error(Errc::invalid_argument, "image_size must be 0 or >= 2");
  if (!(tau_iou >= 0.0 && tau_iou < 1.0)) throw Error(Errc::invalid_argument, "tau_iou must lie in [0, 1)");
  if (rounds < 1) throw Error(Errc::invalid_argument, "rounds must be >= 1");
  if (jobs < 0) throw Error(Errc::invalid_argument, "jobs must be >= 0");
  crf.validate();
}

void apply_config_text(PipelineConfig& config, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::parse_error, "config line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(Errc::parse_error, "config line " + std::to_string(line_no) + ": empty key or value");
    apply(config, key, value);
  }
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(config, ss.str());
}

int resolve_jobs(int flag_jobs) {
  if (flag_jobs > 0) return flag_jobs;
  if (const char* env = std::getenv("CUTLER_CORE_JOBS"); env && *env) {
    const int v = parse_number<int>("CUTLER_CORE_JOBS", trim(env));
    if (v < 1) throw Error(Errc::invalid_argument, "CUTLER_CORE_JOBS must be >= 1");
    return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

IouKind parse_iou_kind(std::string_view text) {
  if (text == "box") return IouKind::box;
  if (text == "mask") return IouKind::mask;
  throw Error(Errc::parse_error, "iou kind must be 'box' or 'mask', got '" + std::string(text) + "'");
}

}  // namespace cutler::cli
