#include <algorithm>
#include <cmath>
#include <vector>

#include "cutler/error.hpp"
#include "cutler/postprocess.hpp"
#include "permutohedral.hpp"

namespace cutler {
namespace {

struct Unary {
  std::vector<double> bg;
  std::vector<double> fg;
};

Unary make_unary(const PixelMask& mask, double fg_prob) {
  const double on = -std::log(fg_prob);
  const double off = -std::log(1.0 - fg_prob);
  Unary u{std::vector<double>(mask.size()), std::vector<double>(mask.size())};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    u.fg[i] = mask[i] ? on : off;
    u.bg[i] = mask[i] ? off : on;
  }
  return u;
}

// Exact O(n^2) messages: msg_i(l) = sum_{j != i} K_ij Q_j(l), j ascending, with
// K_ij = w_a exp(-dp/2a^2) exp(-dc/2b^2) + w_s exp(-dp/2g^2). Exponentials come
// from tables indexed by integer squared distances.
class DirectMessages {
 public:
  DirectMessages(const ImageBuffer& image, const CrfParams& p)
      : image_(image), p_(p), w_(image.width()), h_(image.height()) {
    const auto sq = [](int v) { return static_cast<double>(v) * v; };
    const std::size_t max_p = static_cast<std::size_t>(sq(w_ - 1) + sq(h_ - 1));
    pos_app_.resize(max_p + 1);
    pos_smooth_.resize(max_p + 1);
    for (std::size_t dp = 0; dp <= max_p; ++dp) {
      pos_app_[dp] = std::exp(-static_cast<double>(dp) / (2.0 * p.theta_alpha * p.theta_alpha));
      pos_smooth_[dp] = std::exp(-static_cast<double>(dp) / (2.0 * p.theta_gamma * p.theta_gamma));
    }
    const std::size_t max_c = static_cast<std::size_t>(image.channels()) * 255 * 255;
    color_.resize(max_c + 1);
    for (std::size_t dc = 0; dc <= max_c; ++dc)
      color_[dc] = std::exp(-static_cast<double>(dc) / (2.0 * p.theta_beta * p.theta_beta));
  }

  void compute(const std::vector<double>& q_bg, const std::vector<double>& q_fg, std::vector<double>& m_bg,
               std::vector<double>& m_fg) const {
    const int n = w_ * h_;
    const int channels = image_.channels();
    const auto data = image_.data();
    for (int i = 0; i < n; ++i) {
      const int xi = i % w_, yi = i / w_;
      const std::uint8_t* ci = data.data() + static_cast<std::size_t>(i) * channels;
      double acc_bg = 0.0, acc_fg = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const int dx = xi - j % w_, dy = yi - j / w_;
        const auto dp = static_cast<std::size_t>(dx * dx + dy * dy);
        const std::uint8_t* cj = data.data() + static_cast<std::size_t>(j) * channels;
        std::size_t dc = 0;
        for (int c = 0; c < channels; ++c) {
          const int diff = static_cast<int>(ci[c]) - static_cast<int>(cj[c]);
          dc += static_cast<std::size_t>(diff * diff);
        }
        const double k = p_.w_appearance * (pos_app_[dp] * color_[dc]) + p_.w_smoothness * pos_smooth_[dp];
        acc_bg += k * q_bg[static_cast<std::size_t>(j)];
        acc_fg += k * q_fg[static_cast<std::size_t>(j)];
      }
      m_bg[static_cast<std::size_t>(i)] = acc_bg;
      m_fg[static_cast<std::size_t>(i)] = acc_fg;
    }
  }

 private:
  const ImageBuffer& image_;
  CrfParams p_;
  int w_, h_;
  std::vector<double> pos_app_, pos_smooth_, color_;
};

// Approximate messages for large images: separable truncated Gaussian for the
// smoothness kernel, permutohedral lattice for the appearance kernel.
class LatticeMessages {
 public:
  LatticeMessages(const ImageBuffer& image, const CrfParams& p)
      : p_(p), w_(image.width()), h_(image.height()), lattice_(features(image, p), w_ * h_, 2 + image.channels()) {
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * p.theta_gamma)));
    taps_.resize(static_cast<std::size_t>(radius) + 1);
    for (int r = 0; r <= radius; ++r)
      taps_[static_cast<std::size_t>(r)] = std::exp(-static_cast<double>(r * r) / (2.0 * p.theta_gamma * p.theta_gamma));
  }

  void compute(const std::vector<double>& q_bg, const std::vector<double>& q_fg, std::vector<double>& m_bg,
               std::vector<double>& m_fg) const {
    const std::size_t n = q_bg.size();
    std::vector<double> packed(2 * n), filtered(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      packed[2 * i] = q_bg[i];
      packed[2 * i + 1] = q_fg[i];
    }
    lattice_.filter(packed, filtered, 2);
    const auto smooth_bg = separable_blur(q_bg);
    const auto smooth_fg = separable_blur(q_fg);
    // Both filters include the j == i term with weight 1; remove it.
    for (std::size_t i = 0; i < n; ++i) {
      m_bg[i] = p_.w_appearance * (filtered[2 * i] - q_bg[i]) + p_.w_smoothness * (smooth_bg[i] - q_bg[i]);
      m_fg[i] = p_.w_appearance * (filtered[2 * i + 1] - q_fg[i]) + p_.w_smoothness * (smooth_fg[i] - q_fg[i]);
    }
  }

 private:
  static std::vector<double> features(const ImageBuffer& image, const CrfParams& p) {
    const int c = image.channels();
    const int d = 2 + c;
    std::vector<double> f(image.pixel_count() * static_cast<std::size_t>(d));
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * image.width() + x;
        f[i * d] = x / p.theta_alpha;
        f[i * d + 1] = y / p.theta_alpha;
        for (int k = 0; k < c; ++k) f[i * d + 2 + k] = image.at(x, y, k) / p.theta_beta;
      }
    }
    return f;
  }

  std::vector<double> separable_blur(const std::vector<double>& q) const {
    const int radius = static_cast<int>(taps_.size()) - 1;
    std::vector<double> tmp(q.size()), out(q.size());
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        double acc = 0.0;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int sx = x + dx;
          if (sx < 0 || sx >= w_) continue;
          acc += taps_[static_cast<std::size_t>(std::abs(dx))] * q[static_cast<std::size_t>(y) * w_ + sx];
        }
        tmp[static_cast<std::size_t>(y) * w_ + x] = acc;
      }
    }
    for (int y = 0; y < h_; ++y) {
      for (int x = 0; x < w_; ++x) {
        double acc = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
          const int sy = y + dy;
          if (sy < 0 || sy >= h_) continue;
          acc += taps_[static_cast<std::size_t>(std::abs(dy))] * tmp[static_cast<std::size_t>(sy) * w_ + x];
        }
        out[static_cast<std::size_t>(y) * w_ + x] = acc;
      }
    }
    return out;
  }

  CrfParams p_;
  int w_, h_;
  detail::PermutohedralLattice lattice_;
  std::vector<double> taps_;
};

template <class Messages>
void mean_field(const Unary& unary, const Messages& messages, int n_iters, CrfTrace& trace) {
  const std::size_t n = unary.fg.size();
  std::vector<double> q_bg(n), q_fg(n), m_bg(n), m_fg(n);

  const auto normalize = [&](std::size_t i, double e_bg, double e_fg) {
    const double top = std::max(-e_bg, -e_fg);
    const double a = std::exp(-e_bg - top);
    const double b = std::exp(-e_fg - top);
    const double s = a + b;
    q_bg[i] = a / s;
    q_fg[i] = b / s;
  };
  for (std::size_t i = 0; i < n; ++i) normalize(i, unary.bg[i], unary.fg[i]);

  for (int it = 0; it < n_iters; ++it) {
    messages.compute(q_bg, q_fg, m_bg, m_fg);
    double norm_err = 0.0, change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double before = q_fg[i];
      normalize(i, unary.bg[i] - m_bg[i], unary.fg[i] - m_fg[i]);
      norm_err = std::max(norm_err, std::abs(q_bg[i] + q_fg[i] - 1.0));
      change = std::max(change, std::abs(q_fg[i] - before));
    }
    trace.normalization_error.push_back(norm_err);
    trace.max_change.push_back(change);
  }

  for (std::size_t i = 0; i < n; ++i) trace.labels.set(i, q_fg[i] > q_bg[i]);
  trace.foreground_prob = std::move(q_fg);
}

}  // namespace

void CrfParams::validate() const {
  if (n_iters < 0) throw Error(Errc::invalid_argument, "crf n_iters must be >= 0");
  if (!(w_appearance >= 0.0) || !(w_smoothness >= 0.0))
    throw Error(Errc::invalid_argument, "crf kernel weights must be non-negative");
  if (!(theta_alpha > 0.0) || !(theta_beta > 0.0) || !(theta_gamma > 0.0))
    throw Error(Errc::invalid_argument, "crf bandwidths must be positive");
  if (!(unary_fg_prob > 0.5 && unary_fg_prob < 1.0))
    throw Error(Errc::invalid_argument, "crf unary_fg_prob must lie in (0.5, 1)");
}

CrfTrace crf_refine_traced(const ImageBuffer& image, const PixelMask& mask, const CrfParams& params) {
  params.validate();
  if (image.width() != mask.width() || image.height() != mask.height())
    throw Error(Errc::image_mismatch, "image and mask sizes differ");

  CrfTrace trace;
  trace.labels = PixelMask(mask.width(), mask.height());
  const Unary unary = make_unary(mask, params.unary_fg_prob);
  const bool lattice = params.path == CrfPath::lattice ||
                       (params.path == CrfPath::automatic && image.pixel_count() > kCrfDirectMaxPixels);
  trace.used_lattice = lattice;
  if (lattice) {
    mean_field(unary, LatticeMessages(image, params), params.n_iters, trace);
  } else {
    mean_field(unary, DirectMessages(image, params), params.n_iters, trace);
  }
  return trace;
}

PixelMask crf_refine(const ImageBuffer& image, const PixelMask& mask, const CrfParams& params) {
  return crf_refine_traced(image, mask, params).labels;
}

}  // namespace cutler
