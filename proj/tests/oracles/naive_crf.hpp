#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

// Fully-connected two-label mean field by direct summation over all pixel
// pairs. Kernel values are computed on the fly with the same expression
// order as the production exact path: w_a (e_pos e_col) + w_s e_smooth,
// accumulated over j ascending.
namespace oracle {

struct CrfSetup {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<std::uint8_t> pixels;  // interleaved, row-major
  std::vector<std::uint8_t> mask;    // row-major 0/1
  int n_iters = 10;
  double w_appearance = 4.0;
  double w_smoothness = 3.0;
  double theta_alpha = 67.0;
  double theta_beta = 3.0;
  double theta_gamma = 1.0;
  double unary_fg_prob = 0.7;
};

struct CrfOutcome {
  std::vector<std::uint8_t> labels;
  std::vector<double> q_fg;
  std::vector<double> normalization_error;
};

inline CrfOutcome naive_mean_field(const CrfSetup& s) {
  const int n = s.width * s.height;
  const double on = -std::log(s.unary_fg_prob);
  const double off = -std::log(1.0 - s.unary_fg_prob);
  std::vector<double> u_bg(n), u_fg(n), q_bg(n), q_fg(n);
  for (int i = 0; i < n; ++i) {
    u_fg[i] = s.mask[i] ? on : off;
    u_bg[i] = s.mask[i] ? off : on;
  }
  auto set_q = [&](int i, double e_bg, double e_fg) {
    const double top = std::max(-e_bg, -e_fg);
    const double a = std::exp(-e_bg - top);
    const double b = std::exp(-e_fg - top);
    q_bg[i] = a / (a + b);
    q_fg[i] = b / (a + b);
  };
  for (int i = 0; i < n; ++i) set_q(i, u_bg[i], u_fg[i]);

  CrfOutcome out;
  std::vector<double> m_bg(n), m_fg(n);
  for (int it = 0; it < s.n_iters; ++it) {
    for (int i = 0; i < n; ++i) {
      double acc_bg = 0.0, acc_fg = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const int dx = i % s.width - j % s.width;
        const int dy = i / s.width - j / s.width;
        const double dp = static_cast<double>(dx * dx + dy * dy);
        int dc = 0;
        for (int c = 0; c < s.channels; ++c) {
          const int diff = int(s.pixels[i * s.channels + c]) - int(s.pixels[j * s.channels + c]);
          dc += diff * diff;
        }
        const double e_pos = std::exp(-dp / (2.0 * s.theta_alpha * s.theta_alpha));
        const double e_col = std::exp(-static_cast<double>(dc) / (2.0 * s.theta_beta * s.theta_beta));
        const double e_smooth = std::exp(-dp / (2.0 * s.theta_gamma * s.theta_gamma));
        const double k = s.w_appearance * (e_pos * e_col) + s.w_smoothness * e_smooth;
        acc_bg += k * q_bg[j];
        acc_fg += k * q_fg[j];
      }
      m_bg[i] = acc_bg;
      m_fg[i] = acc_fg;
    }
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      set_q(i, u_bg[i] - m_bg[i], u_fg[i] - m_fg[i]);
      err = std::max(err, std::abs(q_bg[i] + q_fg[i] - 1.0));
    }
    out.normalization_error.push_back(err);
  }
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) out.labels[i] = q_fg[i] > q_bg[i] ? 1 : 0;
  out.q_fg = q_fg;
  return out;
}

}  // namespace oracle
