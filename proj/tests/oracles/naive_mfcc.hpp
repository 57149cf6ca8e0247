#pragma once

// Step-by-step MFCC reference written without any library code: O(n^2) DFT,
// explicit triangle sums, explicit DCT-II sums. Fixed at the default
// configuration (8 kHz, 256-sample frames, hop 128, 26 filters, 12 ceps).

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace knock::oracle {

inline std::vector<std::complex<double>> naive_dft(const Eigen::VectorXd& x, std::size_t n) {
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < static_cast<std::size_t>(x.size()); ++t)
      acc += x[static_cast<Eigen::Index>(t)] *
             std::polar(1.0, -2.0 * std::numbers::pi * double(k * t % n) / double(n));
    out[k] = acc;
  }
  return out;
}

inline double mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double inv_mel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

inline std::vector<Eigen::VectorXd> naive_mfcc_frames(const Eigen::VectorXd& window) {
  constexpr double kPi = std::numbers::pi;
  const std::size_t frame_len = 256, hop = 128, n_fft = 256;
  const int n_filters = 26, rate = 8000;
  const std::size_t n_bins = n_fft / 2 + 1;

  std::vector<int> edge_bin(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) {
    const double m = mel(rate / 2.0) * i / (n_filters + 1);
    edge_bin[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(inv_mel(m) * n_fft / rate));
  }

  std::vector<Eigen::VectorXd> out;
  for (std::size_t start = 0; start + frame_len <= static_cast<std::size_t>(window.size()); start += hop) {
    Eigen::VectorXd frame(static_cast<Eigen::Index>(frame_len));
    for (std::size_t k = 0; k < frame_len; ++k)
      frame[static_cast<Eigen::Index>(k)] = window[static_cast<Eigen::Index>(start + k)] *
                                            (0.5 - 0.5 * std::cos(2 * kPi * double(k) / double(frame_len - 1)));
    const auto spec = naive_dft(frame, n_fft);
    std::vector<double> log_e(n_filters);
    for (int m = 0; m < n_filters; ++m) {
      const int lo = edge_bin[static_cast<std::size_t>(m)], c = edge_bin[static_cast<std::size_t>(m + 1)],
                hi = edge_bin[static_cast<std::size_t>(m + 2)];
      double e = 0.0;
      for (int b = 0; b < static_cast<int>(n_bins); ++b) {
        double w = 0.0;
        if (b >= lo && b <= c) w = double(b - lo) / double(c - lo);
        else if (b > c && b <= hi) w = double(hi - b) / double(hi - c);
        e += w * std::norm(spec[static_cast<std::size_t>(b)]);
      }
      log_e[static_cast<std::size_t>(m)] = std::log(e + 1e-10);
    }
    Eigen::VectorXd c(12);
    for (int q = 1; q <= 12; ++q) {
      double acc = 0.0;
      for (int m = 0; m < n_filters; ++m)
        acc += log_e[static_cast<std::size_t>(m)] * std::cos(kPi * q * (m + 0.5) / n_filters);
      c[q - 1] = std::sqrt(2.0 / n_filters) * acc;
    }
    out.push_back(c);
  }
  return out;
}

inline std::vector<Eigen::VectorXd> naive_deltas(const std::vector<Eigen::VectorXd>& seq) {
  std::vector<Eigen::VectorXd> out;
  const std::size_t n = seq.size();
  for (std::size_t t = 0; t < n; ++t) {
    const auto& next = seq[t + 1 < n ? t + 1 : n - 1];
    const auto& prev = seq[t > 0 ? t - 1 : 0];
    out.push_back(next - prev);
  }
  return out;
}

inline Eigen::VectorXd naive_mfcc_feature(const Eigen::VectorXd& window) {
  const auto c = naive_mfcc_frames(window);
  const auto d = naive_deltas(c);
  const auto dd = naive_deltas(d);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(36);
  for (std::size_t t = 0; t < c.size(); ++t)
    for (int q = 0; q < 12; ++q) {
      out[q] += c[t][q];
      out[12 + q] += d[t][q];
      out[24 + q] += dd[t][q];
    }
  return out / static_cast<double>(c.size());
}

}  // namespace knock::oracle
