#include "knock/features.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace knock {

Vector hanning_window(std::size_t n) {
  if (n < 2) throw InvalidArgument("Hann window needs n >= 2");
  Vector w(static_cast<Eigen::Index>(n));
  const double denom = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k)
    w[static_cast<Eigen::Index>(k)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / denom);
  return w;
}

std::size_t frame_count(std::size_t window_len, std::size_t frame_len, std::size_t hop) {
  if (frame_len == 0 || hop == 0) throw InvalidArgument("frame length and hop must be positive");
  if (window_len < frame_len) return 0;
  return 1 + (window_len - frame_len) / hop;
}

FrameMatrix frame_signal(const Vector& window, std::size_t frame_len, std::size_t hop) {
  const auto len = static_cast<std::size_t>(window.size());
  if (len < frame_len)
    throw InvalidArgument("window of " + std::to_string(len) + " samples is shorter than frame length " +
                          std::to_string(frame_len));
  const Vector taper = hanning_window(frame_len);
  FrameMatrix fm;
  fm.frame_len = frame_len;
  fm.hop = hop;
  const std::size_t count = frame_count(len, frame_len, hop);
  fm.frames.reserve(count);
  for (std::size_t f = 0; f < count; ++f)
    fm.frames.push_back(window.segment(static_cast<Eigen::Index>(f * hop),
                                       static_cast<Eigen::Index>(frame_len))
                            .cwiseProduct(taper));
  return fm;
}

Vector power_spectrum(const Vector& frame, std::size_t n_fft) {
  if (static_cast<std::size_t>(frame.size()) > n_fft)
    throw InvalidArgument("frame longer than FFT size");
  std::vector<double> padded(n_fft, 0.0);
  for (Eigen::Index i = 0; i < frame.size(); ++i) padded[static_cast<std::size_t>(i)] = frame[i];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  Vector power(static_cast<Eigen::Index>(n_fft / 2 + 1));
  for (Eigen::Index k = 0; k < power.size(); ++k) power[k] = std::norm(spectrum[static_cast<std::size_t>(k)]);
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_edge_frequencies(int n_filters, int rate_hz) {
  if (n_filters < 1) throw InvalidArgument("need at least one mel filter");
  const double top = hz_to_mel(0.5 * rate_hz);
  std::vector<double> edges(static_cast<std::size_t>(n_filters) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(n_filters + 1));
  return edges;
}

Matrix mel_filterbank(int n_filters, int rate_hz, std::size_t n_fft) {
  if (n_filters < 13) throw InvalidArgument("need at least 13 mel filters for 12 cepstra");
  const auto edges = mel_edge_frequencies(n_filters, rate_hz);
  std::vector<long> bins(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i)
    bins[i] = std::lround(edges[i] * static_cast<double>(n_fft) / rate_hz);
  for (std::size_t i = 1; i < bins.size(); ++i)
    if (bins[i] <= bins[i - 1])
      throw InvalidArgument(std::to_string(n_filters) + " mel filters are too many for n_fft=" +
                            std::to_string(n_fft) + ": adjacent filter edges share a bin");

  const auto n_bins = static_cast<Eigen::Index>(n_fft / 2 + 1);
  Matrix fb = Matrix::Zero(n_filters, n_bins);
  for (int m = 0; m < n_filters; ++m) {
    const long left = bins[static_cast<std::size_t>(m)];
    const long center = bins[static_cast<std::size_t>(m) + 1];
    const long right = bins[static_cast<std::size_t>(m) + 2];
    for (long k = left; k <= center; ++k)
      fb(m, k) = static_cast<double>(k - left) / static_cast<double>(center - left);
    for (long k = center + 1; k <= right && k < n_bins; ++k)
      fb(m, k) = static_cast<double>(right - k) / static_cast<double>(right - center);
  }
  return fb;
}

Matrix dct2_matrix(int n) {
  Matrix d(n, n);
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m)
      d(k, m) = (k == 0 ? s0 : sk) * std::cos(std::numbers::pi * k * (m + 0.5) / n);
  return d;
}

std::vector<Vector> mfcc_frames(const Vector& window, const MfccConfig& config) {
  if (config.n_ceps + 1 > config.n_filters)
    throw InvalidArgument("n_ceps must be smaller than n_filters");
  const FrameMatrix fm = frame_signal(window, config.frame_len, config.hop);
  const Matrix fb = mel_filterbank(config.n_filters, config.sample_rate_hz, config.n_fft);
  const Matrix dct = dct2_matrix(config.n_filters).middleRows(1, config.n_ceps);

  std::vector<Vector> out;
  out.reserve(fm.count());
  for (const auto& frame : fm.frames) {
    const Vector energies = fb * power_spectrum(frame, config.n_fft);
    const Vector log_e = (energies.array() + config.log_floor).log().matrix();
    out.push_back(dct * log_e);
  }
  return out;
}

std::vector<Vector> deltas(const std::vector<Vector>& seq) {
  std::vector<Vector> d;
  d.reserve(seq.size());
  const std::size_t n = seq.size();
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t next = std::min(t + 1, n - 1);
    const std::size_t prev = t == 0 ? 0 : t - 1;
    d.push_back(seq[next] - seq[prev]);
  }
  return d;
}

Vector mfcc_feature(const Vector& window, const MfccConfig& config) {
  const auto ceps = mfcc_frames(window, config);
  if (ceps.empty()) throw InvalidArgument("MFCC feature needs at least one frame");
  const auto d1 = deltas(ceps);
  const auto d2 = deltas(d1);
  const Eigen::Index n = config.n_ceps;
  Vector feature = Vector::Zero(3 * n);
  for (std::size_t t = 0; t < ceps.size(); ++t) {
    feature.segment(0, n) += ceps[t];
    feature.segment(n, n) += d1[t];
    feature.segment(2 * n, n) += d2[t];
  }
  feature /= static_cast<double>(ceps.size());
  return feature;
}

LabeledDataset mfcc_dataset(const LabeledDataset& windows, const MfccConfig& config) {
  LabeledDataset out;
  out.n_classes = windows.n_classes;
  out.examples.reserve(windows.size());
  for (const auto& e : windows.examples) out.examples.push_back({mfcc_feature(e.x, config), e.label});
  return out;
}

void write_feature_csv(const std::filesystem::path& path, const LabeledDataset& features) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::size_t d = features.dim();
  for (std::size_t i = 0; i < d; ++i) out << 'f' << i << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (const auto& e : features.examples) {
    for (Eigen::Index i = 0; i < e.x.size(); ++i) out << e.x[i] << ',';
    out << e.label << '\n';
  }
}

}  // namespace knock
