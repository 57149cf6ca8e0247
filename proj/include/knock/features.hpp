#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "knock/common.hpp"
#include "knock/signal.hpp"

namespace knock {

struct MfccConfig {
  int sample_rate_hz = kDefaultSampleRate;
  std::size_t frame_len = 256;  // 32 ms at 8 kHz
  std::size_t hop = 128;
  std::size_t n_fft = 256;
  int n_filters = 26;
  int n_ceps = 12;
  double log_floor = 1e-10;
};

inline constexpr std::size_t kMfccFeatureDim = 36;

struct FrameMatrix {
  std::vector<Vector> frames;
  std::size_t frame_len = 0;
  std::size_t hop = 0;

  std::size_t count() const { return frames.size(); }
};

/// Symmetric Hann window, w[k] = 0.5 - 0.5 cos(2 pi k / (n - 1)).
Vector hanning_window(std::size_t n);

std::size_t frame_count(std::size_t window_len, std::size_t frame_len, std::size_t hop);

/// Overlapping Hann-tapered frames.
FrameMatrix frame_signal(const Vector& window, std::size_t frame_len, std::size_t hop);

/// |DFT|^2 at bins 0..n_fft/2 of the frame zero-padded to n_fft.
Vector power_spectrum(const Vector& frame, std::size_t n_fft = 256);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// n_filters + 2 edge frequencies, equally spaced in mel between 0 and rate/2.
/// Entry m + 1 is the center of filter m.
std::vector<double> mel_edge_frequencies(int n_filters, int rate_hz);

/// Triangular filters over FFT bins; each row rises linearly from its left
/// edge bin to exactly 1 at its center bin and falls to its right edge bin.
/// Throws InvalidArgument when two edges land on the same bin.
Matrix mel_filterbank(int n_filters, int rate_hz, std::size_t n_fft);

/// Orthonormal DCT-II matrix (rows = output coefficients).
Matrix dct2_matrix(int n);

/// Cepstral coefficients 1..n_ceps of every frame (coefficient 0 dropped).
std::vector<Vector> mfcc_frames(const Vector& window, const MfccConfig& config = {});

/// d[t] = seq[t+1] - seq[t-1], with the sequence edge-replicated.
std::vector<Vector> deltas(const std::vector<Vector>& seq);

/// Frame-mean of (c, delta, delta-delta): 3 * n_ceps values.
Vector mfcc_feature(const Vector& window, const MfccConfig& config = {});

/// Replaces every example's input by its MFCC feature.
LabeledDataset mfcc_dataset(const LabeledDataset& windows, const MfccConfig& config = {});

/// CSV with columns f0..f{d-1},label.
void write_feature_csv(const std::filesystem::path& path, const LabeledDataset& features);

}  // namespace knock
