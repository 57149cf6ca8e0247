#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "knock/common.hpp"

namespace knock {

inline constexpr int kDefaultSampleRate = 8000;
inline constexpr std::size_t kDefaultWindowLength = 500;

/// A mono recording with amplitudes in dimensionless units.
struct RawSignal {
  Vector samples;
  int sample_rate_hz = kDefaultSampleRate;

  std::size_t size() const { return static_cast<std::size_t>(samples.size()); }
  // Throws InvalidArgument on an empty signal or non-positive rate.
  void validate() const;
};

/// Fixed-length model input anchored at the strike transient.
/// Values lie in [-1, 1] once passed through normalize().
struct SignalWindow {
  Vector values;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  bool in_range() const;
};

struct Example {
  Vector x;
  int label = 0;
};

struct LabeledDataset {
  std::vector<Example> examples;
  int n_classes = 0;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::size_t dim() const;
  std::vector<Vector> inputs() const;
  std::vector<int> labels() const;
  // Order-sensitive hash over every input vector and label.
  std::uint64_t content_hash() const;
};

/// Index of the first sample with maximal |value|.
std::size_t peak_index(const Vector& samples);

// samples[k .. k+n) where k = peak_index, zero-padded on the right.
SignalWindow extract_window(const RawSignal& raw, std::size_t n = kDefaultWindowLength);

// Divides by max|value| only when it exceeds 1.
SignalWindow normalize(const SignalWindow& window);

// --- synthetic impact sounds -------------------------------------------------

struct ResonanceMode {
  double frequency_hz = 0.0;
  double decay_per_s = 0.0;
  double amplitude = 0.0;
};

struct KnockClassParams {
  std::vector<ResonanceMode> modes;
  double noise_std = 0.0;

  void validate(int sample_rate_hz) const;
};

/// Per-trial variation applied on top of a class's nominal modes.
/// Frequencies are scaled by 1 + U(-frequency, frequency), amplitudes by
/// 1 + U(-amplitude, amplitude).
struct SynthJitter {
  double frequency = 0.02;
  double amplitude = 0.10;
  bool random_phase = true;

  static SynthJitter none() { return {0.0, 0.0, false}; }
};

/// Sum of exponentially decaying sinusoids plus white Gaussian noise,
/// clipped to [-1, 1].
RawSignal synth_knock(const KnockClassParams& params, double duration_s,
                      int rate_hz, Rng& rng, const SynthJitter& jitter = {});

struct CorpusDesign {
  int min_modes = 3;
  int max_modes = 5;
  double min_frequency_hz = 150.0;
  double max_frequency_hz = 3500.0;
  double min_decay_per_s = 4.0;
  double max_decay_per_s = 40.0;
  // Overall peak gain of a class, shared among its modes.
  double min_gain = 0.3;
  double max_gain = 0.9;
  double noise_std = 0.01;
  double duration_s = 2.0;
  int sample_rate_hz = kDefaultSampleRate;
  std::size_t window_length = kDefaultWindowLength;
  SynthJitter jitter{};
};

/// Draws one class's nominal resonances from the design ranges.
KnockClassParams random_class_params(const CorpusDesign& design, Rng& rng);

/// The n_classes class definitions used for a given seed.
std::vector<KnockClassParams> corpus_classes(int n_classes, std::uint64_t seed,
                                             const CorpusDesign& design = {});

using RecordingSink =
    std::function<void(const RawSignal& recording, int label, int trial)>;

/// Streams every synthetic recording in generation order (class-major,
/// trials in order) without holding the whole corpus in memory.
void for_each_recording(int n_classes, int trials_per_class, std::uint64_t seed,
                        const CorpusDesign& design, const RecordingSink& sink);

/// Labeled, peak-aligned and normalized windows, class-major.
LabeledDataset synth_corpus(int n_classes, int trials_per_class, std::uint64_t seed,
                            const CorpusDesign& design = {});

}  // namespace knock
