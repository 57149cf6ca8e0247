#include "knock/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace knock {

void RawSignal::validate() const {
  if (samples.size() == 0) throw InvalidArgument("raw signal is empty");
  if (sample_rate_hz <= 0) throw InvalidArgument("sample rate must be positive");
}

bool SignalWindow::in_range() const {
  return values.size() == 0 || values.cwiseAbs().maxCoeff() <= 1.0;
}

std::size_t LabeledDataset::dim() const {
  return examples.empty() ? 0 : static_cast<std::size_t>(examples.front().x.size());
}

std::vector<Vector> LabeledDataset::inputs() const {
  std::vector<Vector> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.x);
  return out;
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

std::uint64_t LabeledDataset::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& e : examples) {
    h = hash_vector(e.x, h);
    h = fnv1a(std::as_bytes(std::span(&e.label, 1)), h);
  }
  return h;
}

std::size_t peak_index(const Vector& samples) {
  if (samples.size() == 0) throw InvalidArgument("cannot locate peak of an empty signal");
  std::size_t best = 0;
  double best_abs = std::abs(samples[0]);
  for (Eigen::Index i = 1; i < samples.size(); ++i) {
    const double a = std::abs(samples[i]);
    if (a > best_abs) {
      best_abs = a;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

SignalWindow extract_window(const RawSignal& raw, std::size_t n) {
  if (n < 1) throw InvalidArgument("window length must be at least 1");
  raw.validate();
  const std::size_t k = peak_index(raw.samples);
  const std::size_t available = std::min(n, raw.size() - k);
  SignalWindow w{Vector::Zero(static_cast<Eigen::Index>(n))};
  w.values.head(static_cast<Eigen::Index>(available)) =
      raw.samples.segment(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(available));
  return w;
}

SignalWindow normalize(const SignalWindow& window) {
  if (window.values.size() == 0) return window;
  const double m = window.values.cwiseAbs().maxCoeff();
  if (!(m > 1.0)) return window;
  SignalWindow out{window.values / m};
  return out;
}

void KnockClassParams::validate(int sample_rate_hz) const {
  const double nyquist = 0.5 * sample_rate_hz;
  if (noise_std < 0.0) throw InvalidArgument("noise_std must be non-negative");
  for (const auto& m : modes) {
    if (!(m.frequency_hz > 0.0) || m.frequency_hz >= nyquist)
      throw InvalidArgument("mode frequency " + std::to_string(m.frequency_hz) +
                            " Hz outside (0, Nyquist)");
    if (!(m.decay_per_s > 0.0)) throw InvalidArgument("mode decay rate must be positive");
    if (m.amplitude < 0.0) throw InvalidArgument("mode amplitude must be non-negative");
  }
}

RawSignal synth_knock(const KnockClassParams& params, double duration_s, int rate_hz,
                      Rng& rng, const SynthJitter& jitter) {
  if (!(duration_s > 0.0)) throw InvalidArgument("duration must be positive");
  if (rate_hz <= 0) throw InvalidArgument("sample rate must be positive");
  params.validate(rate_hz);

  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  struct TrialMode {
    double omega;  // radians per sample
    double decay;  // per sample
    double amplitude;
    double phase;
  };
  std::vector<TrialMode> trial;
  trial.reserve(params.modes.size());
  const double nyquist = 0.5 * rate_hz;
  for (const auto& m : params.modes) {
    double f = m.frequency_hz;
    double a = m.amplitude;
    if (jitter.frequency > 0.0) f *= 1.0 + jitter.frequency * unit(rng);
    if (jitter.amplitude > 0.0) a *= 1.0 + jitter.amplitude * unit(rng);
    const double phase = jitter.random_phase ? phase_dist(rng) : 0.0;
    if (f >= nyquist) throw InvalidArgument("jittered mode frequency reaches Nyquist");
    trial.push_back({2.0 * std::numbers::pi * f / rate_hz, m.decay_per_s / rate_hz, a, phase});
  }

  const auto n = static_cast<Eigen::Index>(std::llround(duration_s * rate_hz));
  RawSignal out{Vector::Zero(std::max<Eigen::Index>(n, 1)), rate_hz};
  for (const auto& m : trial) {
    for (Eigen::Index t = 0; t < out.samples.size(); ++t) {
      const double td = static_cast<double>(t);
      out.samples[t] += m.amplitude * std::exp(-m.decay * td) * std::sin(m.omega * td + m.phase);
    }
  }
  if (params.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, params.noise_std);
    for (Eigen::Index t = 0; t < out.samples.size(); ++t) out.samples[t] += noise(rng);
  }
  out.samples = out.samples.cwiseMax(-1.0).cwiseMin(1.0);
  return out;
}

KnockClassParams random_class_params(const CorpusDesign& design, Rng& rng) {
  std::uniform_int_distribution<int> n_modes(design.min_modes, design.max_modes);
  // Log-uniform frequencies spread resonances evenly across octaves.
  std::uniform_real_distribution<double> log_freq(std::log(design.min_frequency_hz),
                                                  std::log(design.max_frequency_hz));
  std::uniform_real_distribution<double> decay(design.min_decay_per_s, design.max_decay_per_s);
  std::uniform_real_distribution<double> weight(0.2, 1.0);
  std::uniform_real_distribution<double> gain(design.min_gain, design.max_gain);

  KnockClassParams p;
  p.noise_std = design.noise_std;
  const int count = n_modes(rng);
  double total = 0.0;
  for (int i = 0; i < count; ++i) {
    ResonanceMode m;
    m.frequency_hz = std::exp(log_freq(rng));
    m.decay_per_s = decay(rng);
    m.amplitude = weight(rng);
    total += m.amplitude;
    p.modes.push_back(m);
  }
  const double g = gain(rng);
  for (auto& m : p.modes) m.amplitude *= g / total;
  std::sort(p.modes.begin(), p.modes.end(),
            [](const ResonanceMode& a, const ResonanceMode& b) { return a.frequency_hz < b.frequency_hz; });
  return p;
}

std::vector<KnockClassParams> corpus_classes(int n_classes, std::uint64_t seed,
                                             const CorpusDesign& design) {
  if (n_classes < 2) throw InvalidArgument("corpus needs at least 2 classes");
  Rng rng(derive_seed(seed, 0));
  std::vector<KnockClassParams> classes;
  classes.reserve(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) classes.push_back(random_class_params(design, rng));
  return classes;
}

void for_each_recording(int n_classes, int trials_per_class, std::uint64_t seed,
                        const CorpusDesign& design, const RecordingSink& sink) {
  if (trials_per_class < 2) throw InvalidArgument("corpus needs at least 2 trials per class");
  const auto classes = corpus_classes(n_classes, seed, design);
  for (int c = 0; c < n_classes; ++c) {
    for (int t = 0; t < trials_per_class; ++t) {
      const auto stream = (static_cast<std::uint64_t>(c + 1) << 32) | static_cast<std::uint64_t>(t);
      Rng rng(derive_seed(seed, stream));
      sink(synth_knock(classes[static_cast<std::size_t>(c)], design.duration_s,
                       design.sample_rate_hz, rng, design.jitter),
           c, t);
    }
  }
}

LabeledDataset synth_corpus(int n_classes, int trials_per_class, std::uint64_t seed,
                            const CorpusDesign& design) {
  LabeledDataset ds;
  ds.n_classes = n_classes;
  ds.examples.reserve(static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(trials_per_class));
  for_each_recording(n_classes, trials_per_class, seed, design,
                     [&](const RawSignal& rec, int label, int) {
                       ds.examples.push_back(
                           {normalize(extract_window(rec, design.window_length)).values, label});
                     });
  return ds;
}

}  // namespace knock
