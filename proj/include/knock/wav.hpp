#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "knock/common.hpp"
#include "knock/signal.hpp"

namespace knock {

enum class WavErrorKind {
  missing_file,
  malformed_header,
  unsupported_format,  // format code other than PCM (1)
  multi_channel,
  unsupported_bit_depth,
};

const char* to_string(WavErrorKind kind);

class WavError : public Error {
 public:
  WavError(WavErrorKind kind, const std::string& detail)
      : Error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  WavErrorKind kind() const noexcept { return kind_; }

 private:
  WavErrorKind kind_;
};

/// Reads a mono 8- or 16-bit PCM RIFF/WAVE file. 16-bit samples are divided
/// by 32768; unsigned 8-bit samples map as (v - 128) / 128.
RawSignal load_wav(const std::filesystem::path& path);

/// Writes 16-bit mono PCM. Amplitudes are clipped to [-1, 1] and quantized as
/// round(x * 32768), saturating at 32767.
void save_wav(const std::filesystem::path& path, const RawSignal& signal);

struct ManifestEntry {
  std::filesystem::path path;
  int label = 0;
};

/// CSV with header `path,label`. Relative paths are resolved against the
/// manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest,
                    const std::vector<ManifestEntry>& entries);

/// Loads each WAV, then extract_window + normalize. Entries keep manifest
/// order; n_classes = 1 + max label.
LabeledDataset load_manifest_dataset(const std::filesystem::path& manifest,
                                     std::size_t window_length = kDefaultWindowLength);

/// Synthesizes a corpus straight to disk: one WAV per trial under `dir`
/// plus `dir/manifest.csv`. Returns the manifest path.
std::filesystem::path write_synthetic_corpus(const std::filesystem::path& dir, int n_classes,
                                             int trials_per_class, std::uint64_t seed,
                                             const CorpusDesign& design = {});

}  // namespace knock
