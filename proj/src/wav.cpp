#include "knock/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace knock {

namespace fs = std::filesystem;

const char* to_string(WavErrorKind kind) {
  switch (kind) {
    case WavErrorKind::missing_file: return "missing file";
    case WavErrorKind::malformed_header: return "malformed header";
    case WavErrorKind::unsupported_format: return "unsupported format";
    case WavErrorKind::multi_channel: return "multi-channel input";
    case WavErrorKind::unsupported_bit_depth: return "unsupported bit depth";
  }
  return "wav error";
}

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

RawSignal load_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavErrorKind::missing_file, path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0)
    throw WavError(WavErrorKind::malformed_header, "missing RIFF/WAVE tags in " + path.string());

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = data + pos;
    const std::uint32_t chunk_size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > size) {
      // Tolerate a truncated data chunk (common from streaming writers).
      if (std::memcmp(chunk, "data", 4) != 0)
        throw WavError(WavErrorKind::malformed_header, "chunk overruns file in " + path.string());
    }
    const std::size_t avail = std::min<std::size_t>(chunk_size, size - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw WavError(WavErrorKind::malformed_header, "short fmt chunk");
      format = read_u16(data + body);
      channels = read_u16(data + body + 2);
      rate = read_u32(data + body + 4);
      bits = read_u16(data + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = data + body;
      pcm_bytes = avail;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt) throw WavError(WavErrorKind::malformed_header, "no fmt chunk in " + path.string());
  if (pcm == nullptr) throw WavError(WavErrorKind::malformed_header, "no data chunk in " + path.string());
  if (format != 1)
    throw WavError(WavErrorKind::unsupported_format, "format code " + std::to_string(format));
  if (channels != 1)
    throw WavError(WavErrorKind::multi_channel, std::to_string(channels) + " channels");
  if (bits != 8 && bits != 16)
    throw WavError(WavErrorKind::unsupported_bit_depth, std::to_string(bits) + " bits");
  if (rate == 0) throw WavError(WavErrorKind::malformed_header, "zero sample rate");

  const std::size_t width = bits / 8;
  const std::size_t count = pcm_bytes / width;
  if (count == 0) throw WavError(WavErrorKind::malformed_header, "empty data chunk");

  RawSignal out{Vector(static_cast<Eigen::Index>(count)), static_cast<int>(rate)};
  for (std::size_t i = 0; i < count; ++i) {
    if (bits == 16) {
      const auto v = static_cast<std::int16_t>(read_u16(pcm + 2 * i));
      out.samples[static_cast<Eigen::Index>(i)] = static_cast<double>(v) / 32768.0;
    } else {
      out.samples[static_cast<Eigen::Index>(i)] = (static_cast<double>(pcm[i]) - 128.0) / 128.0;
    }
  }
  return out;
}

void save_wav(const fs::path& path, const RawSignal& signal) {
  signal.validate();
  const auto n = static_cast<std::uint32_t>(signal.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = std::clamp(signal.samples[static_cast<Eigen::Index>(i)], -1.0, 1.0);
    const long q = std::clamp(std::lround(x * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::vector<ManifestEntry> read_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw FormatError("cannot open manifest " + manifest.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty manifest " + manifest.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "path,label") throw FormatError("manifest header must be 'path,label'");

  const fs::path base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw FormatError("manifest line " + std::to_string(line_no) + ": expected path,label");
    ManifestEntry e;
    e.path = line.substr(0, comma);
    try {
      std::size_t used = 0;
      const std::string label = line.substr(comma + 1);
      e.label = std::stoi(label, &used);
      if (used != label.size() || e.label < 0) throw std::invalid_argument("label");
    } catch (const std::exception&) {
      throw FormatError("manifest line " + std::to_string(line_no) + ": bad label");
    }
    if (e.path.is_relative()) e.path = base / e.path;
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const fs::path& manifest, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(manifest);
  if (!out) throw Error("cannot open " + manifest.string() + " for writing");
  out << "path,label\n";
  const fs::path base = manifest.parent_path();
  for (const auto& e : entries) {
    fs::path p = e.path;
    if (!base.empty() && p.is_absolute()) p = fs::relative(p, base);
    out << p.generic_string() << ',' << e.label << '\n';
  }
}

LabeledDataset load_manifest_dataset(const fs::path& manifest, std::size_t window_length) {
  LabeledDataset ds;
  for (const auto& e : read_manifest(manifest)) {
    const RawSignal raw = load_wav(e.path);
    ds.examples.push_back({normalize(extract_window(raw, window_length)).values, e.label});
    ds.n_classes = std::max(ds.n_classes, e.label + 1);
  }
  return ds;
}

fs::path write_synthetic_corpus(const fs::path& dir, int n_classes, int trials_per_class,
                                std::uint64_t seed, const CorpusDesign& design) {
  fs::create_directories(dir);
  std::vector<ManifestEntry> entries;
  for_each_recording(n_classes, trials_per_class, seed, design,
                     [&](const RawSignal& rec, int label, int trial) {
                       std::ostringstream name;
                       name << "class" << std::setw(2) << std::setfill('0') << label << "_trial"
                            << std::setw(3) << std::setfill('0') << trial << ".wav";
                       const fs::path p = dir / name.str();
                       save_wav(p, rec);
                       entries.push_back({name.str(), label});
                     });
  const fs::path manifest = dir / "manifest.csv";
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace knock
