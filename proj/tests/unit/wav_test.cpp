#include <gtest/gtest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "knock/wav.hpp"

namespace fs = std::filesystem;

namespace knock {
namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("knock_wav_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

// Hand-built RIFF/WAVE container, independent of save_wav.
std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, const std::string& data) {
  std::string fmt;
  put_u16(fmt, format);
  put_u16(fmt, channels);
  put_u32(fmt, rate);
  put_u32(fmt, rate * channels * bits / 8);
  put_u16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(fmt, bits);
  std::string body = "WAVE";
  body += "fmt ";
  put_u32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  body += "data";
  put_u32(body, static_cast<std::uint32_t>(data.size()));
  body += data;
  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

std::string pcm16(const std::vector<std::int16_t>& samples) {
  std::string s;
  for (auto v : samples) put_u16(s, static_cast<std::uint16_t>(v));
  return s;
}

fs::path write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  return path;
}

WavErrorKind error_kind_of(const fs::path& path) {
  try {
    load_wav(path);
  } catch (const WavError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no WavError for " << path;
  return WavErrorKind::missing_file;
}

TEST(LoadWav, SixteenThousandSamplesAt8k) {
  const fs::path dir = scratch_dir("len");
  std::vector<std::int16_t> samples(16000);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = static_cast<std::int16_t>(i % 2000 - 1000);
  const RawSignal r = load_wav(write_bytes(dir / "a.wav", wav_bytes(1, 1, 8000, 16, pcm16(samples))));
  EXPECT_EQ(r.size(), 16000u);
  EXPECT_EQ(r.sample_rate_hz, 8000);
  for (std::size_t i = 0; i < samples.size(); ++i)
    ASSERT_EQ(r.samples[static_cast<Eigen::Index>(i)], samples[i] / 32768.0);
}

TEST(LoadWav, AllZeroSamples) {
  const fs::path dir = scratch_dir("zero");
  const RawSignal r =
      load_wav(write_bytes(dir / "z.wav", wav_bytes(1, 1, 8000, 16, pcm16(std::vector<std::int16_t>(100, 0)))));
  EXPECT_EQ(r.size(), 100u);
  EXPECT_EQ(r.samples.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LoadWav, MostNegativeSampleIsMinusOne) {
  const fs::path dir = scratch_dir("neg");
  const RawSignal r = load_wav(write_bytes(dir / "n.wav", wav_bytes(1, 1, 8000, 16, pcm16({-32768}))));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r.samples[0], -1.0);
}

TEST(LoadWav, EightBitUnsigned) {
  const fs::path dir = scratch_dir("u8");
  const std::string data{static_cast<char>(0), static_cast<char>(128), static_cast<char>(255)};
  const RawSignal r = load_wav(write_bytes(dir / "b.wav", wav_bytes(1, 1, 11025, 8, data)));
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r.sample_rate_hz, 11025);
  EXPECT_EQ(r.samples[0], -1.0);
  EXPECT_EQ(r.samples[1], 0.0);
  EXPECT_EQ(r.samples[2], 127.0 / 128.0);
}

TEST(LoadWav, SkipsUnknownChunks) {
  const fs::path dir = scratch_dir("chunks");
  std::string bytes = wav_bytes(1, 1, 8000, 16, pcm16({100, -100}));
  // Insert a LIST chunk between fmt and data.
  const auto pos = bytes.find("data");
  std::string list = "LIST";
  put_u32(list, 3);
  list += "abc";
  list.push_back('\0');  // pad byte for odd-sized chunk
  bytes.insert(pos, list);
  const RawSignal r = load_wav(write_bytes(dir / "l.wav", bytes));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.samples[1], -100.0 / 32768.0);
}

TEST(LoadWav, ErrorsAreDistinct) {
  const fs::path dir = scratch_dir("errors");
  EXPECT_EQ(error_kind_of(dir / "absent.wav"), WavErrorKind::missing_file);
  EXPECT_EQ(error_kind_of(write_bytes(dir / "junk.wav", "not a wave file at all")),
            WavErrorKind::malformed_header);
  EXPECT_EQ(error_kind_of(write_bytes(dir / "short.wav", "RIFF")), WavErrorKind::malformed_header);
  EXPECT_EQ(error_kind_of(write_bytes(dir / "float.wav", wav_bytes(3, 1, 8000, 32, std::string(8, '\0')))),
            WavErrorKind::unsupported_format);
  EXPECT_EQ(error_kind_of(write_bytes(dir / "stereo.wav", wav_bytes(1, 2, 8000, 16, std::string(8, '\0')))),
            WavErrorKind::multi_channel);
  EXPECT_EQ(error_kind_of(write_bytes(dir / "24bit.wav", wav_bytes(1, 1, 8000, 24, std::string(6, '\0')))),
            WavErrorKind::unsupported_bit_depth);
}

TEST(SaveWav, RoundTripsQuantizedSamples) {
  const fs::path dir = scratch_dir("rt");
  RawSignal r{Vector(6), 16000};
  r.samples << -1.0, -0.5, 0.0, 0.25, 0.999, 1.0;
  save_wav(dir / "rt.wav", r);
  const RawSignal back = load_wav(dir / "rt.wav");
  EXPECT_EQ(back.sample_rate_hz, 16000);
  ASSERT_EQ(back.size(), 6u);
  EXPECT_EQ(back.samples[0], -1.0);
  EXPECT_EQ(back.samples[1], -0.5);
  EXPECT_EQ(back.samples[2], 0.0);
  EXPECT_EQ(back.samples[3], 0.25);
  EXPECT_NEAR(back.samples[4], 0.999, 1.0 / 32768);
  EXPECT_EQ(back.samples[5], 32767.0 / 32768.0);
}

TEST(Manifest, RoundTripWithRelativePaths) {
  const fs::path dir = scratch_dir("manifest");
  fs::create_directories(dir / "sub");
  save_wav(dir / "sub" / "a.wav", RawSignal{Vector::Constant(600, 0.5), 8000});
  write_manifest(dir / "m.csv", {{dir / "sub" / "a.wav", 3}});
  const auto entries = read_manifest(dir / "m.csv");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].label, 3);
  EXPECT_TRUE(fs::exists(entries[0].path));
  const LabeledDataset ds = load_manifest_dataset(dir / "m.csv", 500);
  EXPECT_EQ(ds.n_classes, 4);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.examples[0].x.size(), 500);
}

TEST(Manifest, RejectsBadHeaderAndLabels) {
  const fs::path dir = scratch_dir("badmanifest");
  write_bytes(dir / "a.csv", "file,class\nx.wav,0\n");
  EXPECT_THROW(read_manifest(dir / "a.csv"), FormatError);
  write_bytes(dir / "b.csv", "path,label\nx.wav,-1\n");
  EXPECT_THROW(read_manifest(dir / "b.csv"), FormatError);
  write_bytes(dir / "c.csv", "path,label\nx.wav,abc\n");
  EXPECT_THROW(read_manifest(dir / "c.csv"), FormatError);
}

TEST(SyntheticCorpus, OnDiskMatchesInMemoryUpToQuantization) {
  const fs::path dir = scratch_dir("corpus");
  const fs::path manifest = write_synthetic_corpus(dir, 2, 3, 5);
  const LabeledDataset disk = load_manifest_dataset(manifest);
  const LabeledDataset memory = synth_corpus(2, 3, 5);
  ASSERT_EQ(disk.size(), memory.size());
  for (std::size_t i = 0; i < disk.size(); ++i) {
    EXPECT_EQ(disk.examples[i].label, memory.examples[i].label);
    EXPECT_LE((disk.examples[i].x - memory.examples[i].x).cwiseAbs().maxCoeff(), 2.0 / 32768);
  }
}

}  // namespace
}  // namespace knock
