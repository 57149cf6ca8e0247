#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace knock {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// All stochastic code takes an explicit engine; there is no global RNG state.
using Rng = std::mt19937_64;

/// Mixes a base seed with a stream index so that independent stages
/// (per-layer pretraining, fine-tuning, SVM training) draw from
/// decorrelated engines while remaining reproducible.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// 64-bit FNV-1a, used for content hashes of windows and datasets.
std::uint64_t fnv1a(std::span<const std::byte> bytes,
                    std::uint64_t state = 0xcbf29ce484222325ULL);
std::uint64_t hash_vector(const Vector& v,
                          std::uint64_t state = 0xcbf29ce484222325ULL);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed model / config / manifest file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Non-finite loss during training.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& phase, int epoch)
      : Error(phase + ": non-finite loss at epoch " + std::to_string(epoch)),
        phase_(phase),
        epoch_(epoch) {}

  const std::string& phase() const noexcept { return phase_; }
  int epoch() const noexcept { return epoch_; }

 private:
  std::string phase_;
  int epoch_;
};

}  // namespace knock
