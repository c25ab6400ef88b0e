#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace taco {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Sorted, duplicate-free list of dense 0-based indices.
using IndexSet = std::vector<int>;

// Base of every error raised by the library. The CLI maps the concrete
// subclass onto its exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid hyperparameters, run configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed, inconsistent or out-of-range input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced or encountered during numerical work.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Deterministic generator for a (seed, stream, index) triple. Every random
// draw in the library goes through here so that runs are reproducible
// regardless of call order across users or threads.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// 64-bit FNV-1a, used for checkpoint checksums and config hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(s.data(), s.size());
}

}  // namespace taco
