#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>

#include "taco/domain.hpp"

namespace taco {

// Binary checkpoint layout (little-endian):
//
//   char[8]   magic "TACOCKPT"
//   uint32    format version (1)
//   uint32    kind: 0 = dense W, 1 = factored (U, V)
//   uint64    config hash of the producing run (0 when unknown)
//   uint64    n_users
//   uint64    dim
//   uint64    rank (factored only)
//   float64[] W row-major (n x d), or U (n x k) then V (d x k), row-major
//   uint64    FNV-1a of every preceding byte
//
// Doubles are stored bit-for-bit, so a write/read cycle is exact.
inline constexpr char kCheckpointMagic[8] = {'T', 'A', 'C', 'O',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using AnyModel = std::variant<Model, FactoredModel>;

struct Checkpoint {
  AnyModel model;
  std::uint64_t config_hash = 0;
  std::uint64_t checksum = 0;  // filled in by read/write

  // Dense n x d weights, reconstructing U V^T for factored models.
  Matrix weights() const;
};

// Returns the checksum that was written. Throws DataError on I/O failure.
std::uint64_t write_checkpoint(const std::filesystem::path& path,
                               const AnyModel& model,
                               std::uint64_t config_hash = 0);

// Throws DataError on a bad magic, unknown version, truncated payload or
// checksum mismatch.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace taco
