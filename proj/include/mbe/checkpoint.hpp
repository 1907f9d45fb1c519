#pragma once

// Binary state files, little-endian.
//
// Checkpoint: "MBE3", u32 version = 1, u32 nx, u32 ny, f64 tau, f64 eta,
//   f64 A, u8 scheme, u64 step_index, then h_prev2, h_prev, h_curr as
//   row-major f64 arrays.
// Snapshot:   "MBEF", u32 version = 1, u32 nx, u32 ny, f64 t, then the
//   row-major f64 values.

#include "mbe/spectral_grid.hpp"
#include "mbe/steppers.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace mbe {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Writes scheme parameters and the three-level history. Forcing and the
/// nonlinearity switch are not stored.
void write_checkpoint(const std::filesystem::path& path, const SolverState& state);

/// Restores a state. `base` supplies the fields a checkpoint does not carry
/// (forcing, nonlinearity switch, dealias flag); tau, eta, A and the scheme
/// come from the file.
SolverState read_checkpoint(const std::filesystem::path& path, const SchemeParams& base = {});

struct Snapshot {
  ScalarField field;
  double t = 0.0;
};

void dump_snapshot(const ScalarField& h, double t, const std::filesystem::path& path);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace mbe
