#pragma once

#include "mbe/mbe_model.hpp"
#include "mbe/steppers.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mbe {

/// One recorded step. E_mod and dE are NaN before the history is full
/// (step_index < 2); startup_ratio is NaN except on the row for n = 2.
struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;
  double E_mod = std::numeric_limits<double>::quiet_NaN();
  double dE = std::numeric_limits<double>::quiet_NaN();
  double H = 0.0;
  double M = 0.0;
  double startup_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct ModifiedEnergy {
  double E = 0.0;
  double E_mod = 0.0;
  /// False when step_index < 2; E_mod then equals E.
  bool has_correction = false;
};

/// E_n plus the history corrections
///   3/(4 tau) |dh^n|^2 + 1/(6 tau) |dh^{n-1}|^2 + 3/2 |grad dh^n|^2 + 1/2 |grad dh^{n-1}|^2,
/// with dh^n = h^n - h^{n-1} and quadrature L2 norms.
ModifiedEnergy modified_energy(const SolverState& state, const ModelParams& params);

/// (|h^2 - h^1|^2 + |h^1 - h^0|^2) / tau, defined at step_index == 2.
std::optional<double> startup_ratio(const SolverState& state);

/// |h - mean(h)|_2 / 2pi
double characteristic_height(const ScalarField& h);
/// |grad h|_2 / 2pi
double characteristic_slope(const ScalarField& h);

DiagnosticsRecord make_record(const SolverState& state);

enum class FitModel { LogLinear, Power };

/// LogLinear: value = a log t + b.  Power: value = a t^b.
struct FitResult {
  FitModel model = FitModel::LogLinear;
  double a = 0.0;
  double b = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual = 0.0;  // RMS in the transformed coordinates
  std::size_t points = 0;
};

/// Least squares in transformed coordinates over points with t in [t_lo, t_hi].
FitResult fit_curve(std::span<const std::pair<double, double>> series, FitModel model,
                    std::pair<double, double> window);

enum class DissipationVerdict { GuaranteedDecay, StabilizedGuarantee, BoundedOnly };

std::string_view to_string(DissipationVerdict v);

/// 512 / 7203
inline constexpr double kDecayStepConstant = 512.0 / 7203.0;
/// (9/32) (49/16)^4, the stabilization threshold times eta^2.
double stabilization_threshold(double eta);

DissipationVerdict check_dissipation_constraint(const SchemeParams& params);

/// Accumulates records every `stride` steps (always including n = 0 when
/// observed) and writes them as CSV with header t,E,Emod,dE,H,M.
class DiagnosticsRecorder {
 public:
  explicit DiagnosticsRecorder(std::int64_t stride = 1);

  void observe(const SolverState& state);

  [[nodiscard]] const std::vector<DiagnosticsRecord>& records() const { return records_; }
  [[nodiscard]] std::optional<double> startup_ratio() const { return startup_ratio_; }
  [[nodiscard]] std::vector<std::pair<double, double>> series(double DiagnosticsRecord::*field) const;

  void write_csv(std::ostream& out) const;

 private:
  std::int64_t stride_;
  std::vector<DiagnosticsRecord> records_;
  std::optional<double> startup_ratio_;
};

inline constexpr const char* kSeriesCsvHeader = "t,E,Emod,dE,H,M";

void write_series_csv(std::ostream& out, std::span<const DiagnosticsRecord> records, bool header = true);
std::vector<DiagnosticsRecord> read_series_csv(std::istream& in);

}  // namespace mbe
