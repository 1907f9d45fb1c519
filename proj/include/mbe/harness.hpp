#pragma once

// Experiment configuration and drivers behind the mbe3 command line.

#include "mbe/diagnostics.hpp"
#include "mbe/stability_lab.hpp"
#include "mbe/steppers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mbe {

enum class InitialKind { RandomUniform, SineProduct, FromCheckpoint };
enum class StartupMode { DefaultChain, Exact };

struct RunConfig {
  int nx = 64;
  int ny = 64;
  Scheme scheme = Scheme::BDF3EP3;
  double tau = 0.01;
  double eta = 1.0;
  double A = 0.0;
  double t_final = 1.0;

  InitialKind initial = InitialKind::SineProduct;
  std::optional<std::uint64_t> seed;
  double low = 0.0;
  double high = 1.0;
  std::filesystem::path init_path;  // FromCheckpoint: snapshot or checkpoint file

  bool forcing = false;
  std::filesystem::path out_dir = "out";
  std::int64_t stride = 1;
  bool dealias = false;
  StartupMode startup = StartupMode::DefaultChain;

  std::vector<double> tau_list;
  std::vector<double> A_list;

  double fit_lo = 1.0;
  double fit_hi = 400.0;
  std::int64_t checkpoint_every = 0;  // steps; 0 writes only the final checkpoint
  std::vector<double> snapshot_times;

  double s0 = 0.0909;
  double kappa_lo = 1e-4;
  double kappa_hi = 0.1;
  int kappa_count = 200;
  int root_samples = 10000;
  int contraction_grid = 2000;
  int power_nmax = 50;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// Sets one key from its textual value. Unknown keys are rejected.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Reads "key = value" lines; '#' starts a comment.
void apply_config_stream(RunConfig& config, std::istream& in, const std::string& source = "<stream>");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// The resolved configuration in the same "key = value" format, so a
/// manifest can be fed back with --config.
std::string to_manifest(const RunConfig& config);

std::vector<double> parse_double_list(const std::string& text);

/// Seeded mt19937_64; each draw maps the top 53 bits to [0, 1) and then to
/// [low, high], filling nodes in row-major order.
ScalarField random_uniform_field(const Grid& grid, std::uint64_t seed, double low, double high);

ScalarField make_initial_field(const RunConfig& config);
SchemeParams make_scheme_params(const RunConfig& config);

struct ErrorReport {
  std::vector<double> tau;
  std::vector<double> l2;
  std::vector<double> linf;
  std::vector<double> order_l2;    // size tau.size() - 1
  std::vector<double> order_linf;
};

/// log(e_i / e_{i+1}) / log(tau_i / tau_{i+1}); log2 of the error ratio when
/// tau halves.
std::vector<double> observed_orders(std::span<const double> tau, std::span<const double> err);

/// Manufactured-solution error study against cos(t) sin(x) sin(y) at t_final.
ErrorReport run_convergence_study(const RunConfig& config, std::span<const double> tau_list);

struct StabilizationRow {
  double A = 0.0;
  ErrorReport report;
};

struct StabilizationSweep {
  std::vector<StabilizationRow> rows;
  /// Errors strictly increase with A at every tau, in both norms.
  bool monotone_in_A = false;
  /// l2 error of the largest A over the smallest A at the largest tau.
  double ratio_at_largest_tau = 0.0;
};

StabilizationSweep run_stabilization_sweep(const RunConfig& config, std::span<const double> A_list,
                                           std::span<const double> tau_list);

struct EnergySeries {
  double tau = 0.0;
  std::vector<DiagnosticsRecord> records;
  double max_dE = 0.0;
};

/// Unforced runs, one per tau, recording every step.
std::vector<EnergySeries> run_energy_comparison(const RunConfig& config, std::span<const double> tau_list);

/// Fits are empty when fewer than three records fall in the fit window.
struct CoarseningResult {
  std::vector<DiagnosticsRecord> records;
  std::optional<FitResult> energy_fit;
  std::optional<FitResult> height_fit;
  std::optional<FitResult> slope_fit;
  SolverState final_state;
};

std::filesystem::path checkpoint_path(const RunConfig& config);
std::filesystem::path series_path(const RunConfig& config);

/// Long run with periodic checkpoints. With `resume_from`, continues that
/// state and keeps the `prior` records up to its time.
CoarseningResult run_coarsening(const RunConfig& config, std::optional<SolverState> resume_from = std::nullopt,
                                std::vector<DiagnosticsRecord> prior = {});

struct StabilityReport {
  stability::RootBoundsReport<double> roots;
  stability::RootTriple<double> limit_roots;  // s = 1/11
  stability::ContractionResult<double> contraction;
  stability::DiagonalizationSweep<double> diagonalization;
};

StabilityReport run_stability_report(const RunConfig& config);

// Output writers. Every file goes under config.out_dir.
void write_manifest(const RunConfig& config, const std::string& command);
void write_error_report_csv(std::ostream& out, const ErrorReport& report);
void write_stability_csvs(const RunConfig& config, const StabilityReport& report);
void write_fit_csv(std::ostream& out, std::span<const std::pair<std::string, FitResult>> fits);

}  // namespace mbe
