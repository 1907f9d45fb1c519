#include "mbe/checkpoint.hpp"
#include "mbe/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace mbe;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mbe_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_coarsening(const fs::path& out) {
  RunConfig c;
  c.nx = c.ny = 16;
  c.eta = 0.1;
  c.tau = 0.1;
  c.t_final = 3.0;
  c.initial = InitialKind::RandomUniform;
  c.seed = 99;
  c.stride = 2;
  c.checkpoint_every = 10;
  c.fit_lo = 0.5;
  c.fit_hi = 3.0;
  c.snapshot_times = {0.0, 1.0};
  c.out_dir = out;
  return c;
}

bool same_records(const std::vector<DiagnosticsRecord>& a, const std::vector<DiagnosticsRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].t != b[i].t || a[i].E != b[i].E || a[i].H != b[i].H || a[i].M != b[i].M) return false;
    if (std::isnan(a[i].E_mod) != std::isnan(b[i].E_mod)) return false;
    if (!std::isnan(a[i].E_mod) && a[i].E_mod != b[i].E_mod) return false;
  }
  return true;
}

bool bit_equal(const ScalarField& a, const ScalarField& b) {
  return a.grid == b.grid &&
         std::memcmp(a.values.data(), b.values.data(), sizeof(double) * static_cast<std::size_t>(a.values.size())) == 0;
}

}  // namespace

TEST_CASE("config parsing") {
  RunConfig c;
  std::istringstream in(R"(
# comment line
n = 32
scheme = bdf3ep3-stabilized
tau = 1/40     # trailing comment
eta = 0.5
A = 4
tfinal = 2
init = random
seed = 17
taus = 1/20, 1/40,0.0125
A_list = 0,4,20,100
dealias = on
startup = exact
)");
  apply_config_stream(c, in);
  CHECK(c.nx == 32);
  CHECK(c.ny == 32);
  CHECK(c.scheme == Scheme::BDF3EP3Stabilized);
  CHECK(c.tau == 0.025);
  CHECK(c.eta == 0.5);
  CHECK(c.A == 4.0);
  CHECK(c.initial == InitialKind::RandomUniform);
  CHECK(c.seed == std::optional<std::uint64_t>(17));
  CHECK(c.tau_list == std::vector<double>{0.05, 0.025, 0.0125});
  CHECK(c.A_list.size() == 4);
  CHECK(c.dealias);
  CHECK(c.startup == StartupMode::Exact);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config errors name the problem") {
  RunConfig c;
  std::istringstream unknown("nx = 8\nfoo = 1\n");
  CHECK_THROWS_WITH_AS(apply_config_stream(c, unknown, "cfg"), doctest::Contains("cfg:2: unknown config key 'foo'"),
                       std::invalid_argument);
  std::istringstream no_eq("nx 8\n");
  CHECK_THROWS_WITH_AS(apply_config_stream(c, no_eq, "cfg"), doctest::Contains("cfg:1"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(apply_setting(c, "eta", "abc"), doctest::Contains("not a number"), std::invalid_argument);
  CHECK_THROWS_AS(apply_setting(c, "scheme", "rk4"), std::invalid_argument);
  CHECK_THROWS_AS(apply_setting(c, "init", "gaussian"), std::invalid_argument);

  RunConfig missing_seed;
  missing_seed.initial = InitialKind::RandomUniform;
  CHECK_THROWS_WITH_AS(missing_seed.validate(), doctest::Contains("seed"), std::invalid_argument);
  RunConfig odd;
  odd.nx = 15;
  CHECK_THROWS_AS(odd.validate(), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_file(c, "/nonexistent/path.cfg"), std::invalid_argument);
}

TEST_CASE("manifest round trip") {
  RunConfig c = small_coarsening("some/dir");
  c.scheme = Scheme::BDF3EP3Stabilized;
  c.A = 0.1 + 0.2;  // not representable in a short decimal
  c.tau_list = {1.0 / 3.0, 1.0 / 7.0};
  const std::string text = to_manifest(c);
  RunConfig back;
  std::istringstream in(text);
  apply_config_stream(back, in);
  CHECK(to_manifest(back) == text);
  CHECK(back.A == c.A);
  CHECK(back.tau_list == c.tau_list);
  CHECK(back.seed == c.seed);
  CHECK(back.out_dir == c.out_dir);
}

TEST_CASE("random initial data is seeded and portable") {
  const Grid g(8, 8);
  const auto a = random_uniform_field(g, 5, 0.0, 1.0);
  const auto b = random_uniform_field(g, 5, 0.0, 1.0);
  CHECK(bit_equal(a, b));
  CHECK(a.values.minCoeff() >= 0.0);
  CHECK(a.values.maxCoeff() < 1.0);
  std::mt19937_64 rng(5);
  CHECK(a.values(0, 0) == static_cast<double>(rng() >> 11) * 0x1.0p-53);
  CHECK(a.values(0, 1) == static_cast<double>(rng() >> 11) * 0x1.0p-53);
  const auto c = random_uniform_field(g, 6, 0.0, 1.0);
  CHECK_FALSE(bit_equal(a, c));
  const auto scaled = random_uniform_field(g, 5, -2.0, 2.0);
  CHECK(scaled.values(3, 3) == doctest::Approx(-2.0 + 4.0 * a.values(3, 3)));
}

TEST_CASE("observed orders") {
  const std::vector<double> tau{0.1, 0.05, 0.025};
  const std::vector<double> err{8e-3, 1e-3, 1.25e-4};
  const auto orders = observed_orders(tau, err);
  REQUIRE(orders.size() == 2);
  CHECK(orders[0] == doctest::Approx(3.0));
  CHECK(orders[1] == doctest::Approx(std::log2(err[1] / err[2])));
  CHECK_THROWS_AS(observed_orders(tau, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("convergence study") {
  RunConfig c;
  c.nx = c.ny = 16;
  c.t_final = 0.5;
  const std::vector<double> taus{0.05, 0.025};
  const auto rep = run_convergence_study(c, taus);
  CHECK(rep.tau == taus);
  CHECK(rep.l2.size() == 2);
  CHECK(rep.order_l2.size() == 1);
  CHECK(rep.l2[1] < rep.l2[0]);
  CHECK(rep.order_l2[0] > 2.0);

  const std::vector<double> increasing{0.025, 0.05};
  CHECK_THROWS_AS(run_convergence_study(c, increasing), std::invalid_argument);
  const std::vector<double> repeated{0.05, 0.05};
  CHECK_THROWS_AS(run_convergence_study(c, repeated), std::invalid_argument);
  const std::vector<double> not_dividing{0.3};
  CHECK_THROWS_AS(run_convergence_study(c, not_dividing), std::invalid_argument);

  std::ostringstream csv;
  write_error_report_csv(csv, rep);
  CHECK(csv.str().rfind("tau,l2,linf,order_l2,order_linf\n", 0) == 0);
}

TEST_CASE("stabilization sweep rejects unsorted A lists") {
  RunConfig c;
  const std::vector<double> taus{0.1};
  const std::vector<double> bad{0.0, 5.0, 1.0};
  CHECK_THROWS_AS(run_stabilization_sweep(c, bad, taus), std::invalid_argument);
}

TEST_CASE("coarsening runs are deterministic") {
  const fs::path dir_a = scratch("det_a");
  const auto a = run_coarsening(small_coarsening(dir_a));
  const auto b = run_coarsening(small_coarsening(scratch("det_b")));
  CHECK(same_records(a.records, b.records));
  CHECK(bit_equal(a.final_state.h_curr, b.final_state.h_curr));
  CHECK(a.records.size() == 16);  // n = 0, 2, ..., 30
  CHECK(a.height_fit.has_value());
  CHECK(fs::exists(dir_a / "snapshot_0.bin"));
  CHECK(fs::exists(dir_a / "snapshot_10.bin"));
  CHECK(fs::exists(dir_a / "checkpoint.bin"));
}

TEST_CASE("kill and resume gives the uninterrupted series") {
  const auto straight = run_coarsening(small_coarsening(scratch("straight")));

  // A job stopped right after its step-20 checkpoint leaves exactly what a
  // run to t = 2.0 leaves on disk.
  const fs::path dir = scratch("killed");
  RunConfig progress = small_coarsening(dir);
  progress.t_final = 2.0;
  (void)run_coarsening(progress);

  const auto state = read_checkpoint(checkpoint_path(progress));
  CHECK(state.step_index == 20);
  std::ifstream series(series_path(progress));
  auto prior = read_series_csv(series);
  series.close();

  RunConfig resume = small_coarsening(dir);
  const auto resumed = run_coarsening(resume, state, prior);
  CHECK(same_records(resumed.records, straight.records));
  CHECK(bit_equal(resumed.final_state.h_curr, straight.final_state.h_curr));

  std::ifstream written(series_path(resume));
  CHECK(same_records(read_series_csv(written), straight.records));
}

TEST_CASE("initial data from a snapshot") {
  const fs::path dir = scratch("from_file");
  const Grid g(16, 16);
  const auto field = random_uniform_field(g, 1, 0.0, 1.0);
  dump_snapshot(field, 0.0, dir / "init.bin");
  RunConfig c;
  c.nx = c.ny = 16;
  c.initial = InitialKind::FromCheckpoint;
  c.init_path = dir / "init.bin";
  CHECK(bit_equal(make_initial_field(c), field));
  c.nx = c.ny = 32;
  CHECK_THROWS_WITH_AS(make_initial_field(c), doctest::Contains("16x16"), std::invalid_argument);
}

TEST_CASE("stability report and its CSVs") {
  RunConfig c;
  c.out_dir = scratch("stability");
  c.root_samples = 500;
  c.contraction_grid = 100;
  c.kappa_count = 20;
  const auto rep = run_stability_report(c);
  CHECK(rep.roots.ok());
  CHECK(std::abs(rep.limit_roots.lambda1 - 1.0) < 1e-10);
  CHECK(rep.contraction.eps0 < 1.0);
  CHECK(rep.diagonalization.max_abs_eigenvalue < 1.0);
  write_stability_csvs(c, rep);
  for (const char* name : {"roots.csv", "norms.csv", "contraction.csv", "diagonalization.csv"}) {
    CAPTURE(name);
    CHECK(fs::file_size(c.out_dir / name) > 0);
  }
  std::ifstream roots(c.out_dir / "roots.csv");
  std::string header;
  std::getline(roots, header);
  CHECK(header.rfind("s,lambda1,re_lambda2,im_lambda2,abs_lambda2", 0) == 0);
}
