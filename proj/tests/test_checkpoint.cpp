#include "mbe/checkpoint.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace mbe;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mbe_test_checkpoint";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

bool bit_equal(const ScalarField& a, const ScalarField& b) {
  return a.grid == b.grid &&
         std::memcmp(a.values.data(), b.values.data(), sizeof(double) * static_cast<std::size_t>(a.values.size())) == 0;
}

SchemeParams stabilized_params() {
  SchemeParams p;
  p.scheme = Scheme::BDF3EP3Stabilized;
  p.tau = 0.05;
  p.eta = 0.25;
  p.stabilization_A = 2.5;
  return p;
}

}  // namespace

TEST_CASE("checkpoint header layout") {
  const Grid g(8, 6);
  const auto state = run(test::random_field(g, 1), stabilized_params(), 0.15);
  const auto path = scratch("layout.bin");
  write_checkpoint(path, state);
  const auto bytes = slurp(path);
  REQUIRE(bytes.size() == 4 + 4 * 3 + 8 * 3 + 1 + 8 + 3 * 8 * 48);
  CHECK(std::string(bytes.data(), 4) == "MBE3");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 8);
  CHECK(bytes[12] == 6);
  CHECK(bytes[40] == 4);  // scheme code
  CHECK(bytes[41] == 3);  // step index
}

TEST_CASE("resuming from a checkpoint reproduces the straight run bit for bit") {
  const Grid g(32, 32);
  const auto params = stabilized_params();
  const auto h0 = test::random_field(g, 2, 0.0, 1.0);
  const auto straight = run(h0, params, 2.0);

  const auto half = run(h0, params, 1.0);
  const auto path = scratch("resume.bin");
  write_checkpoint(path, half);
  const auto restored = read_checkpoint(path);
  CHECK(restored.step_index == half.step_index);
  CHECK(restored.params.scheme == params.scheme);
  CHECK(restored.params.tau == params.tau);
  CHECK(restored.params.eta == params.eta);
  CHECK(restored.params.stabilization_A == params.stabilization_A);
  CHECK(bit_equal(restored.h_prev2, half.h_prev2));

  const auto resumed = run(restored, 2.0);
  CHECK(resumed.step_index == straight.step_index);
  CHECK(bit_equal(resumed.h_curr, straight.h_curr));
  CHECK(bit_equal(resumed.h_prev, straight.h_prev));
  CHECK(bit_equal(resumed.h_prev2, straight.h_prev2));
}

TEST_CASE("checkpoint keeps runtime-only fields from the base parameters") {
  const Grid g(8, 8);
  SchemeParams p;
  p.nonlinearity_enabled = false;
  p.dealias = true;
  const auto path = scratch("base.bin");
  write_checkpoint(path, initial_state(ScalarField::constant(g, 1.0), p));
  SchemeParams base;
  base.dealias = true;
  const auto restored = read_checkpoint(path, base);
  CHECK(restored.params.dealias);
  CHECK(restored.params.nonlinearity_enabled);
}

TEST_CASE("malformed checkpoints are rejected") {
  const Grid g(8, 8);
  const auto path = scratch("bad.bin");
  write_checkpoint(path, initial_state(test::random_field(g, 3), SchemeParams{}));
  const auto good = slurp(path);

  SUBCASE("wrong magic names both byte strings") {
    auto bytes = good;
    std::memcpy(bytes.data(), "XYZ3", 4);
    spit(path, bytes);
    CHECK_THROWS_WITH_AS(read_checkpoint(path), doctest::Contains("expected \"MBE3\" found \"XYZ3\""), FormatError);
  }
  SUBCASE("wrong version") {
    auto bytes = good;
    bytes[4] = 2;
    spit(path, bytes);
    CHECK_THROWS_WITH_AS(read_checkpoint(path), doctest::Contains("version 2"), FormatError);
  }
  SUBCASE("truncated") {
    auto bytes = good;
    bytes.resize(bytes.size() - 5);
    spit(path, bytes);
    CHECK_THROWS_WITH_AS(read_checkpoint(path), doctest::Contains("truncated"), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto bytes = good;
    bytes.push_back('x');
    spit(path, bytes);
    CHECK_THROWS_WITH_AS(read_checkpoint(path), doctest::Contains("trailing"), FormatError);
  }
  SUBCASE("unknown scheme code") {
    auto bytes = good;
    bytes[40] = 9;
    spit(path, bytes);
    CHECK_THROWS_AS(read_checkpoint(path), FormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_checkpoint(scratch("does_not_exist.bin")), FormatError);
  }
}

TEST_CASE("snapshot round trip is bit exact") {
  const Grid g(12, 10);
  const auto h = test::random_field(g, 4, -1e3, 1e3);
  const auto path = scratch("snap.bin");
  dump_snapshot(h, 12.5, path);
  const auto back = load_snapshot(path);
  CHECK(back.t == 12.5);
  CHECK(bit_equal(back.field, h));
  CHECK(std::string(slurp(path).data(), 4) == "MBEF");
}

TEST_CASE("malformed snapshots are rejected") {
  const Grid g(8, 8);
  const auto path = scratch("snap_bad.bin");
  dump_snapshot(test::random_field(g, 5), 1.0, path);
  const auto good = slurp(path);

  SUBCASE("truncated") {
    auto bytes = good;
    bytes.resize(30);
    spit(path, bytes);
    CHECK_THROWS_AS(load_snapshot(path), FormatError);
  }
  SUBCASE("wrong magic") {
    auto bytes = good;
    bytes[3] = 'G';
    spit(path, bytes);
    CHECK_THROWS_WITH_AS(load_snapshot(path), doctest::Contains("found \"MBEG\""), FormatError);
  }
  SUBCASE("checkpoint passed as snapshot") {
    write_checkpoint(path, initial_state(test::random_field(g, 5), SchemeParams{}));
    CHECK_THROWS_AS(load_snapshot(path), FormatError);
  }
}
