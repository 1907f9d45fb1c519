#include "mbe/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mbe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a number");
  }
  return out;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not an integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a boolean");
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    // allow "1/20"
    if (const auto slash = item.find('/'); slash != std::string::npos) {
      const double num = to_double("list", trim(item.substr(0, slash)));
      const double den = to_double("list", trim(item.substr(slash + 1)));
      out.push_back(num / den);
    } else {
      out.push_back(to_double("list", item));
    }
  }
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "nx") c.nx = to_int<int>(key, v);
  else if (key == "ny") c.ny = to_int<int>(key, v);
  else if (key == "n") c.nx = c.ny = to_int<int>(key, v);
  else if (key == "scheme") c.scheme = scheme_from_string(v);
  else if (key == "tau") c.tau = parse_double_list(v).at(0);
  else if (key == "eta") c.eta = to_double(key, v);
  else if (key == "A") c.A = to_double(key, v);
  else if (key == "tfinal") c.t_final = to_double(key, v);
  else if (key == "init") {
    if (v == "random") c.initial = InitialKind::RandomUniform;
    else if (v == "sine") c.initial = InitialKind::SineProduct;
    else if (v == "file") c.initial = InitialKind::FromCheckpoint;
    else throw std::invalid_argument("config key 'init': expected random, sine or file, got '" + v + "'");
  } else if (key == "seed") c.seed = to_int<std::uint64_t>(key, v);
  else if (key == "low") c.low = to_double(key, v);
  else if (key == "high") c.high = to_double(key, v);
  else if (key == "init_path") c.init_path = v;
  else if (key == "forcing") c.forcing = to_bool(key, v);
  else if (key == "out") c.out_dir = v;
  else if (key == "stride") c.stride = to_int<std::int64_t>(key, v);
  else if (key == "dealias") c.dealias = to_bool(key, v);
  else if (key == "startup") {
    if (v == "chain") c.startup = StartupMode::DefaultChain;
    else if (v == "exact") c.startup = StartupMode::Exact;
    else throw std::invalid_argument("config key 'startup': expected chain or exact, got '" + v + "'");
  } else if (key == "taus") c.tau_list = parse_double_list(v);
  else if (key == "A_list") c.A_list = parse_double_list(v);
  else if (key == "fit_lo") c.fit_lo = to_double(key, v);
  else if (key == "fit_hi") c.fit_hi = to_double(key, v);
  else if (key == "checkpoint_every") c.checkpoint_every = to_int<std::int64_t>(key, v);
  else if (key == "snapshot_times") c.snapshot_times = parse_double_list(v);
  else if (key == "s0") c.s0 = to_double(key, v);
  else if (key == "kappa_lo") c.kappa_lo = to_double(key, v);
  else if (key == "kappa_hi") c.kappa_hi = to_double(key, v);
  else if (key == "kappa_count") c.kappa_count = to_int<int>(key, v);
  else if (key == "root_samples") c.root_samples = to_int<int>(key, v);
  else if (key == "contraction_grid") c.contraction_grid = to_int<int>(key, v);
  else if (key == "power_nmax") c.power_nmax = to_int<int>(key, v);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

void apply_config_stream(RunConfig& config, std::istream& in, const std::string& source) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::exception& e) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  apply_config_stream(config, in, path.string());
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  Grid(nx, ny);
  if (!(tau > 0.0)) fail("tau must be positive");
  if (!(eta > 0.0)) fail("eta must be positive");
  if (!(A >= 0.0)) fail("A must be nonnegative");
  if (!(t_final >= 0.0)) fail("tfinal must be nonnegative");
  if (stride < 1) fail("stride must be >= 1");
  if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
  if (initial == InitialKind::RandomUniform && !seed) fail("init = random requires a seed");
  if (initial == InitialKind::RandomUniform && !(high >= low)) fail("need low <= high");
  if (initial == InitialKind::FromCheckpoint && init_path.empty()) fail("init = file requires init_path");
  for (double t : tau_list) {
    if (!(t > 0.0)) fail("taus entries must be positive");
  }
  for (double a : A_list) {
    if (!(a >= 0.0)) fail("A_list entries must be nonnegative");
  }
  if (!(fit_lo > 0.0) || !(fit_hi >= fit_lo)) fail("fit window must satisfy 0 < fit_lo <= fit_hi");
}

std::string to_manifest(const RunConfig& c) {
  std::ostringstream out;
  out << "nx = " << c.nx << '\n'
      << "ny = " << c.ny << '\n'
      << "scheme = " << to_string(c.scheme) << '\n'
      << "tau = " << fmt(c.tau) << '\n'
      << "eta = " << fmt(c.eta) << '\n'
      << "A = " << fmt(c.A) << '\n'
      << "tfinal = " << fmt(c.t_final) << '\n';
  switch (c.initial) {
    case InitialKind::RandomUniform: out << "init = random\n"; break;
    case InitialKind::SineProduct: out << "init = sine\n"; break;
    case InitialKind::FromCheckpoint: out << "init = file\n"; break;
  }
  if (c.seed) out << "seed = " << *c.seed << '\n';
  out << "low = " << fmt(c.low) << '\n' << "high = " << fmt(c.high) << '\n';
  if (!c.init_path.empty()) out << "init_path = " << c.init_path.string() << '\n';
  out << "forcing = " << (c.forcing ? "true" : "false") << '\n'
      << "out = " << c.out_dir.string() << '\n'
      << "stride = " << c.stride << '\n'
      << "dealias = " << (c.dealias ? "true" : "false") << '\n'
      << "startup = " << (c.startup == StartupMode::Exact ? "exact" : "chain") << '\n';
  if (!c.tau_list.empty()) out << "taus = " << fmt_list(c.tau_list) << '\n';
  if (!c.A_list.empty()) out << "A_list = " << fmt_list(c.A_list) << '\n';
  out << "fit_lo = " << fmt(c.fit_lo) << '\n'
      << "fit_hi = " << fmt(c.fit_hi) << '\n'
      << "checkpoint_every = " << c.checkpoint_every << '\n';
  if (!c.snapshot_times.empty()) out << "snapshot_times = " << fmt_list(c.snapshot_times) << '\n';
  out << "s0 = " << fmt(c.s0) << '\n'
      << "kappa_lo = " << fmt(c.kappa_lo) << '\n'
      << "kappa_hi = " << fmt(c.kappa_hi) << '\n'
      << "kappa_count = " << c.kappa_count << '\n'
      << "root_samples = " << c.root_samples << '\n'
      << "contraction_grid = " << c.contraction_grid << '\n'
      << "power_nmax = " << c.power_nmax << '\n';
  return out.str();
}

ScalarField random_uniform_field(const Grid& grid, std::uint64_t seed, double low, double high) {
  std::mt19937_64 rng(seed);
  ScalarField f(grid);
  for (int i = 0; i < grid.nx(); ++i) {
    for (int j = 0; j < grid.ny(); ++j) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      f.values(i, j) = low + (high - low) * u;
    }
  }
  return f;
}

}  // namespace mbe
