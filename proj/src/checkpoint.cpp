#include "mbe/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace mbe {

namespace {

constexpr std::array<char, 4> kCheckpointMagic = {'M', 'B', 'E', '3'};
constexpr std::array<char, 4> kSnapshotMagic = {'M', 'B', 'E', 'F'};

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }

  template <typename UInt>
  void uint(UInt v) {
    for (std::size_t b = 0; b < sizeof(UInt); ++b) {
      buf_.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
    }
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void field(const ScalarField& f) {
    for (int i = 0; i < f.grid.nx(); ++i) {
      for (int j = 0; j < f.grid.ny(); ++j) f64(f.values(i, j));
    }
  }

  void save(const std::filesystem::path& path) const {
    // temp file + rename
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
      out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
      if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void magic(const std::array<char, 4>& expected) {
    need(4, "magic");
    if (std::memcmp(buf_.data(), expected.data(), 4) != 0) {
      std::ostringstream msg;
      msg << path_.string() << ": bad magic, expected \"" << std::string(expected.data(), 4)
          << "\" found \"" << std::string(buf_.data(), 4) << "\"";
      throw FormatError(msg.str());
    }
    pos_ = 4;
  }

  template <typename UInt>
  UInt uint(const char* what) {
    need(sizeof(UInt), what);
    UInt v = 0;
    for (std::size_t b = 0; b < sizeof(UInt); ++b) {
      v |= static_cast<UInt>(static_cast<unsigned char>(buf_[pos_ + b])) << (8 * b);
    }
    pos_ += sizeof(UInt);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }

  ScalarField field(const Grid& g, const char* what) {
    need(static_cast<std::size_t>(g.size()) * 8, what);
    ScalarField f(g);
    for (int i = 0; i < g.nx(); ++i) {
      for (int j = 0; j < g.ny(); ++j) f.values(i, j) = f64(what);
    }
    return f;
  }

  void expect_end() const {
    if (pos_ != buf_.size()) {
      std::ostringstream msg;
      msg << path_.string() << ": " << buf_.size() - pos_ << " trailing bytes";
      throw FormatError(msg.str());
    }
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (buf_.size() - pos_ < n) {
      std::ostringstream msg;
      msg << path_.string() << ": truncated while reading " << what << " (need " << n << " bytes at offset "
          << pos_ << ", file has " << buf_.size() << ")";
      throw FormatError(msg.str());
    }
  }

  std::filesystem::path path_;
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

void check_version(std::uint32_t found, std::uint32_t expected, const std::filesystem::path& path) {
  if (found != expected) {
    std::ostringstream msg;
    msg << path.string() << ": unsupported format version " << found << " (expected " << expected << ")";
    throw FormatError(msg.str());
  }
}

Grid read_grid(Reader& r, const std::filesystem::path& path) {
  const auto nx = r.uint<std::uint32_t>("nx");
  const auto ny = r.uint<std::uint32_t>("ny");
  try {
    return Grid(static_cast<int>(nx), static_cast<int>(ny));
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const SolverState& state) {
  Writer w;
  w.bytes(kCheckpointMagic.data(), 4);
  w.uint<std::uint32_t>(kCheckpointVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(state.grid().nx()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(state.grid().ny()));
  w.f64(state.params.tau);
  w.f64(state.params.eta);
  w.f64(state.params.stabilization_A);
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(state.params.scheme));
  w.uint<std::uint64_t>(static_cast<std::uint64_t>(state.step_index));
  w.field(state.h_prev2);
  w.field(state.h_prev);
  w.field(state.h_curr);
  w.save(path);
}

SolverState read_checkpoint(const std::filesystem::path& path, const SchemeParams& base) {
  Reader r(path);
  r.magic(kCheckpointMagic);
  check_version(r.uint<std::uint32_t>("version"), kCheckpointVersion, path);
  const Grid grid = read_grid(r, path);
  SchemeParams params = base;
  params.tau = r.f64("tau");
  params.eta = r.f64("eta");
  params.stabilization_A = r.f64("A");
  const auto scheme = r.uint<std::uint8_t>("scheme");
  if (scheme < 1 || scheme > 4) {
    throw FormatError(path.string() + ": unknown scheme code " + std::to_string(scheme));
  }
  params.scheme = static_cast<Scheme>(scheme);
  const auto step = r.uint<std::uint64_t>("step_index");
  ScalarField h_prev2 = r.field(grid, "h_prev2");
  ScalarField h_prev = r.field(grid, "h_prev");
  ScalarField h_curr = r.field(grid, "h_curr");
  r.expect_end();
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return SolverState{std::move(h_curr), std::move(h_prev), std::move(h_prev2),
                     static_cast<std::int64_t>(step), params};
}

void dump_snapshot(const ScalarField& h, double t, const std::filesystem::path& path) {
  Writer w;
  w.bytes(kSnapshotMagic.data(), 4);
  w.uint<std::uint32_t>(kSnapshotVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(h.grid.nx()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(h.grid.ny()));
  w.f64(t);
  w.field(h);
  w.save(path);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  Reader r(path);
  r.magic(kSnapshotMagic);
  check_version(r.uint<std::uint32_t>("version"), kSnapshotVersion, path);
  const Grid grid = read_grid(r, path);
  const double t = r.f64("t");
  ScalarField field = r.field(grid, "values");
  r.expect_end();
  return Snapshot{std::move(field), t};
}

}  // namespace mbe
