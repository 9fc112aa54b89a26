#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>

#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"

using namespace statecal;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("statecal_io_test_" + std::to_string(std::rand()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("format_double emits shortest round-tripping decimals") {
  CHECK(io::format_double(0.0) == "0");
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(-3.25) == "-3.25");

  Rng rng(2024);
  for (int i = 0; i < 2000; ++i) {
    double v = 0.0;
    switch (i % 5) {
      case 0: v = rng.normal(); break;
      case 1: v = rng.normal() * 1e12; break;
      case 2: v = rng.normal() * 1e-12; break;
      case 3: v = rng.uniform(); break;
      case 4: v = rng.normal() * 1e-300; break;  // subnormal territory
    }
    const std::string s = io::format_double(v);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }

  for (const double v :
       {M_PI, std::numeric_limits<double>::denorm_min(),
        std::numeric_limits<double>::max(), std::numeric_limits<double>::min(),
        -0.0, 0.1, 1.0 / 3.0}) {
    const std::string s = io::format_double(v);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
}

TEST_CASE("csv tables round-trip bit-for-bit") {
  io::Table t;
  t.columns = {"alpha", "beta_2", "gamma"};
  t.values.resize(4, 3);
  Rng rng(7);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) t.values(i, j) = rng.normal() * std::pow(10.0, j);
  t.values(0, 0) = 1.0 / 3.0;
  t.values(1, 1) = -0.0;
  t.values(2, 2) = 5e-324;

  const fs::path p = temp_dir() / "round.csv";
  io::write_csv(p, t);
  const io::Table back = io::read_csv(p);
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.values.rows() == 4);
  REQUIRE(back.values.cols() == 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) {
      const double a = t.values(i, j), b = back.values(i, j);
      CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    }

  // Zero-row tables keep their header.
  io::Table empty;
  empty.columns = {"only"};
  empty.values.resize(0, 1);
  const fs::path pe = temp_dir() / "empty.csv";
  io::write_csv(pe, empty);
  const io::Table eback = io::read_csv(pe);
  CHECK(eback.columns == empty.columns);
  CHECK(eback.values.rows() == 0);
}

TEST_CASE("read_csv reports a helpful io error for a missing file") {
  try {
    (void)io::read_csv(temp_dir() / "no_such.csv");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
    CHECK(std::string(e.what()).find("no_such.csv") != std::string::npos);
  }
}

TEST_CASE("plain text files round-trip and create parents") {
  const fs::path nested = temp_dir() / "a" / "b" / "note.txt";
  io::ensure_dir(nested.parent_path());
  const std::string body = "line one\nline two\n";
  io::write_text(nested, body);
  CHECK(io::read_text(nested) == body);

  // ensure_dir is idempotent.
  CHECK_NOTHROW(io::ensure_dir(nested.parent_path()));
  CHECK_THROWS_AS((void)io::read_text(temp_dir() / "absent.txt"), Error);
}
