#include <catch2/catch_amalgamated.hpp>

#include "narmabench/timeseries.hpp"

using namespace narmabench;

namespace {

// Independent naive reference: recompute the recursion in one loop with
// clamped negative indices, summing the 10-term window in reverse order so
// the arithmetic does not mirror the generator exactly.
std::vector<double> narma10_reference(const std::vector<double>& u) {
  const std::size_t n = u.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    double sum10 = 0.0;
    for (int i = 9; i >= 0; --i) {
      if (static_cast<std::size_t>(i) <= t) sum10 += y[t - i];
    }
    const double u_lag = t >= 9 ? u[t - 9] : 0.0;
    y[t + 1] = 0.3 * y[t] + 0.05 * y[t] * sum10 + 1.5 * u_lag * u[t] + 0.1;
  }
  return y;
}

}  // namespace

TEST_CASE("narma10 recursion under all-zero input", "[timeseries]") {
  // With u == 0 the constant term forces y_1 = 0.1, y_2 = 0.1305.
  std::vector<double> u(50, 0.0);
  std::vector<double> y(50, 0.0);
  REQUIRE(ts::detail::narma10_fill(u, y));
  REQUIRE(y[0] == 0.0);
  REQUIRE(y[1] == Catch::Approx(0.1).margin(1e-15));
  REQUIRE(y[2] == Catch::Approx(0.1305).margin(1e-15));
}

TEST_CASE("narma10 generator is deterministic per seed", "[timeseries]") {
  const ts::Series a = ts::generate_narma10(500, 7);
  const ts::Series b = ts::generate_narma10(500, 7);
  REQUIRE(a.u == b.u);
  REQUIRE(a.y == b.y);
  REQUIRE(a.seed == b.seed);
}

TEST_CASE("narma10 inputs live in [0, 0.5]", "[timeseries]") {
  const ts::Series s = ts::generate_narma10(2000, 3);
  for (double v : s.u) {
    REQUIRE(v >= 0.0);
    REQUIRE(v < 0.5);
  }
  REQUIRE(s.u.size() == s.y.size());
}

TEST_CASE("narma10 generator matches the naive reference loop",
          "[timeseries]") {
  // Oracle equivalence over 100 seeds at length 500 with per-step drift
  // bounded by 1e-12.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ts::Series s = ts::generate_narma10(500, seed);
    const std::vector<double> ref = narma10_reference(s.u);
    for (std::size_t t = 0; t < s.y.size(); ++t) {
      REQUIRE(std::abs(s.y[t] - ref[t]) <= 1e-12 * double(t + 1));
    }
  }
}

TEST_CASE("narma10 outputs stay bounded on long runs", "[timeseries]") {
  for (std::uint64_t seed : {0ull, 11ull, 23ull}) {
    const ts::Series s = ts::generate_narma10(100000, seed);
    for (double v : s.y) REQUIRE(std::abs(v) <= ts::kNarmaDivergenceBound);
    REQUIRE(s.requested_seed == seed);
  }
}

TEST_CASE("narma10 rejects too-short lengths", "[timeseries]") {
  REQUIRE_THROWS_AS(ts::generate_narma10(10, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(ts::generate_narma10(0, 0), std::invalid_argument);
}

TEST_CASE("split produces contiguous non-overlapping views", "[timeseries]") {
  const ts::Series s = ts::generate_narma10(3000, 1);
  const auto [train, eval] = ts::split(s, {2000, 1000, 100});
  REQUIRE(train.length() == 2000);
  REQUIRE(eval.length() == 1000);
  REQUIRE(train.offset == 0);
  REQUIRE(eval.offset == 2000);
  REQUIRE(train.washout == 100);
  REQUIRE(eval.washout == 0);
  REQUIRE(train.u.data() == s.u.data());
  REQUIRE(eval.u.data() == s.u.data() + 2000);
  REQUIRE(eval.y[0] == s.y[2000]);
}

TEST_CASE("split validates its spec", "[timeseries]") {
  const ts::Series s = ts::generate_narma10(100, 1);
  REQUIRE_THROWS_AS(ts::split(s, {50, 51, 10}), std::invalid_argument);
  REQUIRE_THROWS_AS(ts::split(s, {50, 50, 50}), std::invalid_argument);
  REQUIRE_THROWS_AS(ts::split(s, {50, 50, 60}), std::invalid_argument);
}

TEST_CASE("series csv carries full precision", "[timeseries]") {
  const ts::Series s = ts::generate_narma10(12, 5);
  const std::string csv = ts::to_csv(s);
  REQUIRE(csv.rfind("t,u,y\n", 0) == 0);
  // Re-parse a row and compare bit-exactly.
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  std::getline(in, line);  // t = 0
  std::getline(in, line);  // t = 1
  const std::size_t c1 = line.find(',');
  const std::size_t c2 = line.find(',', c1 + 1);
  REQUIRE(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) == s.u[1]);
  REQUIRE(std::stod(line.substr(c2 + 1)) == s.y[1]);
}
