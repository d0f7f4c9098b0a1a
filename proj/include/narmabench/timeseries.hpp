#pragma once

// NARMA-10 sequence generation and train/eval split bookkeeping.
//
// The target obeys
//   y[t+1] = 0.3*y[t] + 0.05*y[t]*sum_{i=0..9} y[t-i] + 1.5*u[t-9]*u[t] + 0.1
// with y and u taken as zero for negative indices and u drawn i.i.d. uniform
// on [0, 0.5]. The recursion occasionally diverges for unlucky input draws;
// generation retries with seed+1 until the sequence stays bounded and records
// how many substitutions happened.

#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "narmabench/io.hpp"
#include "narmabench/rng.hpp"

namespace narmabench::ts {

inline constexpr double kNarmaDivergenceBound = 10.0;

struct Series {
  std::vector<double> u;
  std::vector<double> y;
  std::uint64_t seed = 0;            // seed actually used
  std::uint64_t requested_seed = 0;  // seed asked for (== seed unless retried)
  int regenerations = 0;             // divergence substitutions applied

  std::size_t length() const { return u.size(); }
};

struct SplitSpec {
  std::size_t n_train = 2000;
  std::size_t n_eval = 1000;
  std::size_t washout = 100;
};

/// Contiguous window into a Series. Train views carry the washout count;
/// eval views always have washout == 0.
struct SeriesView {
  std::span<const double> u;
  std::span<const double> y;
  std::size_t offset = 0;   // start index within the parent series
  std::size_t washout = 0;  // leading steps flagged as transient

  std::size_t length() const { return u.size(); }
};

namespace detail {

/// One attempt at the recursion; returns false on divergence.
inline bool narma10_fill(const std::vector<double>& u, std::vector<double>& y) {
  const std::size_t n = u.size();
  y.assign(n, 0.0);
  for (std::size_t t = 0; t + 1 < n; ++t) {
    double sum10 = 0.0;
    for (std::size_t i = 0; i < 10 && i <= t; ++i) sum10 += y[t - i];
    const double u_lag = t >= 9 ? u[t - 9] : 0.0;
    const double next =
        0.3 * y[t] + 0.05 * y[t] * sum10 + 1.5 * u_lag * u[t] + 0.1;
    if (!(std::abs(next) <= kNarmaDivergenceBound)) return false;
    y[t + 1] = next;
  }
  return true;
}

}  // namespace detail

/// Pure function of (length, seed); same arguments give a bit-identical
/// Series.
inline Series generate_narma10(std::size_t length, std::uint64_t seed) {
  if (length <= 10) {
    throw std::invalid_argument("generate_narma10: length must exceed 10");
  }
  Series s;
  s.requested_seed = seed;
  for (std::uint64_t trial_seed = seed;; ++trial_seed) {
    rng::RandomStream stream(rng::derive_seed(trial_seed, "narma10-input"));
    s.u.resize(length);
    for (double& v : s.u) v = 0.5 * stream.uniform();
    if (detail::narma10_fill(s.u, s.y)) {
      s.seed = trial_seed;
      s.regenerations = static_cast<int>(trial_seed - seed);
      return s;
    }
  }
}

inline std::pair<SeriesView, SeriesView> split(const Series& series,
                                               const SplitSpec& spec) {
  if (spec.washout >= spec.n_train) {
    throw std::invalid_argument("split: washout must be below n_train");
  }
  if (spec.n_train + spec.n_eval > series.length()) {
    throw std::invalid_argument("split: n_train + n_eval exceeds series length");
  }
  SeriesView train{
      std::span<const double>(series.u).subspan(0, spec.n_train),
      std::span<const double>(series.y).subspan(0, spec.n_train),
      0,
      spec.washout};
  SeriesView eval{
      std::span<const double>(series.u).subspan(spec.n_train, spec.n_eval),
      std::span<const double>(series.y).subspan(spec.n_train, spec.n_eval),
      spec.n_train,
      0};
  return {train, eval};
}

/// CSV rendering with header `t,u,y` at full double precision.
inline std::string to_csv(const Series& s) {
  std::ostringstream out;
  out << "t,u,y\n";
  for (std::size_t t = 0; t < s.length(); ++t) {
    out << t << ',' << io::fmt17(s.u[t]) << ',' << io::fmt17(s.y[t]) << '\n';
  }
  return out.str();
}

}  // namespace narmabench::ts
