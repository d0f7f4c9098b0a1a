#include <catch2/catch_amalgamated.hpp>

#include "narmabench/lstm.hpp"
#include "narmabench/timeseries.hpp"

using namespace narmabench;

namespace {

// Flattened parameter view for finite differencing.
struct ParamRef {
  double* ptr;
};

std::vector<ParamRef> all_params(lstm::LstmParams& p) {
  std::vector<ParamRef> refs;
  auto add = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) refs.push_back({m.data() + i});
  };
  add(p.W_f);
  add(p.W_i);
  add(p.W_c);
  add(p.W_o);
  add(p.b_f);
  add(p.b_i);
  add(p.b_c);
  add(p.b_o);
  add(p.W_out);
  refs.push_back({&p.b_out});
  return refs;
}

std::vector<double> flatten(const lstm::LstmGrads& g) {
  std::vector<double> out;
  auto add = [&](const auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i]);
  };
  add(g.W_f);
  add(g.W_i);
  add(g.W_c);
  add(g.W_o);
  add(g.b_f);
  add(g.b_i);
  add(g.b_c);
  add(g.b_o);
  add(g.W_out);
  out.push_back(g.b_out);
  return out;
}

double loss_of(const lstm::LstmParams& p, const Eigen::MatrixXd& x,
               std::span<const double> y) {
  return lstm::window_loss(lstm::lstm_forward(p, x), y);
}

// Central finite differences against the analytic gradient; relative
// comparison with an absolute floor of 1e-8 for near-zero entries (the FD
// oracle itself is only accurate to ~1e-9 absolute at step 1e-5).
void check_gradients(std::uint64_t seed, int hidden, int steps,
                     double rel_tol) {
  rng::RandomStream stream(seed);
  lstm::LstmParams p = lstm::LstmParams::init(hidden, 1, seed, false);
  Eigen::MatrixXd x(1, steps);
  std::vector<double> y(steps);
  for (int t = 0; t < steps; ++t) {
    x(0, t) = stream.uniform(-1.0, 1.0);
    y[t] = stream.uniform(-1.0, 1.0);
  }
  const lstm::ForwardCache cache = lstm::lstm_forward(p, x);
  const lstm::LstmGrads grads = lstm::lstm_backward(p, cache, y);
  const std::vector<double> analytic = flatten(grads);
  const std::vector<ParamRef> refs = all_params(p);
  REQUIRE(analytic.size() == refs.size());
  const double h = 1e-5;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const double saved = *refs[k].ptr;
    *refs[k].ptr = saved + h;
    const double up = loss_of(p, x, y);
    *refs[k].ptr = saved - h;
    const double dn = loss_of(p, x, y);
    *refs[k].ptr = saved;
    const double fd = (up - dn) / (2.0 * h);
    const double diff = std::abs(fd - analytic[k]);
    const bool ok =
        diff <= rel_tol * std::max(std::abs(fd), std::abs(analytic[k])) ||
        diff <= 1e-8;
    if (!ok) {
      INFO("param " << k << ": analytic " << analytic[k] << " vs fd " << fd);
      REQUIRE(ok);
    }
  }
}

ts::SeriesView full_view(const ts::Series& s, std::size_t washout = 0) {
  return {std::span<const double>(s.u), std::span<const double>(s.y), 0,
          washout};
}

}  // namespace

TEST_CASE("all-zero parameters give identically zero output", "[lstm]") {
  const lstm::LstmParams p = lstm::LstmParams::zeros(8, 1);
  Eigen::MatrixXd x(1, 20);
  x.setRandom();
  const lstm::ForwardCache cache = lstm::lstm_forward(p, x);
  REQUIRE(cache.y_hat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("H=1 two-step rollout matches the hand-computed fixture", "[lstm]") {
  // Values computed independently from the gate equations (double
  // precision, sigmoid/tanh rollout on paper-checkable scalars).
  lstm::LstmParams p = lstm::LstmParams::zeros(1, 1);
  p.W_f << 0.5, -0.25;
  p.b_f << 0.1;
  p.W_i << 0.3, 0.2;
  p.b_i << -0.1;
  p.W_c << -0.4, 0.6;
  p.b_c << 0.05;
  p.W_o << 0.25, 0.5;
  p.b_o << 0.0;
  p.W_out << 1.5;
  p.b_out = -0.2;
  Eigen::MatrixXd x(1, 2);
  x << 0.3, -0.1;
  const lstm::ForwardCache cache = lstm::lstm_forward(p, x);
  REQUIRE(cache.y_hat[0] ==
          Catch::Approx(-0.11107937042385241).margin(1e-12));
  REQUIRE(cache.y_hat[1] ==
          Catch::Approx(-0.16785057520676422).margin(1e-12));
  REQUIRE(cache.h(0, 0) == Catch::Approx(0.05928041971743173).margin(1e-12));
  REQUIRE(cache.h(0, 1) == Catch::Approx(0.021432949862157203).margin(1e-12));
  REQUIRE(cache.c(0, 0) == Catch::Approx(0.11075419393947357).margin(1e-12));
  REQUIRE(cache.c(0, 1) == Catch::Approx(0.04366105090131733).margin(1e-12));
}

TEST_CASE("forward pass is deterministic", "[lstm]") {
  const lstm::LstmParams p = lstm::LstmParams::init(6, 1, 3);
  Eigen::MatrixXd x(1, 15);
  x.setRandom();
  REQUIRE(lstm::lstm_forward(p, x).y_hat == lstm::lstm_forward(p, x).y_hat);
}

TEST_CASE("zero error produces zero gradients", "[lstm]") {
  const lstm::LstmParams p = lstm::LstmParams::init(4, 1, 5);
  Eigen::MatrixXd x(1, 10);
  x.setRandom();
  const lstm::ForwardCache cache = lstm::lstm_forward(p, x);
  std::vector<double> targets(cache.y_hat.data(),
                              cache.y_hat.data() + cache.y_hat.size());
  const lstm::LstmGrads g = lstm::lstm_backward(p, cache, targets);
  for (double v : flatten(g)) REQUIRE(v == 0.0);
}

TEST_CASE("readout bias gradient is the mean scaled residual", "[lstm]") {
  const lstm::LstmParams p = lstm::LstmParams::init(5, 1, 7);
  Eigen::MatrixXd x(1, 12);
  x.setRandom();
  const lstm::ForwardCache cache = lstm::lstm_forward(p, x);
  std::vector<double> y(12);
  rng::RandomStream stream(9);
  for (double& v : y) v = stream.uniform(-1.0, 1.0);
  const lstm::LstmGrads g = lstm::lstm_backward(p, cache, y);
  double expected = 0.0;
  for (int t = 0; t < 12; ++t) expected += 2.0 * (cache.y_hat[t] - y[t]);
  expected /= 12.0;
  REQUIRE(g.b_out == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("BPTT matches central finite differences", "[lstm]") {
  check_gradients(1, 4, 10, 1e-4);
  check_gradients(2, 3, 7, 1e-4);
}

TEST_CASE("gradient check holds across 20 seeds", "[lstm][gradcheck]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    check_gradients(seed, 4, 10, 1e-4);
  }
}

TEST_CASE("zero epochs return the initialization", "[lstm]") {
  const ts::Series s = ts::generate_narma10(120, 3);
  lstm::TrainSpec spec;
  spec.epochs = 0;
  spec.seed = 11;
  spec.window = 30;
  const lstm::TrainResult r = lstm::train_lstm(full_view(s), spec, 6);
  const lstm::LstmParams init =
      lstm::LstmParams::init(6, 1, 11, spec.forget_bias_one);
  REQUIRE(r.params.W_f == init.W_f);
  REQUIRE(r.params.W_out == init.W_out);
  REQUIRE(r.params.b_out == init.b_out);
  REQUIRE(r.loss_curve.size() == 1);
}

TEST_CASE("training reduces the loss on a NARMA window", "[lstm]") {
  const ts::Series s = ts::generate_narma10(400, 0);
  lstm::TrainSpec spec;
  spec.epochs = 5;
  spec.window = 40;
  spec.seed = 0;
  const lstm::TrainResult r = lstm::train_lstm(full_view(s), spec, 16);
  REQUIRE_FALSE(r.diverged);
  for (double v : r.loss_curve) REQUIRE(std::isfinite(v));
  REQUIRE(r.loss_curve.back() < r.loss_curve.front());
  REQUIRE(r.train_seconds >= 0.0);
}

TEST_CASE("training is deterministic per seed", "[lstm]") {
  const ts::Series s = ts::generate_narma10(200, 1);
  lstm::TrainSpec spec;
  spec.epochs = 2;
  spec.window = 25;
  spec.seed = 13;
  const lstm::TrainResult a = lstm::train_lstm(full_view(s), spec, 8);
  const lstm::TrainResult b = lstm::train_lstm(full_view(s), spec, 8);
  REQUIRE(a.params.W_f == b.params.W_f);
  REQUIRE(a.params.W_out == b.params.W_out);
  REQUIRE(a.loss_curve == b.loss_curve);
}

TEST_CASE("prediction is finite, deterministic, and matches the fixture "
          "path",
          "[lstm]") {
  const ts::Series s = ts::generate_narma10(150, 2);
  const auto [train, eval] = ts::split(s, {100, 50, 10});
  lstm::TrainSpec spec;
  spec.epochs = 1;
  spec.window = 20;
  spec.seed = 4;
  const lstm::TrainResult r = lstm::train_lstm(train, spec, 6);
  const Eigen::VectorXd a = lstm::predict_lstm(r.params, eval, false);
  const Eigen::VectorXd b = lstm::predict_lstm(r.params, eval, false);
  REQUIRE(a == b);
  REQUIRE(a.allFinite());
  // u-only prediction equals the plain forward pass over the eval inputs
  Eigen::MatrixXd x(1, 50);
  for (int t = 0; t < 50; ++t) x(0, t) = eval.u[t];
  REQUIRE((lstm::lstm_forward(r.params, x).y_hat - a).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("autoregressive feed-y rollout feeds its own predictions",
          "[lstm]") {
  // With feed_y, step t's second input channel is the previous prediction;
  // replicate the rollout manually and compare.
  lstm::LstmParams p = lstm::LstmParams::init(3, 2, 21);
  const ts::Series s = ts::generate_narma10(40, 5);
  ts::SeriesView view = full_view(s);
  const Eigen::VectorXd pred = lstm::predict_lstm(p, view, true);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
  double y_prev = 0.0;
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd x(2, 1);
    x << s.u[t], y_prev;
    const lstm::ForwardCache cache = lstm::lstm_forward(p, x, &h, &c);
    h = cache.h.col(0);
    c = cache.c.col(0);
    y_prev = cache.y_hat[0];
    REQUIRE(pred[t] == Catch::Approx(y_prev).margin(1e-14));
  }
}

TEST_CASE("parameter counting formula", "[lstm]") {
  REQUIRE(lstm::count_lstm_params(1, 1) == 14);
  REQUIRE(lstm::count_lstm_params(4, 1) == 101);
  REQUIRE(lstm::count_lstm_params(128, 1) == 66689);
  REQUIRE_THROWS_AS(lstm::count_lstm_params(0, 1), std::invalid_argument);
}

TEST_CASE("train input validation", "[lstm]") {
  const ts::Series s = ts::generate_narma10(50, 1);
  lstm::TrainSpec spec;
  spec.learning_rate = 0.0;
  REQUIRE_THROWS_AS(lstm::train_lstm(full_view(s), spec, 4),
                    std::invalid_argument);
}
