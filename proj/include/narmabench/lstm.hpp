#pragma once

// Single-layer sequence-to-sequence LSTM with hand-rolled BPTT and Adam.
//
// Gates, per step t with z_t = [h_{t-1}; x_t]:
//   f_t = sigmoid(W_f z_t + b_f)      i_t = sigmoid(W_i z_t + b_i)
//   c~_t = tanh(W_c z_t + b_c)        o_t = sigmoid(W_o z_t + b_o)
//   c_t = f_t . c_{t-1} + i_t . c~_t  h_t = o_t . tanh(c_t)
//   y^_t = W_out h_t + b_out
// Training minimizes the mean squared error over each window; gradients are
// exact (full unroll within a window). Windows are non-overlapping chunks of
// the training sequence, visited in a seeded shuffled order, one Adam step
// per window, hidden state reset at window boundaries.

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "narmabench/optim.hpp"
#include "narmabench/rng.hpp"
#include "narmabench/timeseries.hpp"

namespace narmabench::lstm {

struct LstmParams {
  Eigen::MatrixXd W_f, W_i, W_c, W_o;  // H x (H + d_in)
  Eigen::VectorXd b_f, b_i, b_c, b_o;  // H
  Eigen::RowVectorXd W_out;            // 1 x H
  double b_out = 0.0;
  int hidden = 128;
  int d_in = 1;

  static LstmParams zeros(int hidden, int d_in) {
    LstmParams p;
    p.hidden = hidden;
    p.d_in = d_in;
    const int cols = hidden + d_in;
    p.W_f = Eigen::MatrixXd::Zero(hidden, cols);
    p.W_i = Eigen::MatrixXd::Zero(hidden, cols);
    p.W_c = Eigen::MatrixXd::Zero(hidden, cols);
    p.W_o = Eigen::MatrixXd::Zero(hidden, cols);
    p.b_f = Eigen::VectorXd::Zero(hidden);
    p.b_i = Eigen::VectorXd::Zero(hidden);
    p.b_c = Eigen::VectorXd::Zero(hidden);
    p.b_o = Eigen::VectorXd::Zero(hidden);
    p.W_out = Eigen::RowVectorXd::Zero(hidden);
    p.b_out = 0.0;
    return p;
  }

  /// Uniform [-1/sqrt(H), 1/sqrt(H)] init; the forget-gate bias is then set
  /// to 1 unless disabled.
  static LstmParams init(int hidden, int d_in, std::uint64_t seed,
                         bool forget_bias_one = true) {
    LstmParams p = zeros(hidden, d_in);
    rng::RandomStream stream(rng::derive_seed(seed, "lstm-init"));
    const double bound = 1.0 / std::sqrt(double(hidden));
    auto fill = [&](auto& m) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          m(i, j) = stream.uniform(-bound, bound);
        }
      }
    };
    fill(p.W_f);
    fill(p.W_i);
    fill(p.W_c);
    fill(p.W_o);
    fill(p.b_f);
    fill(p.b_i);
    fill(p.b_c);
    fill(p.b_o);
    fill(p.W_out);
    p.b_out = stream.uniform(-bound, bound);
    if (forget_bias_one) p.b_f.setOnes();
    return p;
  }
};

struct LstmGrads {
  Eigen::MatrixXd W_f, W_i, W_c, W_o;
  Eigen::VectorXd b_f, b_i, b_c, b_o;
  Eigen::RowVectorXd W_out;
  double b_out = 0.0;
};

struct TrainSpec {
  int epochs = 20;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int window = 50;  // BPTT chunk length; 0 = unroll the whole sequence
  bool feed_y = false;  // append the lagged target as a second input channel
  bool forget_bias_one = true;
  std::uint64_t seed = 0;
};

struct ForwardCache {
  Eigen::MatrixXd z;                        // (H+d) x T
  Eigen::MatrixXd f, i, c_bar, o, c, h, tc;  // H x T, tc = tanh(c)
  Eigen::VectorXd y_hat;                    // T
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Forward pass over a d_in x T input window from zero initial state
/// (override via h0/c0), caching everything BPTT needs.
inline ForwardCache lstm_forward(const LstmParams& p, const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd* h0 = nullptr,
                                 const Eigen::VectorXd* c0 = nullptr) {
  if (x.cols() == 0) throw std::invalid_argument("lstm_forward: empty window");
  if (x.rows() != p.d_in) {
    throw std::invalid_argument("lstm_forward: input dimension mismatch");
  }
  const Eigen::Index H = p.hidden;
  const Eigen::Index T = x.cols();
  ForwardCache cache;
  cache.z.resize(H + p.d_in, T);
  cache.f.resize(H, T);
  cache.i.resize(H, T);
  cache.c_bar.resize(H, T);
  cache.o.resize(H, T);
  cache.c.resize(H, T);
  cache.h.resize(H, T);
  cache.tc.resize(H, T);
  cache.y_hat.resize(T);
  Eigen::VectorXd h = h0 ? *h0 : Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c = c0 ? *c0 : Eigen::VectorXd::Zero(H);
  for (Eigen::Index t = 0; t < T; ++t) {
    cache.z.col(t).head(H) = h;
    cache.z.col(t).tail(p.d_in) = x.col(t);
    const Eigen::VectorXd z = cache.z.col(t);
    cache.f.col(t) = (p.W_f * z + p.b_f).unaryExpr([](double v) {
      return sigmoid(v);
    });
    cache.i.col(t) = (p.W_i * z + p.b_i).unaryExpr([](double v) {
      return sigmoid(v);
    });
    cache.c_bar.col(t) = (p.W_c * z + p.b_c).array().tanh();
    cache.o.col(t) = (p.W_o * z + p.b_o).unaryExpr([](double v) {
      return sigmoid(v);
    });
    c = cache.f.col(t).cwiseProduct(c) +
        cache.i.col(t).cwiseProduct(cache.c_bar.col(t));
    cache.c.col(t) = c;
    cache.tc.col(t) = c.array().tanh();
    h = cache.o.col(t).cwiseProduct(cache.tc.col(t));
    cache.h.col(t) = h;
    cache.y_hat[t] = p.W_out * h + p.b_out;
  }
  return cache;
}

/// Window MSE: mean over timesteps of (y^ - y)^2.
inline double window_loss(const ForwardCache& cache,
                          std::span<const double> targets) {
  const Eigen::Index T = cache.y_hat.size();
  double acc = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double d = cache.y_hat[t] - targets[t];
    acc += d * d;
  }
  return acc / double(T);
}

/// Exact gradients of the window MSE through the full unroll.
inline LstmGrads lstm_backward(const LstmParams& p, const ForwardCache& cache,
                               std::span<const double> targets) {
  const Eigen::Index H = p.hidden;
  const Eigen::Index T = cache.y_hat.size();
  if (static_cast<Eigen::Index>(targets.size()) != T) {
    throw std::invalid_argument("lstm_backward: target length mismatch");
  }
  LstmGrads g;
  const int cols = p.hidden + p.d_in;
  g.W_f = Eigen::MatrixXd::Zero(H, cols);
  g.W_i = Eigen::MatrixXd::Zero(H, cols);
  g.W_c = Eigen::MatrixXd::Zero(H, cols);
  g.W_o = Eigen::MatrixXd::Zero(H, cols);
  g.b_f = Eigen::VectorXd::Zero(H);
  g.b_i = Eigen::VectorXd::Zero(H);
  g.b_c = Eigen::VectorXd::Zero(H);
  g.b_o = Eigen::VectorXd::Zero(H);
  g.W_out = Eigen::RowVectorXd::Zero(H);
  g.b_out = 0.0;

  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const double dy = 2.0 * (cache.y_hat[t] - targets[t]) / double(T);
    g.W_out += dy * cache.h.col(t).transpose();
    g.b_out += dy;
    const Eigen::VectorXd dh = p.W_out.transpose() * dy + dh_next;
    const Eigen::VectorXd dc =
        dh.cwiseProduct(cache.o.col(t))
            .cwiseProduct((1.0 - cache.tc.col(t).array().square()).matrix()) +
        dc_next;
    const Eigen::VectorXd c_prev =
        t > 0 ? cache.c.col(t - 1) : Eigen::VectorXd::Zero(H).eval();
    const Eigen::VectorXd df = dc.cwiseProduct(c_prev);
    const Eigen::VectorXd di = dc.cwiseProduct(cache.c_bar.col(t));
    const Eigen::VectorXd dcb = dc.cwiseProduct(cache.i.col(t));
    const Eigen::VectorXd dout = dh.cwiseProduct(cache.tc.col(t));

    const auto f = cache.f.col(t).array();
    const auto i = cache.i.col(t).array();
    const auto o = cache.o.col(t).array();
    const auto cb = cache.c_bar.col(t).array();
    const Eigen::VectorXd da_f = (df.array() * f * (1.0 - f)).matrix();
    const Eigen::VectorXd da_i = (di.array() * i * (1.0 - i)).matrix();
    const Eigen::VectorXd da_c = (dcb.array() * (1.0 - cb.square())).matrix();
    const Eigen::VectorXd da_o = (dout.array() * o * (1.0 - o)).matrix();

    const Eigen::RowVectorXd zt = cache.z.col(t).transpose();
    g.W_f += da_f * zt;
    g.W_i += da_i * zt;
    g.W_c += da_c * zt;
    g.W_o += da_o * zt;
    g.b_f += da_f;
    g.b_i += da_i;
    g.b_c += da_c;
    g.b_o += da_o;

    const Eigen::VectorXd dz = p.W_f.transpose() * da_f +
                               p.W_i.transpose() * da_i +
                               p.W_c.transpose() * da_c +
                               p.W_o.transpose() * da_o;
    dh_next = dz.head(H);
    dc_next = dc.cwiseProduct(cache.f.col(t));
  }
  return g;
}

struct TrainResult {
  LstmParams params;
  double train_seconds = 0.0;
  std::vector<double> loss_curve;  // [0] = pre-training loss, then per epoch
  bool diverged = false;
};

/// Trainable parameter count: 4*(H*(H+d) + H) + (H + 1).
inline long count_lstm_params(int hidden, int d_in) {
  if (hidden < 1 || d_in < 1) {
    throw std::invalid_argument("count_lstm_params: sizes must be >= 1");
  }
  const long H = hidden;
  const long d = d_in;
  return 4 * (H * (H + d) + H) + H + 1;
}

namespace detail {

/// Input matrix for a window: row 0 is u; with feed_y a second row carries
/// the lagged target (teacher forcing during training).
inline Eigen::MatrixXd make_inputs(std::span<const double> u,
                                   std::span<const double> y_lagged,
                                   bool feed_y) {
  const Eigen::Index T = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd x(feed_y ? 2 : 1, T);
  for (Eigen::Index t = 0; t < T; ++t) x(0, t) = u[t];
  if (feed_y) {
    for (Eigen::Index t = 0; t < T; ++t) x(1, t) = y_lagged[t];
  }
  return x;
}

struct AdamSlots {
  LstmGrads m, v;
  int step = 0;
  explicit AdamSlots(const LstmParams& p) {
    auto zero_like = [&](LstmGrads& s) {
      s.W_f = Eigen::MatrixXd::Zero(p.W_f.rows(), p.W_f.cols());
      s.W_i = s.W_f;
      s.W_c = s.W_f;
      s.W_o = s.W_f;
      s.b_f = Eigen::VectorXd::Zero(p.b_f.size());
      s.b_i = s.b_f;
      s.b_c = s.b_f;
      s.b_o = s.b_f;
      s.W_out = Eigen::RowVectorXd::Zero(p.W_out.size());
      s.b_out = 0.0;
    };
    zero_like(m);
    zero_like(v);
  }
};

inline void adam_step(LstmParams& p, const LstmGrads& g, AdamSlots& slots,
                      const optim::AdamSpec& spec) {
  ++slots.step;
  optim::adam_update(p.W_f, g.W_f, slots.m.W_f, slots.v.W_f, slots.step, spec);
  optim::adam_update(p.W_i, g.W_i, slots.m.W_i, slots.v.W_i, slots.step, spec);
  optim::adam_update(p.W_c, g.W_c, slots.m.W_c, slots.v.W_c, slots.step, spec);
  optim::adam_update(p.W_o, g.W_o, slots.m.W_o, slots.v.W_o, slots.step, spec);
  optim::adam_update(p.b_f, g.b_f, slots.m.b_f, slots.v.b_f, slots.step, spec);
  optim::adam_update(p.b_i, g.b_i, slots.m.b_i, slots.v.b_i, slots.step, spec);
  optim::adam_update(p.b_c, g.b_c, slots.m.b_c, slots.v.b_c, slots.step, spec);
  optim::adam_update(p.b_o, g.b_o, slots.m.b_o, slots.v.b_o, slots.step, spec);
  optim::adam_update(p.W_out, g.W_out, slots.m.W_out, slots.v.W_out,
                     slots.step, spec);
  optim::adam_update_scalar(p.b_out, g.b_out, slots.m.b_out, slots.v.b_out,
                            slots.step, spec);
}

/// Non-overlapping [start, length) windows covering [0, total).
inline std::vector<std::pair<std::size_t, std::size_t>> make_windows(
    std::size_t total, int window) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t w = window <= 0 ? total : static_cast<std::size_t>(window);
  for (std::size_t start = 0; start < total; start += w) {
    out.emplace_back(start, std::min(w, total - start));
  }
  return out;
}

}  // namespace detail

/// Teacher-forced Adam training over the train view. Wall clock covers the
/// epoch loop only. Divergence (non-finite loss) aborts, returning the last
/// end-of-epoch checkpoint with the diverged flag set.
inline TrainResult train_lstm(const ts::SeriesView& train, const TrainSpec& spec,
                              int hidden = 128) {
  if (spec.epochs < 0) throw std::invalid_argument("train_lstm: epochs < 0");
  if (!(spec.learning_rate > 0.0)) {
    throw std::invalid_argument("train_lstm: learning rate must be positive");
  }
  const std::size_t total = train.length();
  const auto windows = detail::make_windows(total, spec.window);
  if (windows.empty() || total < 2) {
    throw std::invalid_argument("train_lstm: train view too short");
  }
  const int d_in = spec.feed_y ? 2 : 1;

  // Lagged targets for the teacher-forced input channel: y_{t-1}, y_{-1}=0.
  std::vector<double> y_lag(total, 0.0);
  for (std::size_t t = 1; t < total; ++t) y_lag[t] = train.y[t - 1];

  TrainResult result;
  result.params = LstmParams::init(hidden, d_in, spec.seed,
                                   spec.forget_bias_one);
  optim::AdamSpec adam{spec.learning_rate, spec.beta1, spec.beta2, spec.eps};
  detail::AdamSlots slots(result.params);

  auto eval_mean_loss = [&](const LstmParams& p) {
    double acc = 0.0;
    for (const auto& [start, len] : windows) {
      const Eigen::MatrixXd x = detail::make_inputs(
          train.u.subspan(start, len),
          std::span<const double>(y_lag).subspan(start, len), spec.feed_y);
      const ForwardCache cache = lstm_forward(p, x);
      acc += window_loss(cache, train.y.subspan(start, len));
    }
    return acc / double(windows.size());
  };
  result.loss_curve.push_back(eval_mean_loss(result.params));

  std::vector<std::size_t> order(windows.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  rng::RandomStream shuffle_stream(rng::derive_seed(spec.seed, "lstm-shuffle"));

  LstmParams checkpoint = result.params;
  const auto start_time = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    shuffle_stream.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t k : order) {
      const auto [start, len] = windows[k];
      const Eigen::MatrixXd x = detail::make_inputs(
          train.u.subspan(start, len),
          std::span<const double>(y_lag).subspan(start, len), spec.feed_y);
      const ForwardCache cache = lstm_forward(result.params, x);
      const double loss = window_loss(cache, train.y.subspan(start, len));
      if (!std::isfinite(loss)) {
        result.params = checkpoint;
        result.diverged = true;
        result.train_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start_time)
                .count();
        return result;
      }
      epoch_loss += loss;
      const LstmGrads grads =
          lstm_backward(result.params, cache, train.y.subspan(start, len));
      detail::adam_step(result.params, grads, slots, adam);
    }
    result.loss_curve.push_back(epoch_loss / double(windows.size()));
    checkpoint = result.params;
  }
  result.train_seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start_time)
                             .count();
  return result;
}

/// Warm hidden/cell state by rolling (teacher-forced) over a view; used to
/// hand the evaluation rollout a settled state.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> warm_state(
    const LstmParams& p, const ts::SeriesView& view, bool feed_y) {
  std::vector<double> y_lag(view.length(), 0.0);
  for (std::size_t t = 1; t < view.length(); ++t) y_lag[t] = view.y[t - 1];
  const Eigen::MatrixXd x = detail::make_inputs(view.u, y_lag, feed_y);
  const ForwardCache cache = lstm_forward(p, x);
  const Eigen::Index last = cache.h.cols() - 1;
  return {cache.h.col(last), cache.c.col(last)};
}

/// Fully autoregressive rollout over the eval view: conditions only on the
/// inputs u and its own state; with feed_y the lagged-target channel is fed
/// the model's own previous prediction.
inline Eigen::VectorXd predict_lstm(const LstmParams& p,
                                    const ts::SeriesView& eval, bool feed_y,
                                    const Eigen::VectorXd* h0 = nullptr,
                                    const Eigen::VectorXd* c0 = nullptr,
                                    double y_prev_seed = 0.0) {
  const Eigen::Index T = static_cast<Eigen::Index>(eval.length());
  if (!feed_y) {
    Eigen::MatrixXd x(1, T);
    for (Eigen::Index t = 0; t < T; ++t) x(0, t) = eval.u[t];
    return lstm_forward(p, x, h0, c0).y_hat;
  }
  Eigen::VectorXd y_hat(T);
  Eigen::VectorXd h = h0 ? *h0 : Eigen::VectorXd::Zero(p.hidden);
  Eigen::VectorXd c = c0 ? *c0 : Eigen::VectorXd::Zero(p.hidden);
  double y_prev = y_prev_seed;
  Eigen::MatrixXd x(2, 1);
  for (Eigen::Index t = 0; t < T; ++t) {
    x(0, 0) = eval.u[t];
    x(1, 0) = y_prev;
    const ForwardCache cache = lstm_forward(p, x, &h, &c);
    h = cache.h.col(0);
    c = cache.c.col(0);
    y_prev = cache.y_hat[0];
    y_hat[t] = y_prev;
  }
  return y_hat;
}

}  // namespace narmabench::lstm
