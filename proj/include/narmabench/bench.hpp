#pragma once

// Benchmark orchestration: JSON config with paper-default values, per-model
// drivers, seeded repeats, result persistence, and report generation.
//
// Every run writes a fresh timestamped directory (append-never) containing
//   manifest.json        config, config hash, seeds, version
//   record_<m>_r<k>.json one BenchRecord per model x repeat
//   predictions_<m>_r<k>.csv  eval-window predictions, t,y_true,y_pred
//   results.csv          all raw BenchRecord rows
//   sustainability.json  weights, normalized metrics, scores over medians
//   report.md            human-readable summary table
// Only the wall-clock columns may differ between two runs with the same
// config and master seed.

#include <algorithm>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "narmabench/esn.hpp"
#include "narmabench/io.hpp"
#include "narmabench/lstm.hpp"
#include "narmabench/metrics.hpp"
#include "narmabench/qlstm.hpp"
#include "narmabench/qrc.hpp"
#include "narmabench/readout.hpp"
#include "narmabench/rng.hpp"
#include "narmabench/timeseries.hpp"

namespace narmabench::bench {

inline constexpr const char* kVersion = "0.1.0";

struct EsnBlock {
  int nodes = 300;
  double spectral_radius = 0.9;
  double sparsity = 0.2;
  double input_sparsity = 0.5;
  double input_scale = 0.1;
};

struct QrcBlock {
  int qubits = 4;
  double a_in = 1.0;
  double a_fb = 2.2;
  int shots = 1000;
};

struct LstmBlock {
  int hidden = 128;
  int epochs = 20;
  double learning_rate = 1e-3;
  int window = 50;
  bool feed_y = false;
  bool forget_bias_one = true;
};

struct QlstmBlock {
  int hidden = 4;
  int qubits = 4;
  int layers = 1;
  int epochs = 20;
  double learning_rate = 1e-3;
  int window = 20;
  long max_steps = 0;  // 0 = train on the whole train window
};

struct McBlock {
  bool enabled = true;
  int k_max = 20;
  std::size_t probe_length = 1200;
};

struct BenchConfig {
  std::uint64_t seed = 42;
  std::size_t length = 3000;
  ts::SplitSpec split;  // n_train 2000, n_eval 1000, washout 100
  std::vector<std::string> models = {"esn", "lstm", "qlstm", "qrc"};
  std::map<std::string, int> repeats = {
      {"esn", 3}, {"lstm", 1}, {"qlstm", 1}, {"qrc", 3}};
  std::string output_dir = "runs";
  double ridge = 1e-8;
  McBlock mc;
  EsnBlock esn;
  QrcBlock qrc;
  LstmBlock lstm;
  QlstmBlock qlstm;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& known_models() {
  static const std::vector<std::string> m = {"esn", "lstm", "qlstm", "qrc"};
  return m;
}

namespace detail {

inline int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

inline int line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_of_byte(text, pos);
}

template <typename T>
void take(nlohmann::json& obj, const std::string& ctx, const char* key, T& out,
          const std::string& text) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config line " + std::to_string(line_of_key(text, key)) +
                      ": bad value for " + ctx + key + ": " + e.what());
  }
  obj.erase(key);
}

inline void reject_unknown(const nlohmann::json& obj, const std::string& ctx,
                           const std::string& text) {
  for (const auto& item : obj.items()) {
    throw ConfigError("config line " +
                      std::to_string(line_of_key(text, item.key())) +
                      ": unknown key \"" + ctx + item.key() + "\"");
  }
}

}  // namespace detail

/// Parse config text. An empty (or whitespace-only) document means
/// "all defaults". Unknown keys are rejected.
inline BenchConfig parse_config(const std::string& text) {
  BenchConfig cfg;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return cfg;

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config line " +
                      std::to_string(detail::line_of_byte(text, e.byte)) +
                      ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  using detail::reject_unknown;
  using detail::take;
  take(j, "", "seed", cfg.seed, text);
  take(j, "", "models", cfg.models, text);
  take(j, "", "repeats", cfg.repeats, text);
  take(j, "", "output_dir", cfg.output_dir, text);
  take(j, "", "ridge", cfg.ridge, text);
  if (j.contains("series")) {
    nlohmann::json s = j.at("series");
    j.erase("series");
    take(s, "series.", "length", cfg.length, text);
    take(s, "series.", "n_train", cfg.split.n_train, text);
    take(s, "series.", "n_eval", cfg.split.n_eval, text);
    take(s, "series.", "washout", cfg.split.washout, text);
    reject_unknown(s, "series.", text);
  }
  if (j.contains("memory_capacity")) {
    nlohmann::json s = j.at("memory_capacity");
    j.erase("memory_capacity");
    take(s, "memory_capacity.", "enabled", cfg.mc.enabled, text);
    take(s, "memory_capacity.", "k_max", cfg.mc.k_max, text);
    take(s, "memory_capacity.", "probe_length", cfg.mc.probe_length, text);
    reject_unknown(s, "memory_capacity.", text);
  }
  if (j.contains("esn")) {
    nlohmann::json s = j.at("esn");
    j.erase("esn");
    take(s, "esn.", "nodes", cfg.esn.nodes, text);
    take(s, "esn.", "spectral_radius", cfg.esn.spectral_radius, text);
    take(s, "esn.", "sparsity", cfg.esn.sparsity, text);
    take(s, "esn.", "input_sparsity", cfg.esn.input_sparsity, text);
    take(s, "esn.", "input_scale", cfg.esn.input_scale, text);
    reject_unknown(s, "esn.", text);
  }
  if (j.contains("qrc")) {
    nlohmann::json s = j.at("qrc");
    j.erase("qrc");
    take(s, "qrc.", "qubits", cfg.qrc.qubits, text);
    take(s, "qrc.", "a_in", cfg.qrc.a_in, text);
    take(s, "qrc.", "a_fb", cfg.qrc.a_fb, text);
    take(s, "qrc.", "shots", cfg.qrc.shots, text);
    reject_unknown(s, "qrc.", text);
  }
  if (j.contains("lstm")) {
    nlohmann::json s = j.at("lstm");
    j.erase("lstm");
    take(s, "lstm.", "hidden", cfg.lstm.hidden, text);
    take(s, "lstm.", "epochs", cfg.lstm.epochs, text);
    take(s, "lstm.", "learning_rate", cfg.lstm.learning_rate, text);
    take(s, "lstm.", "window", cfg.lstm.window, text);
    take(s, "lstm.", "feed_y", cfg.lstm.feed_y, text);
    take(s, "lstm.", "forget_bias_one", cfg.lstm.forget_bias_one, text);
    reject_unknown(s, "lstm.", text);
  }
  if (j.contains("qlstm")) {
    nlohmann::json s = j.at("qlstm");
    j.erase("qlstm");
    take(s, "qlstm.", "hidden", cfg.qlstm.hidden, text);
    take(s, "qlstm.", "qubits", cfg.qlstm.qubits, text);
    take(s, "qlstm.", "layers", cfg.qlstm.layers, text);
    take(s, "qlstm.", "epochs", cfg.qlstm.epochs, text);
    take(s, "qlstm.", "learning_rate", cfg.qlstm.learning_rate, text);
    take(s, "qlstm.", "window", cfg.qlstm.window, text);
    take(s, "qlstm.", "max_steps", cfg.qlstm.max_steps, text);
    reject_unknown(s, "qlstm.", text);
  }
  reject_unknown(j, "", text);

  if (cfg.models.empty()) throw ConfigError("config: models must be nonempty");
  for (const std::string& m : cfg.models) {
    if (std::find(known_models().begin(), known_models().end(), m) ==
        known_models().end()) {
      throw ConfigError("config: unknown model \"" + m + "\"");
    }
  }
  for (const auto& [m, r] : cfg.repeats) {
    if (std::find(known_models().begin(), known_models().end(), m) ==
        known_models().end()) {
      throw ConfigError("config: repeats entry for unknown model \"" + m +
                        "\"");
    }
    if (r < 1) throw ConfigError("config: repeats must be >= 1");
  }
  if (cfg.ridge < 0.0) throw ConfigError("config: ridge must be >= 0");
  return cfg;
}

inline std::string serialize_config(const BenchConfig& cfg) {
  nlohmann::json j;
  j["seed"] = cfg.seed;
  j["series"] = {{"length", cfg.length},
                 {"n_train", cfg.split.n_train},
                 {"n_eval", cfg.split.n_eval},
                 {"washout", cfg.split.washout}};
  j["models"] = cfg.models;
  j["repeats"] = cfg.repeats;
  j["output_dir"] = cfg.output_dir;
  j["ridge"] = cfg.ridge;
  j["memory_capacity"] = {{"enabled", cfg.mc.enabled},
                          {"k_max", cfg.mc.k_max},
                          {"probe_length", cfg.mc.probe_length}};
  j["esn"] = {{"nodes", cfg.esn.nodes},
              {"spectral_radius", cfg.esn.spectral_radius},
              {"sparsity", cfg.esn.sparsity},
              {"input_sparsity", cfg.esn.input_sparsity},
              {"input_scale", cfg.esn.input_scale}};
  j["qrc"] = {{"qubits", cfg.qrc.qubits},
              {"a_in", cfg.qrc.a_in},
              {"a_fb", cfg.qrc.a_fb},
              {"shots", cfg.qrc.shots}};
  j["lstm"] = {{"hidden", cfg.lstm.hidden},
               {"epochs", cfg.lstm.epochs},
               {"learning_rate", cfg.lstm.learning_rate},
               {"window", cfg.lstm.window},
               {"feed_y", cfg.lstm.feed_y},
               {"forget_bias_one", cfg.lstm.forget_bias_one}};
  j["qlstm"] = {{"hidden", cfg.qlstm.hidden},
                {"qubits", cfg.qlstm.qubits},
                {"layers", cfg.qlstm.layers},
                {"epochs", cfg.qlstm.epochs},
                {"learning_rate", cfg.qlstm.learning_rate},
                {"window", cfg.qlstm.window},
                {"max_steps", cfg.qlstm.max_steps}};
  return j.dump(2) + "\n";
}

inline BenchConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_file(path));
}

// ---------------------------------------------------------------------------
// Per-model drivers. Each returns the metric row plus the eval predictions.
// Wall clock covers the training work only: reservoir harvesting over the
// train window plus the readout fit for ESN/QRC, the epoch loop for the
// gradient-trained models.

struct ModelRun {
  metrics::BenchRecord record;
  Eigen::VectorXd predictions;  // eval window
};

namespace detail {

inline std::vector<double> make_probe(const BenchConfig& cfg) {
  rng::RandomStream stream(rng::derive_seed(cfg.seed, "mc-probe"));
  std::vector<double> probe(cfg.mc.probe_length);
  for (double& v : probe) v = 0.5 * stream.uniform();
  return probe;
}

inline ModelRun run_esn(const BenchConfig& cfg, const ts::Series& series,
                        const ts::SeriesView& train, const ts::SeriesView& eval,
                        std::uint64_t model_seed,
                        const std::vector<double>& probe) {
  esn::EsnConfig ec;
  ec.n_nodes = cfg.esn.nodes;
  ec.spectral_radius = cfg.esn.spectral_radius;
  ec.internal_sparsity = cfg.esn.sparsity;
  ec.input_sparsity = cfg.esn.input_sparsity;
  ec.input_scale = cfg.esn.input_scale;
  ec.washout = cfg.split.washout;
  ec.seed = model_seed;
  const esn::EsnReservoir reservoir = esn::build_reservoir(ec);

  auto [ro, seconds] = metrics::time_block([&] {
    const ReservoirFeatures feats = esn::run_reservoir(reservoir, train.u);
    return readout::fit_readout(feats, train.y, cfg.ridge);
  });

  const ReservoirFeatures full = esn::run_reservoir(
      reservoir, std::span<const double>(series.u).first(cfg.split.n_train +
                                                         cfg.split.n_eval));
  ReservoirFeatures eval_feats;
  eval_feats.X = full.X.middleRows(static_cast<Eigen::Index>(cfg.split.n_train),
                                   static_cast<Eigen::Index>(cfg.split.n_eval));

  ModelRun out;
  out.predictions = readout::apply_readout(ro, eval_feats);
  out.record.model = "esn";
  out.record.seed = model_seed;
  out.record.rmse = metrics::rmse(
      std::span<const double>(out.predictions.data(), out.predictions.size()),
      eval.y);
  out.record.nrmse = metrics::nrmse(
      std::span<const double>(out.predictions.data(), out.predictions.size()),
      eval.y);
  out.record.train_time_s = seconds;
  const metrics::ParamCount pc = metrics::count_params(ec);
  out.record.trainable_params = pc.trainable;
  out.record.reservoir = pc.fixed_resources;
  if (cfg.mc.enabled) {
    const metrics::McResult mc = metrics::memory_capacity(
        [&](std::span<const double> u) {
          return esn::run_reservoir(reservoir, u);
        },
        probe, {cfg.mc.k_max, cfg.ridge});
    out.record.memory_capacity = mc.mc;
  }
  return out;
}

inline ModelRun run_qrc(const BenchConfig& cfg, const ts::Series& series,
                        const ts::SeriesView& train, const ts::SeriesView& eval,
                        std::uint64_t model_seed,
                        const std::vector<double>& probe) {
  qrc::QrcConfig qc;
  qc.n_qubits = cfg.qrc.qubits;
  qc.a_in = cfg.qrc.a_in;
  qc.a_fb = cfg.qrc.a_fb;
  qc.n_shots = cfg.qrc.shots;
  qc.washout = cfg.split.washout;
  qc.seed = model_seed;

  // The feature row harvested after encoding u_t predicts y_{t+1}: the
  // reservoir state then holds the freshest input the next target depends
  // on, mirroring the information pattern of the ESN update.
  auto [ro, seconds] = metrics::time_block([&] {
    const qrc::QrcTrace trace = qrc::run_reservoir(train.u, qc);
    ReservoirFeatures feats = qrc::to_features(trace);
    feats.X.conservativeResize(feats.X.rows() - 1, Eigen::NoChange);
    const std::vector<double> targets(train.y.begin() + 1, train.y.end());
    return readout::fit_readout(feats, targets, cfg.ridge);
  });

  // Shot streams are derived per (seed, shot), so the train-window trace is a
  // prefix of this full-series trace; the readout transfers exactly.
  const qrc::QrcTrace full = qrc::run_reservoir(
      std::span<const double>(series.u).first(cfg.split.n_train +
                                              cfg.split.n_eval),
      qc);
  const ReservoirFeatures full_feats = qrc::to_features(full);
  ReservoirFeatures eval_feats;
  eval_feats.X =
      full_feats.X.middleRows(static_cast<Eigen::Index>(cfg.split.n_train) - 1,
                              static_cast<Eigen::Index>(cfg.split.n_eval));

  ModelRun out;
  out.predictions = readout::apply_readout(ro, eval_feats);
  out.record.model = "qrc";
  out.record.seed = model_seed;
  out.record.rmse = metrics::rmse(
      std::span<const double>(out.predictions.data(), out.predictions.size()),
      eval.y);
  out.record.nrmse = metrics::nrmse(
      std::span<const double>(out.predictions.data(), out.predictions.size()),
      eval.y);
  out.record.train_time_s = seconds;
  const metrics::ParamCount pc = metrics::count_params(qc);
  out.record.trainable_params = pc.trainable;
  out.record.reservoir = pc.fixed_resources;
  if (cfg.mc.enabled) {
    const metrics::McResult mc = metrics::memory_capacity(
        [&](std::span<const double> u) {
          return qrc::to_features(qrc::run_reservoir(u, qc));
        },
        probe, {cfg.mc.k_max, cfg.ridge});
    out.record.memory_capacity = mc.mc;
  }
  return out;
}

inline ModelRun run_lstm(const BenchConfig& cfg, const ts::SeriesView& train,
                         const ts::SeriesView& eval, std::uint64_t model_seed) {
  lstm::TrainSpec spec;
  spec.epochs = cfg.lstm.epochs;
  spec.learning_rate = cfg.lstm.learning_rate;
  spec.window = cfg.lstm.window;
  spec.feed_y = cfg.lstm.feed_y;
  spec.forget_bias_one = cfg.lstm.forget_bias_one;
  spec.seed = model_seed;
  const lstm::TrainResult result = lstm::train_lstm(train, spec, cfg.lstm.hidden);

  const auto [h0, c0] = lstm::warm_state(result.params, train, spec.feed_y);
  const double y_prev = train.y.empty() ? 0.0 : train.y.back();
  ModelRun out;
  out.predictions =
      lstm::predict_lstm(result.params, eval, spec.feed_y, &h0, &c0, y_prev);
  out.record.model = "lstm";
  out.record.seed = model_seed;
  out.record.rmse = metrics::rmse(
      std::span<const double>(out.predictions.data(), out.predictions.size()),
      eval.y);
  out.record.nrmse = metrics::nrmse(
      std::span<const double>(out.predictions.data(), out.predictions.size()),
      eval.y);
  out.record.train_time_s = result.train_seconds;
  const metrics::ParamCount pc =
      metrics::count_params_lstm(cfg.lstm.hidden, spec.feed_y ? 2 : 1);
  out.record.trainable_params = pc.trainable;
  out.record.reservoir = pc.fixed_resources;
  if (result.diverged) out.record.error = "diverged; last finite checkpoint";
  return out;
}

inline ModelRun run_qlstm(const BenchConfig& cfg, const ts::Series& series,
                          const ts::SeriesView& train,
                          const ts::SeriesView& eval,
                          std::uint64_t model_seed) {
  qlstm::QlstmConfig qcfg;
  qcfg.hidden = cfg.qlstm.hidden;
  qcfg.d_in = 1;
  qcfg.n_qubits = cfg.qlstm.qubits;
  qcfg.n_layers = cfg.qlstm.layers;

  ts::SeriesView train_used = train;
  if (cfg.qlstm.max_steps > 0 &&
      static_cast<std::size_t>(cfg.qlstm.max_steps) < train.length()) {
    const std::size_t n = static_cast<std::size_t>(cfg.qlstm.max_steps);
    train_used = ts::SeriesView{train.u.first(n), train.y.first(n),
                                train.offset, std::min(train.washout, n)};
  }

  lstm::TrainSpec spec;
  spec.epochs = cfg.qlstm.epochs;
  spec.learning_rate = cfg.qlstm.learning_rate;
  spec.window = cfg.qlstm.window;
  spec.seed = model_seed;
  const qlstm::TrainResult result = qlstm::train_qlstm(train_used, spec, qcfg);

  // Roll over train + eval so the eval window starts from a settled state.
  const std::size_t total = cfg.split.n_train + cfg.split.n_eval;
  ts::SeriesView warm_and_eval{std::span<const double>(series.u).first(total),
                               std::span<const double>(series.y).first(total),
                               0, 0};
  const Eigen::VectorXd all = qlstm::predict_qlstm(result.params, warm_and_eval);
  ModelRun out;
  out.predictions = all.tail(static_cast<Eigen::Index>(cfg.split.n_eval));
  out.record.model = "qlstm";
  out.record.seed = model_seed;
  out.record.rmse = metrics::rmse(
      std::span<const double>(out.predictions.data(), out.predictions.size()),
      eval.y);
  out.record.nrmse = metrics::nrmse(
      std::span<const double>(out.predictions.data(), out.predictions.size()),
      eval.y);
  out.record.train_time_s = result.train_seconds;
  const metrics::ParamCount pc = metrics::count_params(qcfg);
  out.record.trainable_params = pc.trainable;
  out.record.reservoir = pc.fixed_resources;
  if (result.diverged) out.record.error = "diverged; last finite checkpoint";
  return out;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline nlohmann::json record_to_json(const metrics::BenchRecord& r) {
  nlohmann::json j;
  j["model"] = r.model;
  j["seed"] = r.seed;
  j["repeat"] = r.repeat;
  j["rmse"] = r.rmse;
  j["nrmse"] = r.nrmse;
  j["train_time_s"] = r.train_time_s;
  j["trainable_params"] = r.trainable_params;
  j["reservoir"] = r.reservoir;
  if (r.memory_capacity) j["memory_capacity"] = *r.memory_capacity;
  else j["memory_capacity"] = nullptr;
  j["failed"] = r.failed;
  j["error"] = r.error;
  return j;
}

inline metrics::BenchRecord record_from_json(const nlohmann::json& j) {
  metrics::BenchRecord r;
  r.model = j.at("model").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.repeat = j.at("repeat").get<int>();
  if (!j.at("rmse").is_null()) r.rmse = j.at("rmse").get<double>();
  if (!j.at("nrmse").is_null()) r.nrmse = j.at("nrmse").get<double>();
  if (!j.at("train_time_s").is_null()) {
    r.train_time_s = j.at("train_time_s").get<double>();
  }
  r.trainable_params = j.at("trainable_params").get<long>();
  r.reservoir = j.at("reservoir").get<std::string>();
  if (!j.at("memory_capacity").is_null()) {
    r.memory_capacity = j.at("memory_capacity").get<double>();
  }
  r.failed = j.at("failed").get<bool>();
  r.error = j.at("error").get<std::string>();
  return r;
}

inline std::string results_csv(const std::vector<metrics::BenchRecord>& rows) {
  std::ostringstream out;
  out << "model,seed,repeat,rmse,nrmse,train_time_s,trainable_params,"
         "reservoir,memory_capacity,status,error\n";
  for (const metrics::BenchRecord& r : rows) {
    out << r.model << ',' << r.seed << ',' << r.repeat << ',';
    if (r.failed) {
      out << ",,,";
    } else {
      out << io::fmt17(r.rmse) << ',' << io::fmt17(r.nrmse) << ','
          << io::fmt17(r.train_time_s) << ',';
    }
    out << r.trainable_params << ',' << detail::csv_escape(r.reservoir) << ',';
    if (r.memory_capacity) out << io::fmt17(*r.memory_capacity);
    out << ',' << (r.failed ? "failed" : "ok") << ','
        << detail::csv_escape(r.error) << '\n';
  }
  return out.str();
}

/// Per-model medians over the successful repeats.
inline std::vector<metrics::BenchRecord> median_records(
    const std::vector<metrics::BenchRecord>& rows) {
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.model) == order.end()) {
      order.push_back(r.model);
    }
  }
  std::vector<metrics::BenchRecord> medians;
  for (const std::string& model : order) {
    std::vector<double> rm, nr, tt, mc;
    metrics::BenchRecord med;
    bool any = false;
    for (const auto& r : rows) {
      if (r.model != model || r.failed) continue;
      if (!any) {
        med = r;
        any = true;
      }
      rm.push_back(r.rmse);
      nr.push_back(r.nrmse);
      tt.push_back(r.train_time_s);
      if (r.memory_capacity) mc.push_back(*r.memory_capacity);
    }
    if (!any) continue;
    med.repeat = -1;  // marks an aggregate row
    med.rmse = detail::median(rm);
    med.nrmse = detail::median(nr);
    med.train_time_s = detail::median(tt);
    med.memory_capacity =
        mc.empty() ? std::nullopt : std::optional<double>(detail::median(mc));
    medians.push_back(med);
  }
  return medians;
}

inline nlohmann::json sustainability_to_json(
    const metrics::SustainabilityReport& rep) {
  nlohmann::json j;
  for (int i = 0; i < 4; ++i) {
    j["weights"][metrics::kSustainabilityMetrics[i]] = rep.weights[i];
  }
  for (std::size_t m = 0; m < rep.models.size(); ++m) {
    for (int i = 0; i < 4; ++i) {
      j["normalized"][rep.models[m]][metrics::kSustainabilityMetrics[i]] =
          rep.normalized(i, static_cast<int>(m));
    }
    j["scores"][rep.models[m]] = rep.scores[m];
  }
  std::vector<std::size_t> rank(rep.models.size());
  for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    return rep.scores[a] > rep.scores[b];
  });
  for (std::size_t i : rank) j["ranking"].push_back(rep.models[i]);
  j["warnings"] = rep.warnings;
  return j;
}

namespace detail {

inline std::string fmt_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

inline void markdown_table(std::ostringstream& out,
                           const std::vector<metrics::BenchRecord>& rows,
                           const metrics::SustainabilityReport* sus) {
  out << "| Metric |";
  for (const auto& r : rows) out << ' ' << r.model << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < rows.size(); ++i) out << "---|";
  out << "\n| RMSE |";
  for (const auto& r : rows) out << ' ' << fmt_cell(r.rmse) << " |";
  out << "\n| NRMSE |";
  for (const auto& r : rows) out << ' ' << fmt_cell(r.nrmse) << " |";
  out << "\n| Train time (s) |";
  for (const auto& r : rows) out << ' ' << fmt_cell(r.train_time_s) << " |";
  out << "\n| Params (trainable) |";
  for (const auto& r : rows) out << ' ' << r.trainable_params << " |";
  out << "\n| Reservoir |";
  for (const auto& r : rows) out << ' ' << r.reservoir << " |";
  out << "\n| Memory capacity |";
  for (const auto& r : rows) {
    out << ' ' << (r.memory_capacity ? fmt_cell(*r.memory_capacity) : "-")
        << " |";
  }
  if (sus) {
    out << "\n| Sustainability S |";
    for (const auto& r : rows) {
      const auto it =
          std::find(sus->models.begin(), sus->models.end(), r.model);
      if (it == sus->models.end()) {
        out << " - |";
      } else {
        out << ' '
            << fmt_cell(sus->scores[static_cast<std::size_t>(
                   it - sus->models.begin())])
            << " |";
      }
    }
  }
  out << "\n";
}

}  // namespace detail

inline std::string report_markdown(
    const std::vector<metrics::BenchRecord>& medians,
    const metrics::SustainabilityReport* sus) {
  std::ostringstream out;
  out << "# NARMA-10 benchmark report\n\n";
  out << "## Measured results (per-model medians over repeats)\n\n";
  if (medians.empty()) {
    out << "No successful model runs.\n";
  } else {
    detail::markdown_table(out, medians, sus);
  }
  out << "\nParams counts trainable parameters only: for the reservoir "
         "models that is the linear readout (feature dimension + 1); the "
         "fixed reservoir is described in the Reservoir row. Memory capacity "
         "is the delay-reconstruction sum over k of the squared correlation "
         "between u_{t-k} and its linear reconstruction, scored on held-out "
         "probe data.\n";
  out << "\n## Reference rows (built-in comparison baseline)\n\n";
  const std::vector<metrics::BenchRecord> ref = metrics::reference_records();
  const metrics::SustainabilityReport ref_sus =
      metrics::sustainability_index(ref);
  detail::markdown_table(out, ref, &ref_sus);
  out << "\nReference parameter counts follow their original accounting, "
         "which differs from the readout-only counts used above; both are "
         "shown so the discrepancy stays visible.\n";
  return out.str();
}

/// Write results.csv, sustainability.json and report.md for a set of rows.
inline void write_reports(const std::filesystem::path& dir,
                          const std::vector<metrics::BenchRecord>& rows) {
  io::write_file(dir / "results.csv", results_csv(rows));
  const std::vector<metrics::BenchRecord> medians = median_records(rows);
  std::optional<metrics::SustainabilityReport> sus;
  if (medians.size() >= 2) {
    bool all_finite = true;
    for (const auto& r : medians) {
      if (!std::isfinite(r.rmse) || !std::isfinite(r.nrmse) ||
          !std::isfinite(r.train_time_s)) {
        all_finite = false;
      }
    }
    if (all_finite) {
      sus = metrics::sustainability_index(medians);
      io::write_file(dir / "sustainability.json",
                     sustainability_to_json(*sus).dump(2) + "\n");
    }
  }
  io::write_file(dir / "report.md",
                 report_markdown(medians, sus ? &*sus : nullptr));
}

struct BenchOutput {
  std::filesystem::path run_dir;
  std::vector<metrics::BenchRecord> records;
  std::vector<metrics::BenchRecord> medians;
};

/// Full benchmark: generate the seeded series once, run every configured
/// model x repeat (failures become failed rows, the rest still run), persist
/// artifacts, and report over per-model medians.
inline BenchOutput run_bench(const BenchConfig& cfg) {
  if (cfg.split.n_train + cfg.split.n_eval > cfg.length) {
    throw std::invalid_argument("run_bench: split exceeds series length");
  }
  BenchOutput out;
  out.run_dir = io::fresh_run_dir(cfg.output_dir, io::utc_timestamp());

  const std::uint64_t data_seed = rng::derive_seed(cfg.seed, "data");
  const ts::Series series = ts::generate_narma10(cfg.length, data_seed);
  const auto [train, eval] = ts::split(series, cfg.split);

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["created_utc"] = io::utc_timestamp();
  manifest["master_seed"] = cfg.seed;
  manifest["data_seed"] = data_seed;
  manifest["series_seed_used"] = series.seed;
  manifest["series_regenerations"] = series.regenerations;
  manifest["config"] = nlohmann::json::parse(serialize_config(cfg));
  manifest["config_hash"] = rng::fnv1a(serialize_config(cfg));
  io::write_file(out.run_dir / "manifest.json", manifest.dump(2) + "\n");

  std::vector<double> probe;
  if (cfg.mc.enabled) probe = detail::make_probe(cfg);

  for (const std::string& model : cfg.models) {
    const auto rep_it = cfg.repeats.find(model);
    const int repeats = rep_it == cfg.repeats.end() ? 1 : rep_it->second;
    for (int rep = 0; rep < repeats; ++rep) {
      const std::uint64_t model_seed =
          rng::derive_seed(cfg.seed, "model-" + model,
                           static_cast<std::uint64_t>(rep));
      metrics::BenchRecord record;
      Eigen::VectorXd predictions;
      try {
        ModelRun run;
        if (model == "esn") {
          run = detail::run_esn(cfg, series, train, eval, model_seed, probe);
        } else if (model == "qrc") {
          run = detail::run_qrc(cfg, series, train, eval, model_seed, probe);
        } else if (model == "lstm") {
          run = detail::run_lstm(cfg, train, eval, model_seed);
        } else {
          run = detail::run_qlstm(cfg, series, train, eval, model_seed);
        }
        record = run.record;
        predictions = run.predictions;
      } catch (const std::exception& e) {
        record = metrics::BenchRecord{};
        record.model = model;
        record.seed = model_seed;
        record.failed = true;
        record.error = e.what();
      }
      record.repeat = rep;
      const std::string tag = model + "_r" + std::to_string(rep);
      io::write_file(out.run_dir / ("record_" + tag + ".json"),
                     record_to_json(record).dump(2) + "\n");
      if (!record.failed) {
        std::ostringstream csv;
        csv << "t,y_true,y_pred\n";
        for (Eigen::Index i = 0; i < predictions.size(); ++i) {
          const std::size_t t = eval.offset + static_cast<std::size_t>(i);
          csv << t << ',' << io::fmt17(eval.y[static_cast<std::size_t>(i)])
              << ',' << io::fmt17(predictions[i]) << '\n';
        }
        io::write_file(out.run_dir / ("predictions_" + tag + ".csv"),
                       csv.str());
      }
      out.records.push_back(std::move(record));
    }
  }

  write_reports(out.run_dir, out.records);
  out.medians = median_records(out.records);
  return out;
}

/// Re-aggregate the record_*.json files found in a directory.
inline std::vector<metrics::BenchRecord> load_records(
    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("record_", 0) == 0 && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<metrics::BenchRecord> records;
  for (const auto& f : files) {
    records.push_back(record_from_json(nlohmann::json::parse(io::read_file(f))));
  }
  return records;
}

}  // namespace narmabench::bench
