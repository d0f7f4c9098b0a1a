// narmabench CLI: generate NARMA-10 data, run a single model, run the full
// benchmark from a config file, or (re)build reports from saved records.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "narmabench/bench.hpp"
#include "narmabench/io.hpp"
#include "narmabench/qrc.hpp"
#include "narmabench/timeseries.hpp"

namespace nb = narmabench;

namespace {

// NARMABENCH_SEED overrides the config-file seed; an explicit --seed flag
// still wins over the environment.
bool env_seed(std::uint64_t& out) {
  const char* raw = std::getenv("NARMABENCH_SEED");
  if (!raw) return false;
  try {
    out = std::stoull(raw);
  } catch (const std::exception&) {
    throw std::runtime_error("NARMABENCH_SEED is not a valid integer: " +
                             std::string(raw));
  }
  return true;
}

void print_summary(const nb::bench::BenchOutput& out) {
  std::cout << "run directory: " << out.run_dir.string() << "\n";
  for (const auto& r : out.records) {
    if (r.failed) {
      std::cout << "  " << r.model << " r" << r.repeat << ": FAILED ("
                << r.error << ")\n";
    } else {
      std::cout << "  " << r.model << " r" << r.repeat
                << ": rmse=" << nb::io::fmt17(r.rmse)
                << " nrmse=" << nb::io::fmt17(r.nrmse)
                << " train_s=" << nb::io::fmt17(r.train_time_s)
                << " params=" << r.trainable_params;
      if (r.memory_capacity) {
        std::cout << " mc=" << nb::io::fmt17(*r.memory_capacity);
      }
      std::cout << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NARMA-10 benchmark suite: ESN, LSTM, QLSTM and feedback-driven "
               "quantum reservoir computing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nb::bench::kVersion);

  // generate ----------------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "Write a NARMA-10 series as CSV");
  std::size_t gen_length = 3000;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "narma10.csv";
  gen->add_option("--length", gen_length, "series length")->capture_default_str();
  gen->add_option("--seed", gen_seed, "PRNG seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output CSV path")->capture_default_str();

  // run ---------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Train and evaluate a single model");
  std::string run_model;
  run->add_option("--model", run_model, "esn|lstm|qlstm|qrc")
      ->required()
      ->check(CLI::IsMember(nb::bench::known_models()));
  nb::bench::BenchConfig rcfg;
  std::uint64_t run_seed = rcfg.seed;
  std::string run_out = "runs";
  std::string trace_path;
  bool no_mc = false;
  bool feed_y = false;
  bool no_forget_bias = false;
  int lstm_or_qlstm_hidden = -1;
  int run_epochs = -1;
  double run_lr = -1.0;
  int run_window = -1;
  run->add_option("--length", rcfg.length, "series length")->capture_default_str();
  run->add_option("--train", rcfg.split.n_train, "training steps")->capture_default_str();
  run->add_option("--eval", rcfg.split.n_eval, "evaluation steps")->capture_default_str();
  run->add_option("--washout", rcfg.split.washout, "discarded leading steps")->capture_default_str();
  run->add_option("--seed", run_seed, "master seed")->capture_default_str();
  run->add_option("--out", run_out, "output root directory")->capture_default_str();
  run->add_option("--ridge", rcfg.ridge, "readout ridge coefficient")->capture_default_str();
  run->add_flag("--no-mc", no_mc, "skip the memory-capacity probe");
  // esn
  run->add_option("--nodes", rcfg.esn.nodes, "ESN reservoir nodes")->capture_default_str();
  run->add_option("--rho", rcfg.esn.spectral_radius, "ESN spectral radius")->capture_default_str();
  run->add_option("--sparsity", rcfg.esn.sparsity, "ESN internal sparsity")->capture_default_str();
  run->add_option("--input-sparsity", rcfg.esn.input_sparsity, "ESN input sparsity")->capture_default_str();
  run->add_option("--input-scale", rcfg.esn.input_scale, "ESN input scale")->capture_default_str();
  // qrc / qlstm qubits
  int qubits = -1;
  run->add_option("--qubits", qubits, "qubit count (qrc or qlstm)");
  run->add_option("--a-in", rcfg.qrc.a_in, "QRC input scale")->capture_default_str();
  run->add_option("--a-fb", rcfg.qrc.a_fb, "QRC feedback scale")->capture_default_str();
  run->add_option("--shots", rcfg.qrc.shots, "QRC measurement shots")->capture_default_str();
  run->add_option("--trace", trace_path, "QRC: export the feature trace CSV");
  // lstm / qlstm
  run->add_option("--hidden", lstm_or_qlstm_hidden, "hidden size (lstm or qlstm)");
  run->add_option("--epochs", run_epochs, "training epochs (lstm or qlstm)");
  run->add_option("--lr", run_lr, "Adam learning rate (lstm or qlstm)");
  run->add_option("--window", run_window, "BPTT window; 0 = full sequence");
  run->add_flag("--feed-y", feed_y, "LSTM: also feed the lagged target");
  run->add_flag("--no-forget-bias", no_forget_bias,
                "LSTM: do not initialize the forget-gate bias to 1");
  run->add_option("--qlayers", rcfg.qlstm.layers, "QLSTM variational layers")->capture_default_str();
  run->add_option("--max-steps", rcfg.qlstm.max_steps,
                  "QLSTM: truncate the training sequence")->capture_default_str();

  // bench ---------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "Full benchmark from a config file");
  std::string config_path;
  std::string bench_out;
  bench_cmd->add_option("--config", config_path, "JSON config path")
      ->required()
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--out", bench_out, "override the output directory");

  // report --------------------------------------------------------------
  auto* report_cmd =
      app.add_subcommand("report", "Rebuild reports from saved records");
  std::string report_in;
  report_cmd->add_option("--in", report_in, "directory with record_*.json")
      ->required()
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const nb::ts::Series series = nb::ts::generate_narma10(gen_length, gen_seed);
      nb::io::write_file(gen_out, nb::ts::to_csv(series));
      std::cout << "wrote " << gen_out << " (length " << series.length()
                << ", seed used " << series.seed << ")\n";
      return 0;
    }

    if (*run) {
      std::uint64_t env;
      if (env_seed(env)) rcfg.seed = env;
      if (run->count("--seed")) rcfg.seed = run_seed;
      rcfg.models = {run_model};
      rcfg.repeats = {{run_model, 1}};
      rcfg.output_dir = run_out;
      if (no_mc) rcfg.mc.enabled = false;
      if (qubits > 0) {
        rcfg.qrc.qubits = qubits;
        rcfg.qlstm.qubits = qubits;
      }
      if (lstm_or_qlstm_hidden > 0) {
        rcfg.lstm.hidden = lstm_or_qlstm_hidden;
        rcfg.qlstm.hidden = lstm_or_qlstm_hidden;
      }
      if (run_epochs >= 0) {
        rcfg.lstm.epochs = run_epochs;
        rcfg.qlstm.epochs = run_epochs;
      }
      if (run_lr > 0) {
        rcfg.lstm.learning_rate = run_lr;
        rcfg.qlstm.learning_rate = run_lr;
      }
      if (run_window >= 0) {
        rcfg.lstm.window = run_window;
        rcfg.qlstm.window = run_window;
      }
      rcfg.lstm.feed_y = feed_y;
      rcfg.lstm.forget_bias_one = !no_forget_bias;

      const nb::bench::BenchOutput out = nb::bench::run_bench(rcfg);
      print_summary(out);

      if (!trace_path.empty() && run_model == "qrc") {
        nb::qrc::QrcConfig qc;
        qc.n_qubits = rcfg.qrc.qubits;
        qc.a_in = rcfg.qrc.a_in;
        qc.a_fb = rcfg.qrc.a_fb;
        qc.n_shots = rcfg.qrc.shots;
        qc.washout = rcfg.split.washout;
        qc.seed = nb::rng::derive_seed(rcfg.seed, "model-qrc", 0);
        const nb::ts::Series series = nb::ts::generate_narma10(
            rcfg.length, nb::rng::derive_seed(rcfg.seed, "data"));
        const std::size_t total = rcfg.split.n_train + rcfg.split.n_eval;
        const nb::qrc::QrcTrace trace = nb::qrc::run_reservoir(
            std::span<const double>(series.u).first(total), qc);
        std::ostringstream csv;
        csv << "t";
        for (int i = 0; i < qc.n_qubits; ++i) csv << ",z" << i;
        csv << "\n";
        for (Eigen::Index t = 0; t < trace.features.rows(); ++t) {
          csv << t;
          for (int i = 0; i < qc.n_qubits; ++i) {
            csv << ',' << nb::io::fmt17(trace.features(t, i));
          }
          csv << '\n';
        }
        nb::io::write_file(trace_path, csv.str());
        std::cout << "wrote trace " << trace_path << "\n";
      }
      return 0;
    }

    if (*bench_cmd) {
      nb::bench::BenchConfig cfg = nb::bench::load_config(config_path);
      std::uint64_t env;
      if (env_seed(env)) cfg.seed = env;
      if (!bench_out.empty()) cfg.output_dir = bench_out;
      const nb::bench::BenchOutput out = nb::bench::run_bench(cfg);
      print_summary(out);
      return 0;
    }

    if (*report_cmd) {
      const auto records = nb::bench::load_records(report_in);
      if (records.empty()) {
        std::cerr << "no record_*.json files in " << report_in << "\n";
        return 1;
      }
      nb::bench::write_reports(report_in, records);
      std::cout << "wrote results.csv, sustainability.json, report.md in "
                << report_in << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
