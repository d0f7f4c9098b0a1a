#include <catch2/catch_amalgamated.hpp>

#include "narmabench/esn.hpp"
#include "narmabench/rng.hpp"

using namespace narmabench;

TEST_CASE("spectral radius estimators agree with the dense solver", "[esn]") {
  rng::RandomStream stream(17);
  for (int n : {20, 80, 300}) {
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        w(i, j) = stream.uniform() < 0.2 ? stream.uniform(-1.0, 1.0) : 0.0;
      }
    }
    const double dense = esn::spectral_radius_dense(w);
    const double power = esn::spectral_radius_power(w);
    if (!std::isnan(power)) {
      REQUIRE(power == Catch::Approx(dense).epsilon(1e-6));
    }
    REQUIRE(esn::spectral_radius(w) == Catch::Approx(dense).epsilon(1e-6));
  }
}

TEST_CASE("built reservoir hits the target spectral radius", "[esn]") {
  esn::EsnConfig cfg;
  cfg.seed = 1;
  const esn::EsnReservoir res = esn::build_reservoir(cfg);
  REQUIRE(esn::spectral_radius_dense(res.W) ==
          Catch::Approx(0.9).margin(1e-6));
}

TEST_CASE("single-node full-density reservoir is the scalar rho", "[esn]") {
  esn::EsnConfig cfg;
  cfg.n_nodes = 1;
  cfg.internal_sparsity = 1.0;
  cfg.input_sparsity = 1.0;
  cfg.seed = 3;
  const esn::EsnReservoir res = esn::build_reservoir(cfg);
  REQUIRE(std::abs(res.W(0, 0)) == Catch::Approx(0.9).margin(1e-15));
}

TEST_CASE("mask hits the exact nonzero count", "[esn]") {
  esn::EsnConfig cfg;
  cfg.n_nodes = 50;
  cfg.internal_sparsity = 0.2;
  cfg.input_sparsity = 0.5;
  cfg.input_scale = 0.1;
  cfg.seed = 5;
  const esn::EsnReservoir res = esn::build_reservoir(cfg);
  long nz = 0;
  for (Eigen::Index i = 0; i < res.W.rows(); ++i) {
    for (Eigen::Index j = 0; j < res.W.cols(); ++j) {
      nz += res.W(i, j) != 0.0;
    }
  }
  REQUIRE(nz == long(0.2 * 50 * 50));
  long nz_in = 0;
  for (Eigen::Index i = 0; i < res.W_in.size(); ++i) {
    nz_in += res.W_in[i] != 0.0;
    REQUIRE(std::abs(res.W_in[i]) <= cfg.input_scale);
  }
  REQUIRE(nz_in == long(0.5 * 50));
}

TEST_CASE("builds are deterministic per seed", "[esn]") {
  esn::EsnConfig cfg;
  cfg.n_nodes = 40;
  cfg.seed = 11;
  const esn::EsnReservoir a = esn::build_reservoir(cfg);
  const esn::EsnReservoir b = esn::build_reservoir(cfg);
  REQUIRE(a.W == b.W);
  REQUIRE(a.W_in == b.W_in);
}

TEST_CASE("config validation", "[esn]") {
  esn::EsnConfig cfg;
  cfg.n_nodes = 0;
  REQUIRE_THROWS_AS(esn::build_reservoir(cfg), std::invalid_argument);
  cfg.n_nodes = 10;
  cfg.spectral_radius = 0.0;
  REQUIRE_THROWS_AS(esn::build_reservoir(cfg), std::invalid_argument);
  cfg.spectral_radius = 0.9;
  cfg.internal_sparsity = 1.5;
  REQUIRE_THROWS_AS(esn::build_reservoir(cfg), std::invalid_argument);
}

TEST_CASE("zero input keeps the state at zero", "[esn]") {
  esn::EsnConfig cfg;
  cfg.n_nodes = 30;
  cfg.seed = 2;
  cfg.washout = 4;
  const esn::EsnReservoir res = esn::build_reservoir(cfg);
  const std::vector<double> u(50, 0.0);
  const ReservoirFeatures feats = esn::run_reservoir(res, u);
  REQUIRE(feats.rows() == 50);
  REQUIRE(feats.cols() == 31);
  REQUIRE(feats.washout == 4);
  REQUIRE(feats.X.leftCols(30).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((feats.X.col(30).array() == 1.0).all());
}

TEST_CASE("states stay inside the tanh range", "[esn]") {
  esn::EsnConfig cfg;
  cfg.n_nodes = 60;
  cfg.seed = 7;
  const esn::EsnReservoir res = esn::build_reservoir(cfg);
  std::vector<double> u(200);
  rng::RandomStream stream(4);
  for (double& v : u) v = 0.5 * stream.uniform();
  const ReservoirFeatures feats = esn::run_reservoir(res, u);
  REQUIRE(feats.X.leftCols(60).maxCoeff() < 1.0);
  REQUIRE(feats.X.leftCols(60).minCoeff() > -1.0);
}

TEST_CASE("echo state property: perturbed initial states converge", "[esn]") {
  // ||x_t - x'_t|| must fall below 1e-6 before t = 200 at rho = 0.9.
  std::vector<double> u(250);
  rng::RandomStream input_stream(14);
  for (double& v : u) v = 0.5 * input_stream.uniform();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    esn::EsnConfig cfg;
    cfg.seed = seed;
    const esn::EsnReservoir res = esn::build_reservoir(cfg);
    Eigen::VectorXd x0(cfg.n_nodes);
    rng::RandomStream init_stream(100 + seed);
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      x0[i] = init_stream.uniform(-0.95, 0.95);
    }
    const ReservoirFeatures a = esn::run_reservoir(res, u);
    const ReservoirFeatures b = esn::run_reservoir(res, u, &x0);
    bool converged = false;
    for (Eigen::Index t = 0; t < 200; ++t) {
      const double diff =
          (a.X.row(t).head(cfg.n_nodes) - b.X.row(t).head(cfg.n_nodes)).norm();
      if (diff < 1e-6) {
        converged = true;
        break;
      }
    }
    REQUIRE(converged);
  }
}

TEST_CASE("runs are deterministic per (reservoir, input)", "[esn]") {
  esn::EsnConfig cfg;
  cfg.n_nodes = 25;
  cfg.seed = 6;
  const esn::EsnReservoir res = esn::build_reservoir(cfg);
  std::vector<double> u(40);
  rng::RandomStream stream(3);
  for (double& v : u) v = 0.5 * stream.uniform();
  const ReservoirFeatures a = esn::run_reservoir(res, u);
  const ReservoirFeatures b = esn::run_reservoir(res, u);
  REQUIRE(a.X == b.X);
  REQUIRE_THROWS_AS(esn::run_reservoir(res, std::vector<double>{}),
                    std::invalid_argument);
}
