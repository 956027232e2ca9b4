#include "sbc/cluster_weights.hpp"
#include "sbc/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sample selection bias correction toolkit"};
  app.require_subcommand(1);

  // ---- run -------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "full four-method comparison with ten-fold CV");
  sbc::ExperimentConfig config;
  std::string out_path, kv_path;
  bool timings = false;
  run_cmd->add_option("--dataset", config.dataset_path, "CSV file, label in last column")
      ->required();
  run_cmd->add_option("--seed", config.seed, "RNG seed")->required();
  run_cmd->add_option("--folds", config.folds, "cross-validation folds");
  run_cmd->add_option("--lambda", config.lambda, "ridge regularization");
  run_cmd->add_option("--bandwidth", config.kernel_bandwidth,
                      "Gaussian kernel bandwidth (default sqrt(d/2))");
  run_cmd->add_option("--num-projections", config.num_projections,
                      "random bias projections to try");
  run_cmd->add_option("--projection-trials", config.projection_trials,
                      "sampling trials per projection candidate");
  run_cmd->add_option("--min-leaf", config.min_leaf, "regression tree minimum leaf count");
  run_cmd->add_option("--kmm-b-prime", config.kmm.b_prime, "KMM box bound B'");
  run_cmd->add_option("--kmm-epsilon", config.kmm.epsilon, "KMM mean-slab tolerance");
  run_cmd->add_option("--kmm-tolerance", config.kmm.tolerance, "KMM stopping tolerance");
  run_cmd->add_option("--kmm-max-iterations", config.kmm.max_iterations, "KMM iteration cap");
  run_cmd->add_option("--methods", config.methods,
                      "subset of unweighted ideal clustered kmm");
  run_cmd->add_option("--out", out_path, "write the human-readable report here");
  run_cmd->add_option("--kv", kv_path, "write the machine-readable report here");
  run_cmd->add_flag("--timings", timings, "include wall-clock timings in the report");

  // ---- bounds ----------------------------------------------------------
  auto* bounds_cmd = app.add_subcommand("bounds", "bound calculators on explicit inputs");
  double sigma = 1.0, kappa = 1.0, lambda = 1.0, lambda_max = 1.0, lambda_min = 1.0;
  double B = 1.0, b_prime = 1000.0, epsilon = 0.0, p0 = 0.1, q0 = 0.1, delta = 0.05;
  double bm = 100, bn = 1000;
  int m_distinct = 10, k = 10, c_max = 10;
  bounds_cmd->add_option("--sigma", sigma, "cost admissibility constant");
  bounds_cmd->add_option("--kappa", kappa, "kernel diagonal bound");
  bounds_cmd->add_option("--lambda", lambda, "regularization");
  bounds_cmd->add_option("--lambda-max", lambda_max, "largest Gram eigenvalue");
  bounds_cmd->add_option("--lambda-min", lambda_min, "smallest Gram eigenvalue");
  bounds_cmd->add_option("--B", B, "max reciprocal sampling probability");
  bounds_cmd->add_option("--b-prime", b_prime, "KMM box bound");
  bounds_cmd->add_option("--epsilon", epsilon, "KMM slab tolerance");
  bounds_cmd->add_option("--m", bm, "training sample size");
  bounds_cmd->add_option("--n", bn, "pool size");
  bounds_cmd->add_option("--m-distinct", m_distinct, "distinct training points / clusters");
  bounds_cmd->add_option("--k", k, "number of clusters");
  bounds_cmd->add_option("--c-max", c_max, "largest cluster size");
  bounds_cmd->add_option("--p0", p0, "minimum point probability");
  bounds_cmd->add_option("--q0", q0, "minimum cluster sampling probability");
  bounds_cmd->add_option("--delta", delta, "confidence parameter");

  // ---- probe-stability ---------------------------------------------------
  auto* probe_cmd = app.add_subcommand("probe-stability",
                                       "measure cost deltas against the stability envelopes");
  std::string probe_dataset;
  int pairs = 100;
  std::uint64_t probe_seed = 0;
  double probe_lambda = 0.5, probe_bandwidth = 0.0;
  probe_cmd->add_option("--dataset", probe_dataset, "CSV file")->required();
  probe_cmd->add_option("--pairs", pairs, "random distribution pairs");
  probe_cmd->add_option("--seed", probe_seed, "RNG seed");
  probe_cmd->add_option("--lambda", probe_lambda, "ridge regularization");
  probe_cmd->add_option("--bandwidth", probe_bandwidth, "kernel bandwidth");

  // ---- verify-unbiasedness -------------------------------------------------
  auto* verify_cmd = app.add_subcommand("verify-unbiasedness",
                                        "Monte Carlo check of ideal-weight unbiasedness");
  std::string verify_dataset;
  int trials = 5000;
  std::uint64_t verify_seed = 0;
  double verify_lambda = 0.1, verify_bandwidth = 0.0;
  verify_cmd->add_option("--dataset", verify_dataset, "CSV file")->required();
  verify_cmd->add_option("--trials", trials, "Monte Carlo draws");
  verify_cmd->add_option("--seed", verify_seed, "RNG seed");
  verify_cmd->add_option("--lambda", verify_lambda, "ridge regularization for the fixed fit");
  verify_cmd->add_option("--bandwidth", verify_bandwidth, "kernel bandwidth");

  // ---- solve-kmm ---------------------------------------------------------
  auto* kmm_cmd = app.add_subcommand("solve-kmm", "solve the KMM weight optimization");
  std::string kmm_pool, kmm_train;
  std::uint64_t kmm_seed = 0;
  sbc::KmmConfig kmm_cfg;
  double kmm_bandwidth = 0.0;
  kmm_cmd->add_option("--pool", kmm_pool, "unlabeled pool CSV")->required();
  kmm_cmd->add_option("--train", kmm_train,
                      "training CSV; omitted: simulate a biased draw from the pool");
  kmm_cmd->add_option("--seed", kmm_seed, "bias simulation seed");
  kmm_cmd->add_option("--b-prime", kmm_cfg.b_prime, "box bound B'");
  kmm_cmd->add_option("--epsilon", kmm_cfg.epsilon, "mean-slab tolerance");
  kmm_cmd->add_option("--tolerance", kmm_cfg.tolerance, "stopping tolerance");
  kmm_cmd->add_option("--max-iterations", kmm_cfg.max_iterations, "iteration cap");
  kmm_cmd->add_option("--bandwidth", kmm_bandwidth, "kernel bandwidth");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      sbc::RunReport report = sbc::run(config);
      const std::string text = sbc::format_report(report, timings);
      std::cout << text;
      if (!out_path.empty()) write_file(out_path, sbc::format_report(report, false));
      if (!kv_path.empty()) write_file(kv_path, sbc::format_kv(report));
    } else if (*bounds_cmd) {
      auto beta = sbc::beta_coefficients(sigma, kappa, lambda, lambda_max);
      std::printf("beta_l1=%.10g\nbeta_l2=%.10g\n", beta.beta_l1, beta.beta_l2);
      std::printf("frequency_bound=%.10g\n",
                  sbc::frequency_bound(m_distinct, bn, p0, delta));
      auto [dl1, dl2] = sbc::cluster_distance_bounds(B, c_max, k, q0, bn, bm, delta);
      std::printf("cluster_l1_distance_bound=%.10g\ncluster_l2_distance_bound=%.10g\n",
                  dl1, dl2);
      auto [g1, g2] = sbc::cluster_gap_bounds(sigma, kappa, lambda, lambda_max, B,
                                              m_distinct, p0, bn, bm, delta);
      std::printf("%s=%.10g\n%s=%.10g\n", g1.method.c_str(), g1.value,
                  g2.method.c_str(), g2.value);
      std::printf("kmm_l2_deviation_bound=%.10g\n",
                  sbc::kmm_l2_deviation_bound(epsilon, b_prime, bm, bn, kappa,
                                              lambda_min, delta));
      auto gk = sbc::kmm_gap_bound(sigma, kappa, lambda, lambda_max, lambda_min,
                                   b_prime, epsilon, bm, bn, delta);
      std::printf("%s=%.10g\n", gk.method.c_str(), gk.value);
      auto diag = sbc::crossover_diagnostic(lambda_min, B, m_distinct, bn);
      std::printf("crossover_threshold=%.10g\ncrossover_regime=%s\n", diag.threshold,
                  diag.regime.c_str());
    } else if (*probe_cmd) {
      sbc::Dataset ds = sbc::load_dataset(probe_dataset);
      sbc::KernelSpec kernel;
      kernel.bandwidth = probe_bandwidth > 0.0
                             ? probe_bandwidth
                             : sbc::default_bandwidth(static_cast<int>(ds.x.cols()));
      auto rec = sbc::empirical_stability_probe(ds, kernel, probe_lambda, pairs, probe_seed);
      std::printf("pairs=%d\nmax_delta=%.10g\nmax_ratio_l1=%.10g\nmax_ratio_l2=%.10g\n",
                  rec.pairs, rec.max_delta, rec.max_ratio_l1, rec.max_ratio_l2);
      std::printf("beta_l1=%.10g\nbeta_l2=%.10g\n", rec.stability.beta_l1,
                  rec.stability.beta_l2);
    } else if (*verify_cmd) {
      sbc::Dataset ds = sbc::load_dataset(verify_dataset);
      sbc::KernelSpec kernel;
      kernel.bandwidth = verify_bandwidth > 0.0
                             ? verify_bandwidth
                             : sbc::default_bandwidth(static_cast<int>(ds.x.cols()));
      auto model = sbc::make_model(ds.x, verify_seed);
      auto h = sbc::fit(ds.x, ds.y,
                        sbc::WeightDistribution::from_raw(
                            Eigen::VectorXd::Ones(ds.x.rows())),
                        kernel, verify_lambda);
      auto rec = sbc::verify_unbiasedness(ds, model, h, trials, verify_seed);
      std::printf("trials=%d\nmc_mean=%.10g\nmc_stderr=%.10g\npool_risk=%.10g\nz=%.6f\n",
                  rec.trials, rec.mc_mean, rec.mc_stderr, rec.pool_risk, rec.z_score);
    } else if (*kmm_cmd) {
      sbc::Dataset pool = sbc::load_dataset(kmm_pool);
      sbc::KernelSpec kernel;
      kernel.bandwidth = kmm_bandwidth > 0.0
                             ? kmm_bandwidth
                             : sbc::default_bandwidth(static_cast<int>(pool.x.cols()));
      Eigen::MatrixXd train_x;
      if (!kmm_train.empty()) {
        train_x = sbc::load_dataset(kmm_train).x;
      } else {
        auto model = sbc::make_model(pool.x, kmm_seed);
        auto d = sbc::draw(pool.x, model, kmm_seed);
        train_x.resize(static_cast<Eigen::Index>(d.selected.size()), pool.x.cols());
        for (size_t i = 0; i < d.selected.size(); ++i)
          train_x.row(static_cast<Eigen::Index>(i)) = pool.x.row(d.selected[i]);
      }
      auto sol = sbc::solve_kmm(train_x, pool.x, kernel, kmm_cfg);
      std::printf("m=%d\nobjective=%.10g\nepsilon_prime=%.10g\niterations=%d\n"
                  "converged=%d\npd_warning=%d\n",
                  static_cast<int>(sol.gamma_hat.size()), sol.objective,
                  sol.epsilon_prime, sol.iterations, sol.converged ? 1 : 0,
                  sol.pd_warning ? 1 : 0);
      Eigen::VectorXd w = sbc::normalized_weights(sol);
      std::printf("weight_min=%.10g\nweight_max=%.10g\nweight_sum=%.10g\n",
                  w.minCoeff(), w.maxCoeff(), w.sum());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
