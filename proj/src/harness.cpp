#include "sbc/harness.hpp"

#include "sbc/cluster_weights.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sbc {

namespace {

constexpr std::uint64_t kTagProjection = 1;
constexpr std::uint64_t kTagFolds = 2;
constexpr std::uint64_t kTagDraw = 3;
constexpr std::uint64_t kTagCandidates = 4;

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1) +
                    0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void ExperimentConfig::validate() const {
  if (folds < 2) throw std::invalid_argument("ExperimentConfig: folds must be >= 2");
  if (methods.empty()) throw std::invalid_argument("ExperimentConfig: no methods selected");
  if (!(lambda > 0.0)) throw std::invalid_argument("ExperimentConfig: lambda must be positive");
  if (num_projections < 1)
    throw std::invalid_argument("ExperimentConfig: num_projections must be >= 1");
  if (projection_trials < 1)
    throw std::invalid_argument("ExperimentConfig: projection_trials must be >= 1");
  if (min_leaf < 1) throw std::invalid_argument("ExperimentConfig: min_leaf must be >= 1");
  kmm.validate();
  static const std::vector<std::string> known = {"unweighted", "ideal", "clustered", "kmm"};
  for (const auto& m : methods)
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw std::invalid_argument("ExperimentConfig: unknown method " + m);
}

int choose_projection(const Dataset& pool, const std::vector<BiasModel>& candidates,
                      int trials, double lambda, const KernelSpec& kernel,
                      std::uint64_t seed, int min_draw_size) {
  if (candidates.empty())
    throw std::invalid_argument("choose_projection: no candidates");
  if (candidates.size() == 1) return 0;

  int best = 0;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < candidates.size(); ++c) {
    std::vector<double> gaps;
    for (int t = 0; t < trials; ++t) {
      // common random numbers across candidates: identical candidates tie
      // exactly and the comparison is lower-variance
      BiasedDraw d = draw(pool.x, candidates[c],
                          mix_seed(seed, kTagProjection, t), min_draw_size);
      Eigen::MatrixXd sx = take_rows(pool.x, d.selected);
      Eigen::VectorXd sy = take(pool.y, d.selected);

      auto unweighted = fit(sx, sy,
                            WeightDistribution::from_raw(Eigen::VectorXd::Ones(sx.rows())),
                            kernel, lambda);
      auto ideal = fit(sx, sy, WeightDistribution::from_raw(ideal_weights(d)),
                       kernel, lambda);
      gaps.push_back(nmse(pool.y, predict(unweighted, pool.x)) -
                     nmse(pool.y, predict(ideal, pool.x)));
    }
    const double gap = mean_of(gaps);
    if (gap > best_gap) {
      best_gap = gap;
      best = static_cast<int>(c);
    }
  }
  return best;
}

RunReport run(const ExperimentConfig& config, const Dataset& pool) {
  config.validate();
  const int n = static_cast<int>(pool.x.rows());
  if (n < config.folds)
    throw std::invalid_argument("run: pool smaller than the number of folds");

  KernelSpec kernel;
  kernel.bandwidth = (config.kernel_bandwidth > 0.0)
                         ? config.kernel_bandwidth
                         : default_bandwidth(static_cast<int>(pool.x.cols()));

  RunReport report;
  report.seed = config.seed;
  report.u_size = n;

  Timer phase;
  std::vector<BiasModel> candidates;
  candidates.reserve(static_cast<size_t>(config.num_projections));
  for (int i = 0; i < config.num_projections; ++i)
    candidates.push_back(make_model(pool.x, mix_seed(config.seed, kTagCandidates, i)));
  report.chosen_projection =
      choose_projection(pool, candidates, config.projection_trials, config.lambda,
                        kernel, config.seed, config.min_draw_size);
  const BiasModel& model = candidates[static_cast<size_t>(report.chosen_projection)];
  report.phase_seconds.emplace_back("projection_selection", phase.elapsed());

  // fold assignment: seeded shuffle, fold sizes differ by at most one
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 fold_rng(mix_seed(config.seed, kTagFolds, 0));
  std::shuffle(perm.begin(), perm.end(), fold_rng);

  for (const auto& name : config.methods) report.methods.push_back({name, 0.0, 0.0, {}});

  double s_size_sum = 0.0, test_size_sum = 0.0;
  double max_abs_label = pool.y.cwiseAbs().maxCoeff();
  double max_abs_pred = 0.0;
  double b_cluster = 1.0;

  // bound inputs collected from the last fold
  double last_lambda_max = 1.0, last_lambda_min = 1.0;
  int last_k = 1, last_c_max = 1;
  double last_q0 = 1.0, last_p0 = 1.0;
  int last_m = 1, last_n_train = 1;

  phase = Timer();
  for (int f = 0; f < config.folds; ++f) {
    std::vector<int> train_idx, test_idx;
    for (int j = 0; j < n; ++j)
      ((j % config.folds == f) ? test_idx : train_idx).push_back(perm[static_cast<size_t>(j)]);

    Eigen::MatrixXd train_x = take_rows(pool.x, train_idx);
    Eigen::VectorXd train_y = take(pool.y, train_idx);
    Eigen::MatrixXd test_x = take_rows(pool.x, test_idx);
    Eigen::VectorXd test_y = take(pool.y, test_idx);

    BiasedDraw d = draw(train_x, model, mix_seed(config.seed, kTagDraw, f),
                        config.min_draw_size);
    report.redraws_total += d.redraws;
    Eigen::MatrixXd sx = take_rows(train_x, d.selected);
    Eigen::VectorXd sy = take(train_y, d.selected);
    s_size_sum += static_cast<double>(d.selected.size());
    test_size_sum += static_cast<double>(test_idx.size());

    ClusterPartition partition;
    bool partition_ready = false;

    for (auto& method : report.methods) {
      Eigen::VectorXd raw;
      if (method.name == "unweighted") {
        raw = Eigen::VectorXd::Ones(sx.rows());
      } else if (method.name == "ideal") {
        raw = ideal_weights(d);
      } else if (method.name == "clustered") {
        if (!partition_ready) {
          partition = fit_tree(sx, sy, config.min_leaf);
          assign_counts(partition, sx, train_x);
          partition_ready = true;
        }
        raw = weights(partition, sx);
      } else {  // kmm
        KmmSolution sol = solve_kmm(sx, train_x, kernel, config.kmm);
        raw = normalized_weights(sol);
      }

      try {
        auto h = fit(sx, sy, WeightDistribution::from_raw(raw), kernel, config.lambda);
        Eigen::VectorXd pred = predict(h, test_x);
        max_abs_pred = std::max(max_abs_pred, pred.cwiseAbs().maxCoeff());
        method.fold_nmse.push_back(nmse(test_y, pred));
      } catch (const std::exception& e) {
        throw std::runtime_error("run: fold " + std::to_string(f) + ", method " +
                                 method.name + ": " + e.what());
      }
    }

    if (f == config.folds - 1) {
      KernelMatrix km = gram(kernel, sx);
      last_lambda_max = km.lambda_max;
      last_lambda_min = km.lambda_min;
      last_m = static_cast<int>(sx.rows());
      last_n_train = static_cast<int>(train_x.rows());
      if (!partition_ready) {
        partition = fit_tree(sx, sy, config.min_leaf);
        assign_counts(partition, sx, train_x);
        partition_ready = true;
      }
      last_k = partition.num_leaves;
      last_c_max = std::max(partition.c_max, 1);
      last_q0 = std::max(partition.q0, 1e-12);
      // p0: minimum empirical pool frequency among occupied leaves
      double p0 = 1.0;
      for (int leaf = 0; leaf < partition.num_leaves; ++leaf)
        if (partition.s_count[leaf] > 0)
          p0 = std::min(p0, static_cast<double>(partition.u_count[leaf]) / last_n_train);
      last_p0 = std::max(p0, 1e-12);
      // B = max over training points of max(1/p, 1/p_hat)
      for (size_t j = 0; j < d.selected.size(); ++j) {
        const double p = d.probabilities[d.selected[j]];
        const int leaf = route(partition, sx.row(static_cast<Eigen::Index>(j)));
        const double q_hat = static_cast<double>(partition.s_count[leaf]) /
                             std::max(partition.u_count[leaf], 1);
        b_cluster = std::max({b_cluster, 1.0 / p, 1.0 / std::max(q_hat, 1e-12)});
      }
    }
  }
  report.phase_seconds.emplace_back("cross_validation", phase.elapsed());

  for (auto& method : report.methods) {
    method.nmse_mean = mean_of(method.fold_nmse);
    method.nmse_std = std_of(method.fold_nmse);
  }
  report.s_size_mean = s_size_sum / config.folds;
  report.test_size_mean = test_size_sum / config.folds;

  phase = Timer();
  const double big_m = std::max(max_abs_label, max_abs_pred);
  const double sigma = 2.0 * big_m;
  report.stability = beta_coefficients(sigma, 1.0, config.lambda, last_lambda_max);
  auto [cl1, cl2] =
      cluster_gap_bounds(sigma, 1.0, config.lambda, last_lambda_max, b_cluster,
                         last_k, last_p0, last_n_train, last_m, 0.05);
  report.bounds.push_back(cl1);
  report.bounds.push_back(cl2);
  report.bounds.push_back(kmm_gap_bound(sigma, 1.0, config.lambda, last_lambda_max,
                                        last_lambda_min, config.kmm.b_prime,
                                        config.kmm.epsilon, last_m, last_n_train, 0.05));
  report.crossover =
      crossover_diagnostic(last_lambda_min, b_cluster, last_k, last_n_train);
  report.phase_seconds.emplace_back("bounds", phase.elapsed());
  (void)last_q0;
  return report;
}

RunReport run(const ExperimentConfig& config) {
  return run(config, load_dataset(config.dataset_path));
}

UnbiasednessRecord verify_unbiasedness(const Dataset& pool, const BiasModel& model,
                                       const Hypothesis& h, int trials,
                                       std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("verify_unbiasedness: trials must be >= 1");
  const Eigen::Index n = pool.x.rows();
  Eigen::VectorXd pred = predict(h, pool.x);
  Eigen::VectorXd costs = (pred - pool.y).cwiseAbs2();
  const double pool_risk = costs.mean();
  Eigen::VectorXd p = selection_probabilities(model, pool.x);

  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(mix_seed(seed, 17, t));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double risk = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (uni(rng) < p[i]) risk += costs[i] / p[i];
    risk /= static_cast<double>(n);
    sum += risk;
    sumsq += risk * risk;
  }

  UnbiasednessRecord rec;
  rec.trials = trials;
  rec.pool_risk = pool_risk;
  rec.mc_mean = sum / trials;
  const double var = std::max(0.0, (sumsq - sum * sum / trials) / std::max(1, trials - 1));
  rec.mc_stderr = std::sqrt(var / trials);
  rec.z_score = (rec.mc_stderr > 0.0) ? (rec.mc_mean - pool_risk) / rec.mc_stderr : 0.0;
  return rec;
}

StabilityProbeRecord empirical_stability_probe(const Dataset& sample,
                                               const KernelSpec& kernel,
                                               double lambda, int pairs,
                                               std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("empirical_stability_probe: pairs must be >= 1");
  const Eigen::Index m = sample.x.rows();
  KernelMatrix km = gram(kernel, sample.x);

  StabilityProbeRecord rec;
  rec.pairs = pairs;

  double sigma_final = 0.0;
  for (int pair = 0; pair < pairs; ++pair) {
    std::mt19937_64 rng(mix_seed(seed, 23, pair));
    std::exponential_distribution<double> expo(1.0);
    Eigen::VectorXd a(m), b(m);
    for (Eigen::Index i = 0; i < m; ++i) a[i] = expo(rng);
    for (Eigen::Index i = 0; i < m; ++i) b[i] = expo(rng);
    auto w1 = WeightDistribution::from_raw(a);
    auto w2 = WeightDistribution::from_raw(b);

    auto h1 = fit(sample.x, sample.y, w1, kernel, lambda);
    auto h2 = fit(sample.x, sample.y, w2, kernel, lambda);
    Eigen::VectorXd p1 = predict(h1, sample.x);
    Eigen::VectorXd p2 = predict(h2, sample.x);

    const double big_m = std::max({sample.y.cwiseAbs().maxCoeff(),
                                   p1.cwiseAbs().maxCoeff(), p2.cwiseAbs().maxCoeff()});
    const double sigma = 2.0 * big_m;
    sigma_final = std::max(sigma_final, sigma);
    StabilityReport beta = beta_coefficients(sigma, 1.0, lambda, km.lambda_max);

    double delta = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double q1 = std::clamp(p1[i], -big_m, big_m) - sample.y[i];
      const double q2 = std::clamp(p2[i], -big_m, big_m) - sample.y[i];
      delta = std::max(delta, std::abs(q1 * q1 - q2 * q2));
    }
    const double d1 = l1_distance(w1.mass, w2.mass);
    const double d2 = l2_distance(w1.mass, w2.mass);
    rec.max_delta = std::max(rec.max_delta, delta);
    if (d1 > 0.0)
      rec.max_ratio_l1 = std::max(rec.max_ratio_l1, delta / (beta.beta_l1 * d1));
    if (d2 > 0.0)
      rec.max_ratio_l2 = std::max(rec.max_ratio_l2, delta / (beta.beta_l2 * d2));
  }
  rec.stability = beta_coefficients(std::max(sigma_final, 1e-300), 1.0, lambda,
                                    km.lambda_max);
  return rec;
}

std::string format_report(const RunReport& report, bool include_timings) {
  std::ostringstream out;
  char buf[256];
  out << "sample bias correction run report\n";
  out << "seed=" << report.seed << "\n";
  std::snprintf(buf, sizeof(buf),
                "|U|=%d  mean|S|=%.1f  mean n_test=%.1f  projection=%d  redraws=%d\n",
                report.u_size, report.s_size_mean, report.test_size_mean,
                report.chosen_projection, report.redraws_total);
  out << buf;
  out << "\nmethod        NMSE mean   NMSE std\n";
  for (const auto& method : report.methods) {
    std::snprintf(buf, sizeof(buf), "%-12s  %9.6f  %9.6f\n", method.name.c_str(),
                  method.nmse_mean, method.nmse_std);
    out << buf;
  }
  out << "\nstability: ";
  std::snprintf(buf, sizeof(buf),
                "beta_l1=%.6g beta_l2=%.6g sigma=%.6g kappa=%.6g lambda=%.6g lambda_max=%.6g\n",
                report.stability.beta_l1, report.stability.beta_l2, report.stability.sigma,
                report.stability.kappa, report.stability.lambda, report.stability.lambda_max);
  out << buf;
  out << "bounds (delta=0.05):\n";
  for (const auto& bound : report.bounds) {
    std::snprintf(buf, sizeof(buf), "  %-12s %.6g\n", bound.method.c_str(), bound.value);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "crossover: threshold=%.6g n=%.6g regime=%s\n",
                report.crossover.threshold, report.crossover.n,
                report.crossover.regime.c_str());
  out << buf;
  if (include_timings) {
    out << "timings:\n";
    for (const auto& [name, seconds] : report.phase_seconds) {
      std::snprintf(buf, sizeof(buf), "  %-22s %.3fs\n", name.c_str(), seconds);
      out << buf;
    }
  }
  return out.str();
}

std::string format_kv(const RunReport& report) {
  std::ostringstream out;
  out << "seed=" << report.seed << "\n";
  out << "u_size=" << report.u_size << "\n";
  out << "s_size_mean=" << fmt_double(report.s_size_mean) << "\n";
  out << "test_size_mean=" << fmt_double(report.test_size_mean) << "\n";
  out << "chosen_projection=" << report.chosen_projection << "\n";
  out << "redraws_total=" << report.redraws_total << "\n";
  out << "num_methods=" << report.methods.size() << "\n";
  for (size_t i = 0; i < report.methods.size(); ++i) {
    const auto& m = report.methods[i];
    const std::string p = "method." + std::to_string(i) + ".";
    out << p << "name=" << m.name << "\n";
    out << p << "nmse_mean=" << fmt_double(m.nmse_mean) << "\n";
    out << p << "nmse_std=" << fmt_double(m.nmse_std) << "\n";
    out << p << "num_folds=" << m.fold_nmse.size() << "\n";
    for (size_t f = 0; f < m.fold_nmse.size(); ++f)
      out << p << "fold." << f << "=" << fmt_double(m.fold_nmse[f]) << "\n";
  }
  out << "stability.beta_l1=" << fmt_double(report.stability.beta_l1) << "\n";
  out << "stability.beta_l2=" << fmt_double(report.stability.beta_l2) << "\n";
  out << "stability.sigma=" << fmt_double(report.stability.sigma) << "\n";
  out << "stability.kappa=" << fmt_double(report.stability.kappa) << "\n";
  out << "stability.lambda=" << fmt_double(report.stability.lambda) << "\n";
  out << "stability.lambda_max=" << fmt_double(report.stability.lambda_max) << "\n";
  out << "num_bounds=" << report.bounds.size() << "\n";
  for (size_t i = 0; i < report.bounds.size(); ++i) {
    const std::string p = "bound." + std::to_string(i) + ".";
    out << p << "method=" << report.bounds[i].method << "\n";
    out << p << "value=" << fmt_double(report.bounds[i].value) << "\n";
  }
  out << "crossover.threshold=" << fmt_double(report.crossover.threshold) << "\n";
  out << "crossover.n=" << fmt_double(report.crossover.n) << "\n";
  out << "crossover.regime=" << report.crossover.regime << "\n";
  return out.str();
}

RunReport parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("parse_kv: malformed line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("parse_kv: missing key " + key);
    return it->second;
  };

  RunReport report;
  report.seed = std::stoull(get("seed"));
  report.u_size = std::stoi(get("u_size"));
  report.s_size_mean = std::stod(get("s_size_mean"));
  report.test_size_mean = std::stod(get("test_size_mean"));
  report.chosen_projection = std::stoi(get("chosen_projection"));
  report.redraws_total = std::stoi(get("redraws_total"));
  const size_t num_methods = std::stoul(get("num_methods"));
  for (size_t i = 0; i < num_methods; ++i) {
    const std::string p = "method." + std::to_string(i) + ".";
    MethodSummary m;
    m.name = get(p + "name");
    m.nmse_mean = std::stod(get(p + "nmse_mean"));
    m.nmse_std = std::stod(get(p + "nmse_std"));
    const size_t folds = std::stoul(get(p + "num_folds"));
    for (size_t f = 0; f < folds; ++f)
      m.fold_nmse.push_back(std::stod(get(p + "fold." + std::to_string(f))));
    report.methods.push_back(std::move(m));
  }
  report.stability.beta_l1 = std::stod(get("stability.beta_l1"));
  report.stability.beta_l2 = std::stod(get("stability.beta_l2"));
  report.stability.sigma = std::stod(get("stability.sigma"));
  report.stability.kappa = std::stod(get("stability.kappa"));
  report.stability.lambda = std::stod(get("stability.lambda"));
  report.stability.lambda_max = std::stod(get("stability.lambda_max"));
  const size_t num_bounds = std::stoul(get("num_bounds"));
  for (size_t i = 0; i < num_bounds; ++i) {
    const std::string p = "bound." + std::to_string(i) + ".";
    report.bounds.push_back({get(p + "method"), std::stod(get(p + "value"))});
  }
  report.crossover.threshold = std::stod(get("crossover.threshold"));
  report.crossover.n = std::stod(get("crossover.n"));
  report.crossover.regime = get("crossover.regime");
  return report;
}

}  // namespace sbc
