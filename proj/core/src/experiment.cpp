#include "regdiag/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "regdiag/csv.hpp"
#include "regdiag/solvers.hpp"
#include "regdiag/subspace.hpp"
#include "regdiag/svdtools.hpp"

namespace regdiag {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

void run_pool(std::vector<std::function<void()>> tasks) {
  const int threads = worker_pool_size(tasks.size());
  if (threads <= 1) {
    for (auto& t : tasks) t();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::mutex err_mutex;
  std::vector<std::string> errors;
  for (int i = 0; i < threads; ++i) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= tasks.size()) return;
        try {
          tasks[idx]();
        } catch (const std::exception& ex) {
          std::lock_guard<std::mutex> lock(err_mutex);
          errors.emplace_back(ex.what());
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (!errors.empty()) throw NumericalError(errors.front());
}

json meta_json(const ExperimentConfig& cfg, std::uint64_t seed) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = cfg.kind;
  j["n"] = cfg.n;
  j["m"] = cfg.m > 0 ? cfg.m : cfg.n;
  j["seed"] = seed;
  if (cfg.kind == "synthetic") {
    const DecayModel& d = *cfg.decay;
    if (d.kind == DecayModel::Kind::Geometric)
      j["decay"] = {{"model", "geometric"}, {"rho", d.rho}};
    else
      j["decay"] = {{"model", "power"}, {"zeta", d.zeta}, {"alpha", d.alpha}};
    j["beta"] = cfg.beta;
  }
  if (cfg.eps > 0.0) j["eps"] = cfg.eps;
  return j;
}

SvdFactors problem_svd(const IllPosedProblem& p) {
  if (p.oracle_svd) return *p.oracle_svd;
  return compute_svd(p.A);
}

int auto_kmax(const ExperimentConfig& cfg, const SvdFactors& svd, const NoisyProblem& np) {
  if (cfg.kmax > 0) return std::min<int>(cfg.kmax, static_cast<int>(svd.n()));
  const TransitionReport tr = transition_index(picard_data(svd, np.b), np.eta);
  return std::min<int>(static_cast<int>(svd.n()) - 1, 3 * tr.k0);
}

std::string bool_cell(bool v) { return v ? "1" : "0"; }

json read_csv_as_json(const fs::path& path) {
  std::ifstream in(path);
  json rows = json::array();
  std::string line;
  std::vector<std::string> header;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(pos));
        break;
      }
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (first) {
      header = cells;
      first = false;
      continue;
    }
    json row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i)
      row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

void ExperimentConfig::validate_common() const {
  if (kind != "synthetic" && kind != "shaw" && kind != "deriv2")
    throw ValidationError("invalid-kind: " + kind);
  if (n < 2) throw ValidationError("invalid-dimension: n must be >= 2");
  if (kind == "synthetic") {
    if (!decay) throw ValidationError("invalid-decay: synthetic requires --decay");
    decay->validate();
    if (!(beta > 0.0)) throw ValidationError("invalid-parameter: beta must be > 0");
  }
  if (m > 0 && m < n) throw ValidationError("invalid-dimension: m must be >= n");
  if (eps < 0.0 || eps >= 1.0) throw ValidationError("invalid-parameter: eps in [0, 1)");
  if (out.empty()) throw ValidationError("invalid-parameter: --out is required");
}

DecayModel ExperimentConfig::effective_decay() const {
  if (kind == "synthetic") return *decay;
  if (kind == "shaw") return DecayModel::geometric(std::exp(2.0));
  return DecayModel::power_law(1.0 / (M_PI * M_PI), 2.0);  // deriv2: sigma_k ~ (k pi)^{-2}
}

int worker_pool_size(std::size_t tasks) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("REGDIAG_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return static_cast<int>(std::min<std::size_t>(hw, std::max<std::size_t>(tasks, 1)));
}

IllPosedProblem make_problem(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.kind == "shaw") return gen_shaw(cfg.n);
  if (cfg.kind == "deriv2") return gen_deriv2(cfg.n);
  SyntheticSpec spec;
  spec.m = cfg.m > 0 ? cfg.m : cfg.n;
  spec.n = cfg.n;
  spec.decay = *cfg.decay;
  spec.beta = cfg.beta;
  spec.seed = seed;
  return gen_synthetic(spec);
}

void cmd_generate(const ExperimentConfig& cfg) {
  cfg.validate_common();
  if (cfg.seeds.empty()) throw ValidationError("invalid-parameter: at least one --seed");
  fs::create_directories(cfg.out);

  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = cfg.seeds.size() == 1
                             ? cfg.out
                             : cfg.out / ("seed" + std::to_string(seed));
    fs::create_directories(dir);
    const IllPosedProblem p = make_problem(cfg, seed);
    write_matrix_csv(dir / "A.csv", p.A);
    write_vector_csv(dir / "b_true.csv", p.b_true);
    write_vector_csv(dir / "x_true.csv", p.x_true);
    json meta = meta_json(cfg, seed);
    if (cfg.eps > 0.0) {
      const NoisyProblem np = add_noise(p, cfg.eps, seed);
      write_vector_csv(dir / "b.csv", np.b);
      write_vector_csv(dir / "e.csv", np.e);
      meta["eta"] = np.eta;
    }
    std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  }
}

void cmd_semiconv(const ExperimentConfig& cfg) {
  cfg.validate_common();
  if (cfg.seeds.empty()) throw ValidationError("invalid-parameter: at least one --seed");
  if (!(cfg.eps > 0.0)) throw ValidationError("invalid-parameter: semiconv requires --eps > 0");
  if (cfg.methods.empty()) throw ValidationError("invalid-parameter: empty methods list");
  for (const std::string& mth : cfg.methods)
    if (mth != "lsqr" && mth != "cgls" && mth != "cgme" && mth != "lsmr")
      throw ValidationError("unknown-method: " + mth);
  fs::create_directories(cfg.out);

  std::vector<json> per_seed(cfg.seeds.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    tasks.emplace_back([&, si] {
      const std::uint64_t seed = cfg.seeds[si];
      const fs::path dir = cfg.out / ("seed" + std::to_string(seed));
      fs::create_directories(dir);

      const IllPosedProblem p = make_problem(cfg, seed);
      const NoisyProblem np = add_noise(p, cfg.eps, seed);
      const SvdFactors svd = problem_svd(p);
      const int kmax = auto_kmax(cfg, svd, np);

      const PicardData pic = picard_data(svd, np.b);
      {
        CsvWriter w(dir / "picard.csv", {"i", "sigma_i", "coeff_i", "ratio_i"});
        for (Eigen::Index i = 0; i < pic.sigma.size(); ++i)
          w.row({std::to_string(i + 1), fmt17(pic.sigma(i)), fmt17(pic.coeff(i)),
                 fmt17(pic.ratio(i))});
      }
      const TsvdCurve curve = tsvd_error_curve(svd, np.b, p.x_true, kmax);
      {
        CsvWriter w(dir / "tsvd_curve.csv", {"k", "rel_error", "residual_norm"});
        for (std::size_t k = 0; k < curve.rel_error.size(); ++k)
          w.row({std::to_string(k + 1), fmt17(curve.rel_error[k]),
                 fmt17(curve.residual_norm[k])});
      }
      const TransitionReport tr = transition_index(pic, np.eta);

      json summary;
      summary["seed"] = seed;
      summary["eps"] = cfg.eps;
      summary["kmax"] = kmax;
      summary["k0_best_tsvd"] = curve.argmin;
      summary["k0_transition"] = tr.k0;
      summary["tsvd_best_rel_error"] = curve.rel_error[static_cast<std::size_t>(curve.argmin) - 1];

      if (std::find(cfg.methods.begin(), cfg.methods.end(), "lsqr") != cfg.methods.end()) {
        const BidiagState st = lanczos_bidiag(p.A, np.b, kmax, cfg.reorth);
        CsvWriter w(dir / "filters.csv", {"k", "i", "f_i_k"});
        for (int k = 1; k <= st.k; ++k) {
          const Eigen::VectorXd fk = filter_factors(ritz_values(st, k), svd.sigma);
          for (Eigen::Index i = 0; i < fk.size(); ++i)
            w.row({std::to_string(k), std::to_string(i + 1), fmt17(fk(i))});
        }
      }

      for (const std::string& mth : cfg.methods) {
        SolutionSeries s;
        if (mth == "lsqr")
          s = lsqr_series(np, kmax, cfg.reorth);
        else if (mth == "cgls")
          s = cgls_series(np, kmax);
        else if (mth == "cgme")
          s = cgme_series(np, kmax);
        else
          s = lsmr_series(np, kmax);
        CsvWriter w(dir / ("series_" + mth + ".csv"),
                    {"k", "rel_error", "residual_norm", "solution_norm"});
        for (int k = 1; k <= s.size(); ++k)
          w.row({std::to_string(k), fmt17(s.rel_error[static_cast<std::size_t>(k) - 1]),
                 fmt17(s.residual_norm[static_cast<std::size_t>(k) - 1]),
                 fmt17(s.solution_norm[static_cast<std::size_t>(k) - 1])});
        summary["methods"][mth] = {
            {"kstar", s.kstar},
            {"best_rel_error", s.best_rel_error},
            {"truncated_by_breakdown", s.truncated_by_breakdown},
            {"no_semi_convergence", s.no_semi_convergence},
        };
        if (mth == "lsqr")
          summary["kstar_le_k0"] = s.kstar <= curve.argmin;
      }
      per_seed[si] = std::move(summary);
    });
  }
  run_pool(std::move(tasks));

  json top;
  top["schema_version"] = kSchemaVersion;
  top["command"] = "semiconv";
  top["config"] = meta_json(cfg, cfg.seeds.front());
  top["runs"] = per_seed;
  bool all_ordered = true;
  for (const json& r : per_seed)
    if (r.contains("kstar_le_k0") && !r["kstar_le_k0"].get<bool>()) all_ordered = false;
  top["all_kstar_le_k0"] = all_ordered;
  std::ofstream(cfg.out / "summary.json") << top.dump(2) << '\n';
}

void cmd_diagnose(const ExperimentConfig& cfg) {
  cfg.validate_common();
  if (cfg.seeds.empty()) throw ValidationError("invalid-parameter: at least one --seed");
  if (!(cfg.eps > 0.0)) throw ValidationError("invalid-parameter: diagnose requires --eps > 0");
  fs::create_directories(cfg.out);
  const DecayModel decay = cfg.effective_decay();

  std::vector<json> per_seed(cfg.seeds.size());
  std::vector<std::function<void()>> tasks;
  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    tasks.emplace_back([&, si] {
      const std::uint64_t seed = cfg.seeds[si];
      const fs::path dir = cfg.out / ("seed" + std::to_string(seed));
      fs::create_directories(dir);

      const IllPosedProblem p = make_problem(cfg, seed);
      const NoisyProblem np = add_noise(p, cfg.eps, seed);
      const SvdFactors svd = problem_svd(p);
      const int kdiag = diagnosable_kmax(svd.sigma);
      const int kmax = cfg.kmax > 0 ? std::min(cfg.kmax, kdiag) : kdiag;

      const BidiagState st = lanczos_bidiag(p.A, np.b, std::min<int>(kmax, static_cast<int>(p.n())), cfg.reorth);
      const auto rows = diagnose_subspace(svd, st, np.b, decay, kmax, cfg.delta);

      {
        CsvWriter w(dir / "sintheta.csv",
                    {"k", "sin_exact", "sin_estimate", "ratio", "tan_theta", "lagrange_max", "k1"});
        for (const auto& r : rows)
          w.row({std::to_string(r.k), fmt17(r.sin_exact), fmt17(r.sin_estimate),
                 fmt17(r.sin_estimate / r.sin_exact), fmt17(r.tan_theta),
                 fmt17(r.lagrange_max), std::to_string(r.k1)});
      }
      {
        CsvWriter w(dir / "ritz_check.csv",
                    {"k", "eps_k", "sigma_ratio", "large_cond", "small_cond", "theta_k",
                     "sigma_kplus1", "theta_gt_sigma"});
        for (const auto& r : rows)
          w.row({std::to_string(r.k), fmt17(r.ritz.eps_k), fmt17(r.ritz.sigma_ratio),
                 bool_cell(r.ritz.sufficient_large_holds), bool_cell(r.ritz.sufficient_small_holds),
                 fmt17(r.ritz.theta_k), fmt17(r.ritz.sigma_kplus1),
                 bool_cell(r.ritz.theta_gt_sigma)});
      }
      {
        CsvWriter w(dir / "lagrange.csv", {"k", "j", "l_exact", "l_estimate"});
        for (const auto& r : rows) {
          if (r.k < 2) continue;
          const LagrangeFactors lf = lagrange_factors(svd.sigma, r.k);
          std::vector<double> est(static_cast<std::size_t>(r.k),
                                  std::numeric_limits<double>::quiet_NaN());
          if (decay.severe()) {
            est = estimate_lagrange_severe(decay.rho, r.k).per_j;
          } else {
            est.back() = estimate_lagrange_moderate(decay.alpha, r.k).upper_estimate;
          }
          for (int j = 1; j <= r.k; ++j)
            w.row({std::to_string(r.k), std::to_string(j),
                   fmt17(lf.value[static_cast<std::size_t>(j) - 1]),
                   fmt17(est[static_cast<std::size_t>(j) - 1])});
        }
      }
      {
        CsvWriter w(dir / "ritz.csv", {"k", "i", "theta_i_k"});
        for (const auto& r : rows) {
          const std::vector<double> theta = ritz_values(st, r.k);
          for (std::size_t i = 0; i < theta.size(); ++i)
            w.row({std::to_string(r.k), std::to_string(i + 1), fmt17(theta[i])});
        }
      }
      {
        CsvWriter w(dir / "bidiag_diag.csv",
                    {"k", "alpha_k", "beta_kplus1", "orth_defect_P", "orth_defect_Q"});
        for (int k = 1; k <= st.k; ++k) {
          const Eigen::MatrixXd Qk = st.Q.leftCols(k);
          const Eigen::MatrixXd Pk = st.P.leftCols(std::min<int>(k + 1, static_cast<int>(st.P.cols())));
          w.row({std::to_string(k), fmt17(st.alphas[static_cast<std::size_t>(k) - 1]),
                 fmt17(st.betas[static_cast<std::size_t>(k)]),
                 fmt17((Pk.transpose() * Pk -
                        Eigen::MatrixXd::Identity(Pk.cols(), Pk.cols())).norm()),
                 fmt17((Qk.transpose() * Qk -
                        Eigen::MatrixXd::Identity(k, k)).norm())});
        }
      }

      json summary;
      summary["seed"] = seed;
      summary["kdiag"] = rows.empty() ? 0 : rows.back().k;
      double logsum = 0.0;
      for (const auto& r : rows) logsum += std::log(r.sin_estimate / r.sin_exact);
      summary["ratio_geomean"] =
          rows.empty() ? 0.0 : std::exp(logsum / static_cast<double>(rows.size()));
      per_seed[si] = std::move(summary);
    });
  }
  run_pool(std::move(tasks));

  json top;
  top["schema_version"] = kSchemaVersion;
  top["command"] = "diagnose";
  top["config"] = meta_json(cfg, cfg.seeds.front());
  top["runs"] = per_seed;
  double logsum = 0.0;
  for (const json& r : per_seed) logsum += std::log(r["ratio_geomean"].get<double>());
  top["ratio_geomean"] = std::exp(logsum / static_cast<double>(per_seed.size()));
  std::ofstream(cfg.out / "summary.json") << top.dump(2) << '\n';
}

void cmd_report(const fs::path& run_dir) {
  if (!fs::exists(run_dir)) throw ValidationError("missing-input: " + run_dir.string());

  json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "report";
  bool partial = false;

  const std::vector<std::string> known = {
      "picard.csv",   "tsvd_curve.csv", "filters.csv",     "series_lsqr.csv", "series_cgls.csv",
      "series_cgme.csv", "series_lsmr.csv", "sintheta.csv", "ritz_check.csv",
      "lagrange.csv", "ritz.csv",       "bidiag_diag.csv"};

  auto merge_dir = [&](const fs::path& dir, json& dest) {
    for (const std::string& name : known) {
      const fs::path f = dir / name;
      if (fs::exists(f))
        dest[name.substr(0, name.size() - 4)] = read_csv_as_json(f);
    }
    if (fs::exists(dir / "meta.json")) {
      std::ifstream in(dir / "meta.json");
      json meta;
      in >> meta;
      dest["meta"] = meta;
    }
  };

  std::vector<fs::path> seed_dirs;
  for (const auto& entry : fs::directory_iterator(run_dir))
    if (entry.is_directory() && entry.path().filename().string().rfind("seed", 0) == 0)
      seed_dirs.push_back(entry.path());
  std::sort(seed_dirs.begin(), seed_dirs.end());

  if (seed_dirs.empty()) {
    merge_dir(run_dir, report["run"]);
  } else {
    for (const fs::path& d : seed_dirs) {
      json one;
      one["dir"] = d.filename().string();
      merge_dir(d, one);
      report["runs"].push_back(std::move(one));
    }
  }
  if (fs::exists(run_dir / "summary.json")) {
    std::ifstream in(run_dir / "summary.json");
    json s;
    in >> s;
    report["summary"] = s;
  } else {
    partial = true;
  }
  // A run is partial when the expected diagnose/semiconv tables are absent.
  const json& sample = seed_dirs.empty() ? report["run"] : report["runs"][0];
  if (!sample.contains("sintheta") && !sample.contains("series_lsqr") &&
      !sample.contains("tsvd_curve") && !sample.contains("meta"))
    partial = true;
  if ((sample.contains("sintheta") && !sample.contains("ritz_check")) ||
      (sample.contains("ritz_check") && !sample.contains("sintheta")))
    partial = true;
  report["partial"] = partial;

  std::ofstream(run_dir / "report.json") << report.dump(2) << '\n';
}

}  // namespace regdiag
