#include "app.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <variant>

#include "msent/bounds.hpp"
#include "msent/error.hpp"
#include "msent/io.hpp"
#include "msent/multiscale.hpp"
#include "msent/oracle.hpp"
#include "msent/parallel.hpp"
#include "msent/random.hpp"

namespace msent::app {

namespace {

constexpr double kTabularAgreement = 1e-4;
constexpr double kGaussianConsistency = 1e-8;

using io::count;
using io::field;
using io::number;
using io::numbers;

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

const Json* optional_field(const Json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number_or(const Json& obj, const std::string& key, double fallback, const std::string& path) {
  const Json* j = optional_field(obj, key);
  return j ? number(*j, path + "." + key) : fallback;
}

std::size_t count_or(const Json& obj, const std::string& key, std::size_t fallback,
                     const std::string& path) {
  const Json* j = optional_field(obj, key);
  return j ? count(*j, path + "." + key) : fallback;
}

std::string string_field(const Json& obj, const std::string& key, const std::string& path) {
  const Json& j = field(obj, key, path);
  if (!j.is_string()) throw Error(Errc::InvalidConfig, path + "." + key + ": expected a string");
  return j.get<std::string>();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::InvalidArgument, "cannot open " + path + " for writing");
  out << text;
}

Json provenance(const Json& config) {
  return {{"version", MSENT_VERSION}, {"config", config}};
}

TemperatureSchedule schedule_from_json(const Json& cfg) {
  const double lambda = number_or(cfg, "lambda", 1.0, "$");
  auto sigma = numbers(field(cfg, "sigma", "$"), "$.sigma");
  return io::at_path("$.sigma", [&] { return TemperatureSchedule(lambda, std::move(sigma)); });
}

template <class F>
int run_guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return e.code() == Errc::InvalidConfig ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config loading

Json parse_config(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, line_start = 0;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        line_start = i + 1;
      }
    }
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::ostringstream msg;
    msg << origin << ":" << line << ":" << (offset - line_start + 1) << ": invalid JSON\n  "
        << text.substr(line_start, line_end - line_start) << "\n  "
        << std::string(offset - line_start, ' ') << "^";
    throw Error(Errc::InvalidConfig, msg.str());
  }
}

Json load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidConfig, "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

// ---------------------------------------------------------------------------
// solve-tabular

int cmd_solve_tabular(const CommandOptions& opts, std::ostream& log) {
  return run_guarded(log, [&] {
    const Json cfg = load_config(opts.config_path);
    const std::string algorithm = string_field(cfg, "algorithm", "$");
    if (algorithm != "max-entropy" && algorithm != "min-rel-entropy" && algorithm != "mt") {
      throw Error(Errc::InvalidConfig,
                  "$.algorithm: expected max-entropy, min-rel-entropy or mt, got " + algorithm);
    }
    const EnergyTable f = io::energy_from_json(field(cfg, "energy", "$"), "$.energy");
    const TemperatureSchedule sched = schedule_from_json(cfg);

    std::optional<TabularDist> q;
    if (algorithm != "max-entropy") {
      q = io::tabular_from_json(field(cfg, "reference", "$"), "$.reference");
    }

    std::vector<ScaleMap> chain;
    const Json* chain_json = optional_field(cfg, "chain");
    if (!chain_json || (chain_json->is_string() && chain_json->get<std::string>() == "decimation")) {
      chain = io::at_path("$.chain", [&] { return decimation_chain(f.space(), sched.levels()); });
    } else if (chain_json->is_array()) {
      if (algorithm == "mt") throw Error(Errc::InvalidConfig, "$.chain: mt requires decimation");
      for (std::size_t k = 0; k < chain_json->size(); ++k) {
        chain.push_back(io::scale_map_from_json((*chain_json)[k], "$.chain[" + std::to_string(k) + "]"));
      }
      io::at_path("$.chain", [&] {
        validate_chain(f.space(), chain, sched.levels());
        return 0;
      });
    } else {
      throw Error(Errc::InvalidConfig, "$.chain: expected \"decimation\" or an array of maps");
    }

    MultiscaleSolution<TabularDist> solution = [&] {
      if (algorithm == "max-entropy") return solve_max_entropy(f, sched, chain);
      if (algorithm == "min-rel-entropy") return solve_min_relative_entropy(f, *q, sched, chain);
      const TabularDist start = gibbs(f, *q, 1.0 / (sched.lambda() * sched.sigma(1)));
      return solve_mt(start, *q, sched);
    }();
    const Objective objective =
        algorithm == "max-entropy" ? Objective::MaxEntropy : Objective::MinRelativeEntropy;

    Json out = provenance(cfg);
    out["algorithm"] = algorithm;
    out["solution"] = io::to_json(solution.distribution);
    out["objective"] = objective_value(objective, solution.distribution, f, q, sched, chain);
    int code = kOk;
    if (opts.verify) {
      OracleSettings settings;
      if (const Json* o = optional_field(cfg, "oracle")) {
        settings.max_iterations = count_or(*o, "max_iterations", settings.max_iterations, "$.oracle");
        settings.step_size = number_or(*o, "step_size", settings.step_size, "$.oracle");
        settings.convergence_tol = number_or(*o, "convergence_tol", settings.convergence_tol, "$.oracle");
      }
      const OracleResult oracle = minimize_tabular(objective, f, q, sched, chain, settings);
      const double tv = total_variation(solution.distribution, oracle.distribution);
      out["oracle"] = {{"distribution", io::to_json(oracle.distribution)},
                       {"objective", oracle.objective},
                       {"iterations", oracle.iterations},
                       {"stationarity_gap", oracle.stationarity_gap}};
      out["total_variation"] = tv;
      out["verified"] = tv <= kTabularAgreement;
      if (tv > kTabularAgreement) {
        log << "verification failed: total variation " << fmt9(tv) << " exceeds "
            << fmt9(kTabularAgreement) << "\n";
        code = kVerificationFailed;
      }
    }
    write_text(opts.out_path, out.dump(2) + "\n");
    return code;
  });
}

// ---------------------------------------------------------------------------
// solve-gaussian

int cmd_solve_gaussian(const CommandOptions& opts, std::ostream& log) {
  return run_guarded(log, [&] {
    const Json cfg = load_config(opts.config_path);
    const std::string algorithm = string_field(cfg, "algorithm", "$");
    if (algorithm != "max-entropy" && algorithm != "min-rel-entropy" && algorithm != "mt") {
      throw Error(Errc::InvalidConfig,
                  "$.algorithm: expected max-entropy, min-rel-entropy or mt, got " + algorithm);
    }
    const Json& ej = field(cfg, "energy", "$");
    const auto g = numbers(field(ej, "g", "$.energy"), "$.energy.g");
    const auto k = numbers(field(ej, "K", "$.energy"), "$.energy.K");
    const auto n = static_cast<Index>(g.size());
    if (k.size() != g.size() * g.size()) {
      throw Error(Errc::InvalidConfig, "$.energy.K: expected n*n row-major entries");
    }
    const QuadraticEnergy energy = io::at_path("$.energy", [&] {
      return QuadraticEnergy(
          Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(k.data(), n, n),
          Eigen::Map<const Vector>(g.data(), n), number_or(ej, "c", 0.0, "$.energy"));
    });
    const TemperatureSchedule sched = schedule_from_json(cfg);
    const BlockPartition partition = io::partition_from_json(cfg, "$");

    std::optional<GaussianDist> q;
    if (algorithm != "max-entropy") q = io::gaussian_from_json(field(cfg, "reference", "$"), "$.reference");

    const MultiscaleSolution<GaussianDist> solution = [&] {
      if (algorithm == "max-entropy") return solve_max_entropy(energy, sched, partition);
      if (algorithm == "min-rel-entropy") return solve_min_relative_entropy(energy, *q, sched, partition);
      const GaussianDist start = gibbs(energy, *q, 1.0 / (sched.lambda() * sched.sigma(1)));
      return solve_mt(start, *q, sched, partition);
    }();

    Json out = provenance(cfg);
    out["algorithm"] = algorithm;
    out["solution"] = io::to_json(solution.distribution, partition);
    Json inter = Json::array();
    for (const GaussianDist& u : solution.intermediates) {
      std::vector<Index> sizes(partition.sizes().begin(),
                               partition.sizes().begin() +
                                   static_cast<std::ptrdiff_t>(partition.count() - inter.size()));
      inter.push_back(io::to_json(u, BlockPartition(std::move(sizes))));
    }
    out["intermediates"] = inter;
    int code = kOk;
    if (opts.verify) {
      const double worst = refinement_error(solution, partition);
      out["refinement_error"] = worst;
      out["verified"] = worst <= kGaussianConsistency;
      if (worst > kGaussianConsistency) {
        log << "verification failed: refinement error " << fmt9(worst) << "\n";
        code = kVerificationFailed;
      }
    }
    write_text(opts.out_path, out.dump(2) + "\n");
    return code;
  });
}

// ---------------------------------------------------------------------------
// experiment

std::vector<double> default_alphas() {
  std::vector<double> out;
  for (int k = 0; k <= 19; ++k) out.push_back(0.05 * k);
  out.push_back(0.999);
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (count == 0) throw Error(Errc::InvalidArgument, "grid must be nonempty");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    out[k] = std::pow(10.0, lo + t * (hi - lo));
  }
  return out;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  const std::string path = "$";
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "$: expected an object");
  ExperimentConfig cfg;
  nn::TeacherStudentConfig& p = cfg.problem;
  p.student.width = static_cast<Index>(count_or(j, "width", 10, path));
  p.student.depth = count_or(j, "depth", 4, path);
  p.student.input_radius = number_or(j, "input_radius", 1.0, path);
  p.teacher_depth = count_or(j, "teacher_depth", 2, path);
  p.samples = count_or(j, "samples", 30, path);
  p.input_variance = number_or(j, "input_variance", 1.0, path);
  p.teacher_variance = number_or(j, "teacher_variance", 0.1, path);
  p.prior_variance = number_or(j, "prior_variance", 5e-5, path);
  cfg.test_inputs = static_cast<Index>(count_or(j, "n_test", 2000, path));
  cfg.weight_samples = static_cast<Index>(count_or(j, "n_weights", 200, path));
  if (const Json* s = optional_field(j, "seed")) cfg.seed = count(*s, "$.seed");
  io::at_path("$", [&] {
    p.validate();
    return 0;
  });
  if (cfg.test_inputs < 1 || cfg.weight_samples < 1) {
    throw Error(Errc::InvalidConfig, "$: n_test and n_weights must be positive");
  }

  cfg.alphas = default_alphas();
  if (const Json* a = optional_field(j, "alphas")) cfg.alphas = numbers(*a, "$.alphas");
  if (cfg.alphas.empty()) throw Error(Errc::InvalidConfig, "$.alphas: grid must be nonempty");
  for (std::size_t k = 0; k < cfg.alphas.size(); ++k) {
    if (!(cfg.alphas[k] >= 0.0 && cfg.alphas[k] <= 0.999)) {
      throw Error(Errc::InvalidConfig, "$.alphas[" + std::to_string(k) + "]: must lie in [0, 0.999]");
    }
  }

  cfg.sigma1s = log_grid(-9.5, -2.5, 29);
  if (const Json* s = optional_field(j, "sigma1")) {
    if (s->is_array()) {
      cfg.sigma1s = numbers(*s, "$.sigma1");
    } else {
      const double lo = number_or(*s, "log10_min", -9.5, "$.sigma1");
      const double hi = number_or(*s, "log10_max", -2.5, "$.sigma1");
      const std::size_t n = count_or(*s, "count", 29, "$.sigma1");
      if (n == 0) throw Error(Errc::InvalidConfig, "$.sigma1.count: must be positive");
      cfg.sigma1s = log_grid(lo, hi, n);
    }
  }
  if (cfg.sigma1s.empty()) throw Error(Errc::InvalidConfig, "$.sigma1: grid must be nonempty");
  for (std::size_t k = 0; k < cfg.sigma1s.size(); ++k) {
    if (!(cfg.sigma1s[k] > 0.0)) {
      throw Error(Errc::InvalidConfig, "$.sigma1[" + std::to_string(k) + "]: must be positive");
    }
  }
  return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
  const nn::TeacherStudentConfig& p = cfg.problem;
  return {{"width", p.student.width},
          {"depth", p.student.depth},
          {"input_radius", p.student.input_radius},
          {"teacher_depth", p.teacher_depth},
          {"samples", p.samples},
          {"input_variance", p.input_variance},
          {"teacher_variance", p.teacher_variance},
          {"prior_variance", p.prior_variance},
          {"n_test", cfg.test_inputs},
          {"n_weights", cfg.weight_samples},
          {"seed", cfg.seed},
          {"alphas", cfg.alphas},
          {"sigma1", cfg.sigma1s}};
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::size_t workers) {
  nn::TeacherStudentConfig problem = cfg.problem;
  problem.seed = cfg.seed;
  const nn::TeacherStudentData data = nn::teacher_student_data(problem);
  const QuadraticEnergy energy =
      nn::gauss_newton_energy(nn::ResNetParams::zeros(problem.student.width, problem.student.depth),
                              data.train);
  const GaussianDist prior = nn::iid_prior(problem.student, problem.prior_variance);
  const BlockPartition partition = nn::layer_partition(problem.student);

  const std::size_t na = cfg.alphas.size();
  std::vector<SweepRow> rows(na * cfg.sigma1s.size());
  // One task per sigma1 so the single-scale posterior is shared across alphas.
  parallel_for(cfg.sigma1s.size(), workers, [&](std::size_t s) {
    const double sigma1 = cfg.sigma1s[s];
    const GaussianDist gibbs_dist = nn::gibbs_posterior(energy, prior, sigma1);
    for (std::size_t a = 0; a < na; ++a) {
      const double alpha = cfg.alphas[a];
      const GaussianDist posterior =
          nn::multiscale_posterior_from_gibbs(gibbs_dist, prior, alpha, sigma1, partition);
      nn::RiskSettings settings;
      settings.test_inputs = cfg.test_inputs;
      settings.weight_samples = cfg.weight_samples;
      settings.seed = derive_seed(derive_seed(cfg.seed, std::bit_cast<std::uint64_t>(alpha)),
                                  std::bit_cast<std::uint64_t>(sigma1));
      const nn::RiskEstimate r = nn::population_risk_mc(posterior, data.teacher, problem, settings);
      rows[s * na + a] = {alpha, sigma1, r.estimate, r.std_error};
    }
  });
  std::sort(rows.begin(), rows.end(), [](const SweepRow& x, const SweepRow& y) {
    return x.alpha != y.alpha ? x.alpha < y.alpha : x.sigma1 < y.sigma1;
  });
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows) {
  std::map<double, SummaryRow> best;
  for (const SweepRow& r : rows) {
    auto it = best.find(r.alpha);
    if (it == best.end() || r.risk < it->second.risk) {
      best[r.alpha] = {r.alpha, r.sigma1, r.risk, r.risk_stderr};
    }
  }
  std::vector<SummaryRow> out;
  for (const auto& [alpha, row] : best) out.push_back(row);
  return out;
}

namespace {

std::string csv_header(const Json& config) {
  return std::string("# version: ") + MSENT_VERSION + "\n# config: " + config.dump() + "\n";
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows, const Json& config) {
  std::string out = csv_header(config) + "alpha,sigma1,risk,risk_stderr\n";
  for (const SweepRow& r : rows) {
    out += fmt9(r.alpha) + "," + fmt9(r.sigma1) + "," + fmt9(r.risk) + "," + fmt9(r.risk_stderr) + "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows, const Json& config) {
  std::string out = csv_header(config) + "alpha,best_sigma1,risk,risk_stderr\n";
  for (const SummaryRow& r : rows) {
    out += fmt9(r.alpha) + "," + fmt9(r.sigma1) + "," + fmt9(r.risk) + "," + fmt9(r.risk_stderr) + "\n";
  }
  return out;
}

std::string summary_path(const std::string& out) {
  const std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + "_summary.csv")).string();
}

int cmd_experiment(const CommandOptions& opts, std::ostream& log) {
  return run_guarded(log, [&] {
    ExperimentConfig cfg = experiment_config_from_json(load_config(opts.config_path));
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out_path.empty() || opts.out_path == "-") {
      throw Error(Errc::InvalidConfig, "experiment needs --out <file.csv>");
    }
    const Json resolved = to_json(cfg);
    const std::vector<SweepRow> rows = run_sweep(cfg, opts.workers);
    write_text(opts.out_path, sweep_csv(rows, resolved));
    write_text(summary_path(opts.out_path), summary_csv(summarize(rows), resolved));
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// bounds

int cmd_bounds(const CommandOptions& opts, std::ostream& log) {
  return run_guarded(log, [&] {
    const Json cfg = load_config(opts.config_path);
    bounds::BoundConfig bc;
    bc.R = number_or(cfg, "R", 1.0, "$");
    bc.n = count_or(cfg, "n", 30, "$");
    bc.depth = count(field(cfg, "depth", "$"), "$.depth");
    io::at_path("$", [&] {
      bc.validate();
      return 0;
    });
    const Json& ref = field(cfg, "reference", "$");
    const std::string type = string_field(ref, "type", "$.reference");

    Json out = provenance(cfg);
    std::optional<bounds::ReferencePosterior> qhat;
    std::optional<GaussianDist> prior;
    std::optional<BlockPartition> partition;

    if (type == "dirac") {
      auto values = numbers(field(ref, "log_inv_q", "$.reference"), "$.reference.log_inv_q");
      if (values.size() != bc.depth) {
        throw Error(Errc::InvalidConfig, "$.reference.log_inv_q: expected one value per layer");
      }
      qhat = bounds::DiracReference{std::move(values)};
    } else if (type == "teacher-student") {
      const std::size_t dp = count(field(ref, "teacher_depth", "$.reference"), "$.reference.teacher_depth");
      const double l1 = number_or(ref, "log_inv_q1", 0.0, "$.reference");
      const double l2 = number(field(ref, "log_inv_q2", "$.reference"), "$.reference.log_inv_q2");
      qhat = io::at_path("$.reference", [&] {
        return bounds::ReferencePosterior(bounds::teacher_student_reference(bc.depth, dp, l1, l2));
      });
      const auto sum = io::at_path("$.reference", [&] {
        return bounds::teacher_student_dpg_sum(bc.depth, static_cast<double>(bc.depth) / dp, l2);
      });
      out["teacher_student"] = {{"ratio", static_cast<double>(bc.depth) / dp},
                                {"exact", sum.exact},
                                {"approx", sum.approx},
                                {"log_inv_q1_neglected", l1}};
    } else if (type == "gaussian") {
      qhat = io::gaussian_from_json(ref, "$.reference");
      partition = io::partition_from_json(ref, "$.reference");
      prior = io::gaussian_from_json(field(cfg, "prior", "$"), "$.prior");
    } else if (type == "teacher-gaussian") {
      // Gaussian reference centered on the teacher of a teacher-student problem.
      ExperimentConfig ec = experiment_config_from_json(field(ref, "problem", "$.reference"));
      if (opts.seed) ec.seed = *opts.seed;
      ec.problem.seed = ec.seed;
      if (ec.problem.student.depth != bc.depth) {
        throw Error(Errc::InvalidConfig, "$.reference.problem.depth: differs from $.depth");
      }
      const double var = number(field(ref, "variance", "$.reference"), "$.reference.variance");
      const nn::TeacherStudentData data = nn::teacher_student_data(ec.problem);
      const Vector w = data.teacher.flatten();
      qhat = io::at_path("$.reference.variance", [&] {
        return bounds::ReferencePosterior(GaussianDist::from_covariance(
            w, var * Matrix::Identity(w.size(), w.size())));
      });
      prior = nn::iid_prior(ec.problem.student, ec.problem.prior_variance);
      partition = nn::layer_partition(ec.problem.student);
      out["resolved_problem"] = to_json(ec);
    } else {
      throw Error(Errc::InvalidConfig, "$.reference.type: expected dirac, teacher-student, gaussian "
                                       "or teacher-gaussian, got " + type);
    }
    if (!partition) partition = BlockPartition(std::vector<Index>(bc.depth, 1));
    if (!prior) prior = GaussianDist::isotropic(partition->total(), 1.0);
    out["report"] = io::at_path("$", [&] { return bounds::bound_report(*qhat, *prior, bc, *partition); });
    write_text(opts.out_path, out.dump(2) + "\n");
    return kOk;
  });
}

}  // namespace msent::app
