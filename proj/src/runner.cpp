#include "bistoch/runner.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "bistoch/random_kernels.hpp"
#include "bistoch/symbolic.hpp"

namespace bistoch {

namespace {

const std::set<std::string> kCommands = {"axioms",        "coupling", "scan-prime",
                                         "scan-isometry", "mixing",   "limits",
                                         "intertwine",    "corollary1", "chain"};

bool is_symbolic_command(const std::string& c) {
  return c == "limits" || c == "intertwine" || c == "corollary1";
}

}  // namespace

ValidationResult validate(const Json& raw) {
  ValidationResult result;
  ExperimentConfig config;
  std::vector<std::string>& errors = result.errors;

  auto get_int = [&](const char* key, int fallback, int lo, int hi) {
    if (!raw.contains(key)) return fallback;
    if (!raw.at(key).is_number_integer()) {
      errors.push_back(std::string(key) + ": expected an integer");
      return fallback;
    }
    const int v = raw.at(key).get<int>();
    if (v < lo || v > hi)
      errors.push_back(std::string(key) + ": " + std::to_string(v) + " outside [" +
                       std::to_string(lo) + "," + std::to_string(hi) + "]");
    return v;
  };

  if (!raw.contains("command") || !raw.at("command").is_string()) {
    errors.push_back("command: required");
    return result;
  }
  config.command = raw.at("command").get<std::string>();
  if (!kCommands.count(config.command)) {
    errors.push_back("command: unknown '" + config.command + "'");
    return result;
  }

  if (raw.contains("mode")) {
    const std::string mode = raw.at("mode").get<std::string>();
    if (mode == "exact")
      config.mode = Mode::Exact;
    else if (mode == "float")
      config.mode = Mode::Float;
    else
      errors.push_back("mode: expected exact|float");
  }
  if (raw.contains("seed")) config.seed = raw.at("seed").get<std::uint64_t>();
  if (raw.contains("kernel")) config.kernel_path = raw.at("kernel").get<std::string>();

  config.size_limit = get_int("size_limit", 12, 1, 12);
  config.sweep_n = get_int("N", 20, 1, 10000);
  config.sweep_w = get_int("W", 2, 0, 4);
  if (raw.contains("sweeps")) {  // nested form of the two sweep bounds
    const auto& sweeps = raw.at("sweeps");
    if (sweeps.contains("N")) config.sweep_n = sweeps.at("N").get<int>();
    if (sweeps.contains("W")) config.sweep_w = sweeps.at("W").get<int>();
    if (config.sweep_n < 1 || config.sweep_n > 10000) errors.push_back("sweeps.N: out of range");
    if (config.sweep_w < 0 || config.sweep_w > 4) errors.push_back("sweeps.W: out of range");
  }
  config.window = get_int("window", 1, 0, 4);
  config.r = get_int("r", 1, 1, 8);
  config.min_block = get_int("min_block", 4, 2, 256);
  config.chain_length = get_int("length", 20000, 1, 10000000);
  config.block = get_int("block", 2, 1, 12);
  if (raw.contains("tol")) config.tol = raw.at("tol").get<double>();
  if (raw.contains("residual_cap")) config.residual_cap = raw.at("residual_cap").get<std::string>();

  if (raw.contains("p")) {
    for (const auto& entry : raw.at("p")) config.p.push_back(entry.get<std::string>());
  }
  if (config.command == "coupling") {
    if (config.p.size() < 2) {
      errors.push_back("p: coupling needs at least two marginal entries");
    } else {
      Rat total(0);
      bool parsed = true;
      for (const auto& lit : config.p) {
        try {
          const Rat v = parse_rational(lit);
          if (v < 0) errors.push_back("p: negative entry " + lit);
          total += v;
        } catch (const std::exception&) {
          errors.push_back("p: cannot parse '" + lit + "'");
          parsed = false;
        }
      }
      if (parsed && total != 1) errors.push_back("p: not a probability vector (sum != 1)");
    }
  }

  if (raw.contains("weights")) {
    config.weights.clear();
    for (const auto& entry : raw.at("weights")) config.weights.push_back(entry.get<std::string>());
    if (config.command == "mixing") config.symbolic_mixing = true;
  }
  if (raw.contains("alphabet") &&
      raw.at("alphabet").get<size_t>() != config.weights.size())
    errors.push_back("alphabet: does not match the number of weights");
  if (is_symbolic_command(config.command) || config.symbolic_mixing) {
    if (config.weights.size() < 2 || config.weights.size() > 4)
      errors.push_back("weights: symbolic commands need an alphabet of size 2..4");
    for (const auto& lit : config.weights) {
      try {
        if (parse_rational(lit) <= 0) errors.push_back("weights: entry not positive: " + lit);
      } catch (const std::exception&) {
        errors.push_back("weights: cannot parse '" + lit + "'");
      }
    }
  }

  if (errors.empty()) result.config = std::move(config);
  return result;
}

namespace {

template <typename S>
std::string fmt(const S& v) {
  return ScalarTraits<S>::format(v);
}

template <typename S>
std::vector<S> parse_vector(const std::vector<std::string>& literals) {
  std::vector<S> out;
  out.reserve(literals.size());
  for (const auto& lit : literals) out.push_back(ScalarTraits<S>::parse(lit));
  return out;
}

template <typename S>
Polymorphism<S> load_kernel(const ExperimentConfig& config) {
  if (config.kernel_path.empty()) {
    // bundled default: the symmetric two-state kernel with second eigenvalue 4/5
    const auto space = FiniteSpace<S>::uniform(2);
    Matrix<S> p{{ScalarTraits<S>::fraction(9, 10), ScalarTraits<S>::fraction(1, 10)},
                {ScalarTraits<S>::fraction(1, 10), ScalarTraits<S>::fraction(9, 10)}};
    return Polymorphism<S>::from_transitions(space, p);
  }
  std::ifstream in(config.kernel_path);
  if (!in) throw std::ios_base::failure("cannot open kernel file: " + config.kernel_path);
  Json j = Json::parse(in);
  return kernel_from_json<S>(j);
}

template <typename S>
std::vector<std::pair<std::string, Polymorphism<S>>> scan_kernels(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, Polymorphism<S>>> kernels;
  if (!config.kernel_path.empty()) {
    kernels.emplace_back(config.kernel_path, load_kernel<S>(config));
    return kernels;
  }
  const auto u2 = FiniteSpace<S>::uniform(2);
  const auto u4 = FiniteSpace<S>::uniform(4);
  kernels.emplace_back("identity_3", Polymorphism<S>::identity(FiniteSpace<S>::uniform(3)));
  kernels.emplace_back("theta_3", Polymorphism<S>::zero(FiniteSpace<S>::uniform(3)));
  kernels.emplace_back("swap_2", Polymorphism<S>::permutation(u2, {1, 0}));
  kernels.emplace_back("cycle_4", Polymorphism<S>::permutation(u4, {1, 2, 3, 0}));
  kernels.emplace_back(
      "block_theta_4",
      block_theta(u4, Partition::from_blocks(4, {{0, 1}, {2, 3}})));
  Rng rng(config.seed);
  auto corpus = scan_corpus<S>(rng, 5, 5);
  for (size_t i = 0; i < corpus.size(); ++i)
    kernels.emplace_back("random_" + std::to_string(i), std::move(corpus[i]));
  return kernels;
}

template <typename S>
std::string series_csv(const std::string& header, const std::vector<std::pair<long, S>>& rows) {
  std::ostringstream out;
  out << header << "\n";
  for (const auto& [n, v] : rows) out << n << "," << fmt(v) << "\n";
  return out.str();
}

template <typename S>
CylinderFunction<S> random_cylinder(Rng& rng, int alphabet, int wlo, int whi) {
  const int span = whi - wlo + 1;
  const int len = rng.next_int(1, std::min(3, span));
  const int lo = wlo + rng.next_int(0, span - len);
  long size = 1;
  for (int i = 0; i < len; ++i) size *= alphabet;
  std::vector<S> table(size);
  for (auto& v : table) v = ScalarTraits<S>::fraction(rng.next_int(-3, 3), rng.next_int(1, 2));
  return CylinderFunction<S>::from_table(alphabet, lo, lo + len - 1, std::move(table));
}

template <typename S>
CylinderFunction<S> alternating_site_function(int alphabet, int site) {
  std::vector<S> values(alphabet);
  for (int c = 0; c < alphabet; ++c)
    values[c] = (c % 2 == 0) ? ScalarTraits<S>::one() : -ScalarTraits<S>::one();
  return CylinderFunction<S>::single_site(alphabet, site, std::move(values));
}

template <typename S>
PerturbationSpec<S> build_spec(const ExperimentConfig& config) {
  auto system = SymbolicSystem<S>::with_weights(parse_vector<S>(config.weights));
  return PerturbationSpec<S>::build(system, config.r, config.min_block, BlockPolicy::Grow,
                                    ScalarTraits<S>::parse(config.residual_cap));
}

Json config_echo(const ExperimentConfig& config) {
  Json echo;
  echo["command"] = config.command;
  echo["mode"] = to_string(config.mode);
  echo["seed"] = config.seed;
  if (!config.kernel_path.empty()) echo["kernel"] = config.kernel_path;
  if (!config.p.empty()) echo["p"] = config.p;
  echo["weights"] = config.weights;
  echo["r"] = config.r;
  echo["min_block"] = config.min_block;
  echo["N"] = config.sweep_n;
  echo["W"] = config.sweep_w;
  echo["window"] = config.window;
  echo["size_limit"] = config.size_limit;
  echo["length"] = config.chain_length;
  echo["block"] = config.block;
  echo["tol"] = config.tol;
  return echo;
}

template <typename S>
ReportDocument run_impl(const ExperimentConfig& config) {
  ReportDocument report;
  report.body["version"] = kArtifactVersion;
  report.body["config"] = config_echo(config);
  Json& results = report.body["results"];

  if (config.command == "axioms") {
    Rng rng(config.seed);
    std::vector<std::pair<std::string, Polymorphism<S>>> kernels;
    if (config.kernel_path.empty()) {
      auto corpus = scan_corpus<S>(rng, 10, 6);
      for (size_t i = 0; i < corpus.size(); ++i)
        kernels.emplace_back("corpus_" + std::to_string(i), std::move(corpus[i]));
    } else {
      kernels.emplace_back(config.kernel_path, load_kernel<S>(config));
    }
    bool all_ok = true;
    results = Json::array();
    for (const auto& [name, kernel] : kernels) {
      const auto axioms = axioms_check(operator_of(kernel));
      all_ok = all_ok && axioms.all_ok();
      results.push_back(Json{{"kernel", name},
                             {"positive", axioms.positive},
                             {"unit_preserved", axioms.unit_preserved},
                             {"adjoint_unit_preserved", axioms.adjoint_unit_preserved},
                             {"norm_estimate", axioms.norm_estimate},
                             {"pass", axioms.all_ok()},
                             {"failure", axioms.failure}});
    }
    report.body["verdict"] = all_ok ? "pass" : "fail";
    report.exit_code = all_ok ? kExitOk : kExitContract;
    return report;
  }

  if (config.command == "coupling") {
    const auto p = parse_vector<S>(config.p);
    auto solved = solve_coupling(p);
    if (!solved.feasible()) {
      results["infeasible"] = true;
      results["violating_index"] = solved.violating_index;
      results["violating_mass"] = fmt(p[solved.violating_index]);
      report.body["verdict"] = "infeasible";
      report.exit_code = kExitInfeasible;
      return report;
    }
    const auto& coupling = *solved.coupling;
    bool zero_diag = true;
    for (int i = 0; i < coupling.size(); ++i)
      if (!ScalarTraits<S>::is_zero(coupling.q[i][i])) zero_diag = false;
    bool marginals_ok = true;
    for (int i = 0; i < coupling.size(); ++i) {
      S row = ScalarTraits<S>::zero(), col = ScalarTraits<S>::zero();
      for (int j = 0; j < coupling.size(); ++j) {
        row += coupling.q[i][j];
        col += coupling.q[j][i];
      }
      if (!approx_equal(row, p[i]) || !approx_equal(col, p[i])) marginals_ok = false;
    }
    results["q"] = matrix_to_json(coupling.q);
    results["diagnostics"] =
        Json{{"zero_diagonal", zero_diag}, {"marginals_exact", marginals_ok}};
    report.body["verdict"] = (zero_diag && marginals_ok) ? "pass" : "fail";
    report.exit_code = (zero_diag && marginals_ok) ? kExitOk : kExitContract;
    return report;
  }

  if (config.command == "scan-prime" || config.command == "scan-isometry") {
    const auto kernels = scan_kernels<S>(config);
    results = Json::array();
    bool agree = true;
    for (const auto& [name, kernel] : kernels) {
      if (kernel.size() > config.size_limit)
        throw SizeLimitError("kernel '" + name + "' exceeds size_limit");
      const auto primality = is_prime(kernel, config.size_limit);
      Json entry{{"kernel", name}, {"prime", primality.prime}};
      if (primality.witness) entry["witness"] = partition_to_json(*primality.witness);
      if (config.command == "scan-isometry") {
        const auto scan = isometric_subalgebra_scan(operator_of(kernel), config.size_limit);
        entry["totally_nonisometric"] = scan.totally_nonisometric;
        if (scan.witness) entry["isometry_witness"] = partition_to_json(*scan.witness);
        if (scan.totally_nonisometric != primality.prime) agree = false;
        entry["agrees_with_primality"] = scan.totally_nonisometric == primality.prime;
      }
      results.push_back(std::move(entry));
    }
    if (config.command == "scan-isometry") {
      report.body["verdict"] = agree ? "pass" : "fail";
      report.exit_code = agree ? kExitOk : kExitContract;
    } else {
      report.body["verdict"] = "report";
    }
    return report;
  }

  if (config.command == "mixing" && config.symbolic_mixing) {
    // pi-pairing decay scan on the shift-space perturbation
    const auto spec = build_spec<S>(config);
    Rng rng(config.seed);
    const int a = spec.system().alphabet;
    std::vector<std::pair<CylinderFunction<S>, CylinderFunction<S>>> pairs;
    pairs.emplace_back(alternating_site_function<S>(a, 0), alternating_site_function<S>(a, 0));
    pairs.emplace_back(random_cylinder<S>(rng, a, -config.sweep_w, config.sweep_w),
                       random_cylinder<S>(rng, a, -config.sweep_w, config.sweep_w));
    results = Json::array();
    for (size_t i = 0; i < pairs.size(); ++i) {
      const auto& [f, g] = pairs[i];
      const auto series = pi_pairing_series(f, g, spec, config.sweep_n);
      std::vector<std::pair<long, S>> rows;
      for (size_t n = 0; n < series.size(); ++n) rows.emplace_back(static_cast<long>(n), series[n]);
      const std::string csv_name = "pi_pairing_pair" + std::to_string(i) + ".csv";
      report.series.emplace_back(csv_name, series_csv("n,pairing", rows));
      double tail = 0.0;
      for (size_t n = series.size() > 10 ? series.size() - 10 : 0; n < series.size(); ++n)
        tail = std::max(tail, std::fabs(ScalarTraits<S>::to_double(series[n])));
      results.push_back(Json{{"pair", i},
                             {"initial", fmt(series.front())},
                             {"final", fmt(series.back())},
                             {"tail_max_abs", tail},
                             {"series", csv_name}});
    }
    if (!spec.warnings().empty()) report.body["warnings"] = spec.warnings();
    report.body["verdict"] = "report";
    return report;
  }

  if (config.command == "mixing") {
    const auto kernel = load_kernel<S>(config);
    const auto mixing = mixing_report(kernel, config.sweep_n, config.tol);
    std::vector<std::pair<long, S>> rows;
    for (size_t i = 0; i < mixing.distances.size(); ++i)
      rows.emplace_back(static_cast<long>(i + 1), mixing.distances[i]);
    report.series.emplace_back("mixing_distances.csv", series_csv("n,distance", rows));
    results["is_mixing"] = mixing.is_mixing;
    results["rate"] = mixing.rate;
    results["final_distance"] = fmt(mixing.distances.back());
    results["series"] = "mixing_distances.csv";
    report.body["verdict"] = "report";
    return report;
  }

  if (config.command == "limits") {
    const auto spec = build_spec<S>(config);
    Rng rng(config.seed);
    const int a = spec.system().alphabet;
    std::vector<std::pair<CylinderFunction<S>, CylinderFunction<S>>> pairs;
    pairs.emplace_back(alternating_site_function<S>(a, 0), alternating_site_function<S>(a, 0));
    for (int i = 0; i < 3; ++i)
      pairs.emplace_back(random_cylinder<S>(rng, a, -config.sweep_w, config.sweep_w),
                         random_cylinder<S>(rng, a, -config.sweep_w, config.sweep_w));
    results = Json::array();
    bool stabilization_ok = true;
    for (size_t i = 0; i < pairs.size(); ++i) {
      const auto& [f, g] = pairs[i];
      const auto lam = lambda_pairing(f, g, spec, config.sweep_n);
      const auto gam = gamma_pairing(f, g, spec, config.sweep_n);
      const int bound = config.sweep_w + spec.width() + 1;
      if (lam.stabilized_at > bound || gam.stabilized_at > bound) stabilization_ok = false;
      std::vector<std::pair<long, S>> rows;
      for (size_t n = 0; n < lam.series.size(); ++n)
        rows.emplace_back(static_cast<long>(n), lam.series[n]);
      const std::string csv_name = "limits_pair" + std::to_string(i) + ".csv";
      report.series.emplace_back(csv_name, series_csv("n,lambda_pairing", rows));
      results.push_back(Json{{"pair", i},
                             {"lambda_value", fmt(lam.value)},
                             {"lambda_stabilized_at", lam.stabilized_at},
                             {"gamma_value", fmt(gam.value)},
                             {"gamma_stabilized_at", gam.stabilized_at},
                             {"series", csv_name}});
    }
    if (!spec.warnings().empty()) report.body["warnings"] = spec.warnings();
    report.body["verdict"] = stabilization_ok ? "pass" : "fail";
    report.exit_code = stabilization_ok ? kExitOk : kExitContract;
    return report;
  }

  if (config.command == "intertwine") {
    const auto spec = build_spec<S>(config);
    Rng rng(config.seed);
    const int a = spec.system().alphabet;
    bool all_zero = true;
    double max_residual = 0.0;
    std::vector<std::pair<long, S>> rows;
    for (int pair = 0; pair < 3; ++pair) {
      const auto f = random_cylinder<S>(rng, a, -config.sweep_w, config.sweep_w);
      const auto g = random_cylinder<S>(rng, a, -config.sweep_w, config.sweep_w);
      for (int n = 0; n <= config.sweep_n; ++n) {
        const auto residuals = intertwining_pairing_check(f, g, spec, n);
        const double lam = std::fabs(ScalarTraits<S>::to_double(residuals.lambda_residual));
        const double gam = std::fabs(ScalarTraits<S>::to_double(residuals.gamma_residual));
        max_residual = std::max({max_residual, lam, gam});
        if (!ScalarTraits<S>::is_zero(residuals.lambda_residual) ||
            !ScalarTraits<S>::is_zero(residuals.gamma_residual))
          all_zero = false;
        if (pair == 0) rows.emplace_back(n, residuals.lambda_residual);
      }
    }
    report.series.emplace_back("intertwine_residuals.csv", series_csv("n,lambda_residual", rows));
    results["max_abs_residual"] = max_residual;
    results["all_residuals_zero"] = all_zero;
    results["series"] = "intertwine_residuals.csv";
    if (!spec.warnings().empty()) report.body["warnings"] = spec.warnings();
    report.body["verdict"] = all_zero ? "pass" : "fail";
    report.exit_code = all_zero ? kExitOk : kExitContract;
    return report;
  }

  if (config.command == "corollary1") {
    const auto spec = build_spec<S>(config);
    const int a = spec.system().alphabet;
    const auto f = alternating_site_function<S>(a, 0);
    const auto g = alternating_site_function<S>(a, 0);
    bool outside_zero = true;
    std::vector<std::pair<long, S>> rows;
    for (int k = -config.sweep_n; k <= config.sweep_n; ++k) {
      const S residual = phi_k_identity_check(f, g, spec, k);
      rows.emplace_back(k, residual);
      const bool misses = (spec.window_lo() + k > std::max(f.hi(), g.hi())) ||
                          (spec.window_hi() + k < std::min(f.lo(), g.lo()));
      if (misses && !ScalarTraits<S>::is_zero(residual)) outside_zero = false;
    }
    report.series.emplace_back("corollary1_residuals.csv", series_csv("k,residual", rows));
    results["outside_window_zero"] = outside_zero;
    results["series"] = "corollary1_residuals.csv";
    report.body["verdict"] = outside_zero ? "pass" : "fail";
    report.exit_code = outside_zero ? kExitOk : kExitContract;
    return report;
  }

  if (config.command == "chain") {
    const auto kernel = load_kernel<S>(config);
    const auto chain = sample_markov_chain(kernel, config.chain_length, config.seed);
    std::ostringstream csv;
    csv << "step,state\n";
    for (size_t i = 0; i < chain.size(); ++i) csv << i << "," << chain[i] << "\n";
    report.series.emplace_back("chain.csv", csv.str());
    results["length"] = config.chain_length;
    results["block"] = config.block;
    results["entropy_rate_estimate"] = entropy_rate_estimate(chain, config.block);
    results["series"] = "chain.csv";
    report.body["verdict"] = "report";
    return report;
  }

  throw std::invalid_argument("unknown command: " + config.command);
}

}  // namespace

ReportDocument run(const ExperimentConfig& config) {
  try {
    return config.mode == Mode::Exact ? run_impl<Rat>(config) : run_impl<double>(config);
  } catch (const std::ios_base::failure& err) {
    ReportDocument report;
    report.body["error"] = err.what();
    report.exit_code = kExitIo;
    return report;
  } catch (const std::exception& err) {
    ReportDocument report;
    report.body["error"] = err.what();
    report.exit_code = kExitInfeasible;
    return report;
  }
}

}  // namespace bistoch
