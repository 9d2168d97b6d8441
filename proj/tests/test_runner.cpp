#include <doctest.h>

#include "bistoch/runner.hpp"

using namespace bistoch;

TEST_CASE("validate fills defaults") {
  const auto result = validate(Json{{"command", "axioms"}});
  REQUIRE(result.ok());
  CHECK(result.config->mode == Mode::Exact);
  CHECK(result.config->seed == 0);
  CHECK(result.config->size_limit == 12);
  CHECK(result.config->sweep_n == 20);
}

TEST_CASE("validate names violated guards") {
  const auto oversize = validate(Json{{"command", "scan-prime"}, {"size_limit", 20}});
  REQUIRE_FALSE(oversize.ok());
  CHECK(oversize.errors[0].find("size_limit") != std::string::npos);

  const auto leaky =
      validate(Json{{"command", "coupling"}, {"p", {"0.6", "0.2", "0.1"}}});
  REQUIRE_FALSE(leaky.ok());
  CHECK(leaky.errors[0].find("not a probability vector") != std::string::npos);

  const auto unknown = validate(Json{{"command", "everything"}});
  REQUIRE_FALSE(unknown.ok());

  const auto wide_window = validate(Json{{"command", "limits"}, {"W", 9}});
  REQUIRE_FALSE(wide_window.ok());

  const auto big_alphabet = validate(
      Json{{"command", "limits"}, {"weights", {"1/5", "1/5", "1/5", "1/5", "1/5"}}});
  REQUIRE_FALSE(big_alphabet.ok());
}

TEST_CASE("run: axioms on the bundled corpus passes") {
  auto config = *validate(Json{{"command", "axioms"}}).config;
  const auto report = run(config);
  CHECK(report.exit_code == kExitOk);
  CHECK(report.body.at("verdict") == "pass");
}

TEST_CASE("run: infeasible coupling exits 2") {
  auto config =
      *validate(Json{{"command", "coupling"}, {"p", {"0.6", "0.2", "0.1", "0.1"}}}).config;
  const auto report = run(config);
  CHECK(report.exit_code == kExitInfeasible);
  CHECK(report.body.at("results").at("infeasible") == true);
  CHECK(report.body.at("results").at("violating_index") == 0);
}

TEST_CASE("run: coupling emits exact q") {
  auto config =
      *validate(Json{{"command", "coupling"}, {"p", {"2/5", "3/10", "1/5", "1/10"}}}).config;
  const auto report = run(config);
  CHECK(report.exit_code == kExitOk);
  CHECK(report.body.at("results").at("diagnostics").at("zero_diagonal") == true);
  CHECK(report.body.at("results").at("diagnostics").at("marginals_exact") == true);
}

TEST_CASE("run: intertwine residuals are literally zero in exact mode") {
  auto config = *validate(Json{{"command", "intertwine"}, {"N", 15}}).config;
  const auto report = run(config);
  CHECK(report.exit_code == kExitOk);
  CHECK(report.body.at("results").at("all_residuals_zero") == true);
  CHECK(report.body.at("results").at("max_abs_residual") == 0.0);
}

TEST_CASE("run: scan-isometry agrees with primality") {
  auto config = *validate(Json{{"command", "scan-isometry"}, {"size_limit", 6}}).config;
  const auto report = run(config);
  CHECK(report.exit_code == kExitOk);
  CHECK(report.body.at("verdict") == "pass");
}

TEST_CASE("runs are byte-stable for a fixed config and seed") {
  for (const char* command : {"axioms", "mixing", "limits", "corollary1", "chain"}) {
    auto config = *validate(Json{{"command", command}, {"seed", 42}, {"N", 10}}).config;
    if (std::string(command) == "chain") config.chain_length = 2000;
    const auto first = run(config);
    const auto second = run(config);
    CHECK(first.to_string() == second.to_string());
    REQUIRE(first.series.size() == second.series.size());
    for (size_t i = 0; i < first.series.size(); ++i) {
      CHECK(first.series[i].first == second.series[i].first);
      CHECK(first.series[i].second == second.series[i].second);
    }
  }
}

TEST_CASE("validate accepts the nested sweeps form") {
  const auto result =
      validate(Json{{"command", "limits"}, {"alphabet", 4}, {"sweeps", {{"W", 3}, {"N", 12}}}});
  REQUIRE(result.ok());
  CHECK(result.config->sweep_w == 3);
  CHECK(result.config->sweep_n == 12);

  const auto clash = validate(Json{{"command", "limits"}, {"alphabet", 3}});
  REQUIRE_FALSE(clash.ok());
}

TEST_CASE("run: mixing with site weights switches to the pi-pairing scan") {
  auto config = *validate(Json{{"command", "mixing"},
                               {"weights", {"1/4", "1/4", "1/4", "1/4"}},
                               {"N", 12}})
                     .config;
  REQUIRE(config.symbolic_mixing);
  const auto report = run(config);
  CHECK(report.exit_code == kExitOk);
  REQUIRE(!report.series.empty());
  CHECK(report.series[0].first == "pi_pairing_pair0.csv");
  // mean-zero single-site observables decorrelate immediately at this scale
  const auto& results = report.body.at("results");
  CHECK(results.at(0).at("initial") == "1");
  CHECK(results.at(0).at("final") == "0");
}

TEST_CASE("run: float mode intertwine stays within tolerance") {
  auto config = *validate(Json{{"command", "intertwine"}, {"mode", "float"}, {"N", 12}}).config;
  const auto report = run(config);
  CHECK(report.exit_code == kExitOk);
  CHECK(report.body.at("results").at("max_abs_residual").get<double>() <= 1e-12);
}

TEST_CASE("run: missing kernel file exits 3") {
  auto config = *validate(Json{{"command", "mixing"}, {"kernel", "/nonexistent/k.json"}}).config;
  const auto report = run(config);
  CHECK(report.exit_code == kExitIo);
}
