#include <doctest.h>

#include "bistoch/coupling.hpp"
#include "bistoch/random_kernels.hpp"
#include "oracles.hpp"

using namespace bistoch;

namespace {

template <typename S>
void check_coupling_invariants(const CouplingMatrix<S>& c) {
  const int k = c.size();
  for (int i = 0; i < k; ++i) {
    CHECK(ScalarTraits<S>::is_zero(c.q[i][i]));
    S row = ScalarTraits<S>::zero(), col = ScalarTraits<S>::zero();
    for (int j = 0; j < k; ++j) {
      CHECK(c.q[i][j] >= ScalarTraits<S>::zero());
      row += c.q[i][j];
      col += c.q[j][i];
    }
    CHECK(approx_equal(row, c.p[i]));
    CHECK(approx_equal(col, c.p[i]));
  }
}

std::vector<Rat> random_probability_vector(Rng& rng, int len) {
  std::vector<long> raw(len);
  long total = 0;
  for (auto& v : raw) {
    v = rng.next_int(0, 6);
    total += v;
  }
  if (total == 0) {
    raw[0] = raw[1] = 1;
    total = 2;
  }
  std::vector<Rat> p(len);
  for (int i = 0; i < len; ++i) p[i] = ScalarTraits<Rat>::fraction(raw[i], total);
  return p;
}

}  // namespace

TEST_CASE("feasibility boundary is max p <= 1/2") {
  CHECK(feasibility_check(std::vector<Rat>{Rat(1, 4), Rat(1, 4), Rat(1, 4), Rat(1, 4)}));
  CHECK_FALSE(feasibility_check(std::vector<Rat>{Rat(3, 5), Rat(1, 5), Rat(1, 10), Rat(1, 10)}));
  CHECK(feasibility_check(std::vector<Rat>{Rat(1, 2), Rat(3, 10), Rat(1, 10), Rat(1, 10)}));
  CHECK(feasibility_check(std::vector<Rat>{Rat(1, 2), Rat(1, 2)}));
  CHECK_THROWS_AS(feasibility_check(std::vector<Rat>{Rat(1, 2), Rat(1, 4)}), std::invalid_argument);
  CHECK_THROWS_AS(feasibility_check(std::vector<Rat>{Rat(1)}), std::invalid_argument);
}

TEST_CASE("uniform vectors take the symmetric-seed path") {
  const auto solved = solve_coupling(std::vector<Rat>{Rat(1, 4), Rat(1, 4), Rat(1, 4), Rat(1, 4)});
  REQUIRE(solved.feasible());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(solved.coupling->q[i][j] == (i == j ? Rat(0) : Rat(1, 12)));
}

TEST_CASE("the two-point coupling is forced") {
  const auto solved = solve_coupling(std::vector<Rat>{Rat(1, 2), Rat(1, 2)});
  REQUIRE(solved.feasible());
  CHECK(solved.coupling->q == Matrix<Rat>{{Rat(0), Rat(1, 2)}, {Rat(1, 2), Rat(0)}});
}

TEST_CASE("solver output passes exact invariant checks") {
  const auto solved =
      solve_coupling(std::vector<Rat>{Rat(2, 5), Rat(3, 10), Rat(1, 5), Rat(1, 10)});
  REQUIRE(solved.feasible());
  check_coupling_invariants(*solved.coupling);
}

TEST_CASE("infeasible vectors report the violating index") {
  const auto solved =
      solve_coupling(std::vector<Rat>{Rat(1, 5), Rat(3, 5), Rat(1, 10), Rat(1, 10)});
  CHECK_FALSE(solved.feasible());
  CHECK(solved.violating_index == 1);
}

TEST_CASE("solver agrees with the brute-force cut oracle") {
  Rng rng(404);
  int feasible_count = 0;
  for (int round = 0; round < 200; ++round) {
    const int len = rng.next_int(2, 8);
    const auto p = random_probability_vector(rng, len);
    const bool expected = oracles::zero_diagonal_feasible_by_cuts(p);
    CHECK(feasibility_check(p) == expected);
    const auto solved = solve_coupling(p);
    CHECK(solved.feasible() == expected);
    if (solved.feasible()) {
      ++feasible_count;
      check_coupling_invariants(*solved.coupling);
    }
  }
  CHECK(feasible_count > 20);  // the sweep exercises both outcomes
}

TEST_CASE("solver is deterministic") {
  const std::vector<Rat> p{Rat(9, 20), Rat(1, 4), Rat(1, 5), Rat(1, 10)};
  const auto a = solve_coupling(p);
  const auto b = solve_coupling(p);
  REQUIRE(a.feasible());
  CHECK(a.coupling->q == b.coupling->q);
}

TEST_CASE("float mode stays within tolerance") {
  const std::vector<double> p{0.45, 0.25, 0.2, 0.1};
  const auto solved = solve_coupling(p);
  REQUIRE(solved.feasible());
  check_coupling_invariants(*solved.coupling);
}

TEST_CASE("block builder groups and solves") {
  // uniform binary: one block, no residual
  const auto binary = block_builder(std::vector<Rat>{Rat(1, 2), Rat(1, 2)}, 2);
  REQUIRE(binary.blocks.size() == 1);
  CHECK(binary.blocks[0].members == std::vector<int>{0, 1});
  CHECK(binary.residual.empty());
  CHECK(binary.residual_mass == 0);

  // Bernoulli-(4/5) pairs: infeasible as one block, everything residual
  const auto skew = block_builder(
      std::vector<Rat>{Rat(16, 25), Rat(4, 25), Rat(4, 25), Rat(1, 25)}, 4, BlockPolicy::Grow);
  CHECK(skew.blocks.empty());
  CHECK(skew.residual == std::vector<int>{0, 1, 2, 3});
  CHECK(skew.residual_mass == 1);
  CHECK(skew.grow_requested);

  // the default construction: single block of all four letters
  const auto biased =
      block_builder(std::vector<Rat>{Rat(2, 5), Rat(3, 10), Rat(1, 5), Rat(1, 10)}, 4);
  REQUIRE(biased.blocks.size() == 1);
  CHECK(biased.blocks[0].members == std::vector<int>{0, 1, 2, 3});
  CHECK(biased.residual.empty());
  check_coupling_invariants(biased.blocks[0].coupling);
}

TEST_CASE("block builder residual mass never grows as min_block shrinks") {
  Rng rng(512);
  for (int round = 0; round < 60; ++round) {
    const int len = rng.next_int(2, 9);
    std::vector<Rat> weights(len);
    for (auto& w : weights) w = Rat(rng.next_int(1, 9), 10);
    Rat previous(-1);
    for (int mb : {6, 5, 4, 3, 2}) {  // decreasing min_block
      const auto system = block_builder(weights, mb);
      if (previous >= 0) CHECK(system.residual_mass <= previous);
      previous = system.residual_mass;
      for (const auto& block : system.blocks) {
        CHECK(block.members.size() >= 2);
        check_coupling_invariants(block.coupling);
      }
    }
  }
}
