#include <doctest.h>

#include "bistoch/finite_space.hpp"
#include "bistoch/partition.hpp"
#include "oracles.hpp"

using namespace bistoch;

TEST_CASE("partition canonical form and classify") {
  const auto p = Partition::from_blocks(4, {{3, 2}, {0}, {1}});
  CHECK(p.blocks() == std::vector<std::vector<int>>{{0}, {1}, {2, 3}});
  CHECK(p.classify() == Partition::Kind::Proper);
  CHECK(Partition::trivial(4).classify() == Partition::Kind::Trivial);
  CHECK(Partition::discrete(4).classify() == Partition::Kind::Discrete);
  CHECK(Partition::trivial(1).is_discrete());  // n=1: trivial and discrete coincide

  CHECK_THROWS_AS(Partition::from_blocks(3, {{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Partition::from_blocks(3, {{0, 1}, {1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(Partition::from_blocks(3, {{0, 1, 2}, {}}), std::invalid_argument);
}

TEST_CASE("enumeration counts match the Bell-triangle oracle") {
  const auto bell = oracles::bell_numbers(8);
  CHECK(enumerate_partitions(1).size() == 1);
  CHECK(enumerate_partitions(3).size() == 5);
  CHECK(enumerate_partitions(5).size() == 52);
  for (int n = 1; n <= 8; ++n) CHECK(enumerate_partitions(n).size() == bell[n]);
}

TEST_CASE("enumeration is deterministic, capped, and guarded") {
  const auto first = enumerate_partitions(4);
  const auto second = enumerate_partitions(4);
  CHECK(first.size() == second.size());
  for (size_t i = 0; i < first.size(); ++i) CHECK(first[i] == second[i]);
  CHECK(first.front().is_trivial());
  CHECK(first.back().is_discrete());

  CHECK(enumerate_partitions(13, 10).size() == 10);
  CHECK_THROWS_AS(enumerate_partitions(13), SizeLimitError);

  // no duplicates
  for (size_t i = 0; i < first.size(); ++i)
    for (size_t j = i + 1; j < first.size(); ++j) CHECK_FALSE(first[i] == first[j]);
}

TEST_CASE("join is the common refinement") {
  const auto p = Partition::from_blocks(4, {{0, 1}, {2, 3}});
  const auto q = Partition::from_blocks(4, {{0, 2}, {1, 3}});
  CHECK(join(p, Partition::trivial(4)) == p);
  CHECK(join(p, Partition::discrete(4)) == Partition::discrete(4));
  CHECK(join(p, q) == Partition::discrete(4));
  CHECK_THROWS_AS(join(p, Partition::trivial(3)), std::invalid_argument);
}

TEST_CASE("meet is the transitive closure of overlap") {
  const auto p = Partition::from_blocks(4, {{0, 1}, {2}, {3}});
  const auto q = Partition::from_blocks(4, {{1, 2}, {0}, {3}});
  CHECK(meet(p, Partition::discrete(4)) == p);
  CHECK(meet(p, Partition::trivial(4)) == Partition::trivial(4));
  CHECK(meet(p, q) == Partition::from_blocks(4, {{0, 1, 2}, {3}}));
}

TEST_CASE("meet and join sit on the right sides of the refinement order") {
  const auto all = enumerate_partitions(5);
  // sample pairs deterministically
  for (size_t i = 0; i < all.size(); i += 7)
    for (size_t j = 0; j < all.size(); j += 11) {
      const auto& p = all[i];
      const auto& q = all[j];
      const auto m = meet(p, q);
      const auto v = join(p, q);
      CHECK(m.coarser_than(p));
      CHECK(m.coarser_than(q));
      CHECK(p.coarser_than(v));
      CHECK(q.coarser_than(v));
    }
}

TEST_CASE("conditional weights renormalize a block") {
  const auto uniform = FiniteSpace<Rat>::uniform(8);
  CHECK(conditional_weights(uniform, {1, 3, 5, 7}) ==
        std::vector<Rat>{Rat(1, 4), Rat(1, 4), Rat(1, 4), Rat(1, 4)});

  const auto biased = FiniteSpace<Rat>::from_weights({Rat(2, 5), Rat(3, 10), Rat(1, 5), Rat(1, 10)});
  CHECK(conditional_weights(biased, {0, 1}) == std::vector<Rat>{Rat(4, 7), Rat(3, 7)});
  CHECK(conditional_weights(biased, {2}) == std::vector<Rat>{Rat(1)});
  CHECK_THROWS_AS(conditional_weights(biased, {}), std::invalid_argument);

  // exact normalization over every block of every partition of a small space
  for (const auto& partition : enumerate_partitions(5)) {
    const auto space = FiniteSpace<Rat>::from_weights(
        {Rat(1, 5), Rat(1, 5), Rat(1, 5), Rat(1, 5), Rat(1, 5)});
    for (const auto& block : partition.blocks()) {
      Rat total(0);
      for (const auto& w : conditional_weights(space, block)) total += w;
      CHECK(total == 1);
    }
  }
}

TEST_CASE("finite space validation") {
  CHECK_THROWS_AS(FiniteSpace<Rat>::from_weights({Rat(1, 2), Rat(1, 4)}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteSpace<Rat>::from_weights({Rat(3, 2), Rat(-1, 2)}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteSpace<Rat>::from_weights({}), std::invalid_argument);
  const auto space = FiniteSpace<double>::from_weights({0.6, 0.4});
  CHECK(space.weight(0) == 0.6);
}
