#include <doctest.h>

#include "bistoch/symbolic.hpp"
#include "bistoch/random_kernels.hpp"
#include "oracles.hpp"

using namespace bistoch;

namespace {

SymbolicSystem<Rat> uniform4() { return SymbolicSystem<Rat>::uniform(4); }

SymbolicSystem<Rat> biased4() {
  return SymbolicSystem<Rat>::with_weights({Rat(2, 5), Rat(3, 10), Rat(1, 5), Rat(1, 10)});
}

PerturbationSpec<Rat> uniform_spec() { return PerturbationSpec<Rat>::build(uniform4(), 1, 4); }

PerturbationSpec<Rat> biased_spec() { return PerturbationSpec<Rat>::build(biased4(), 1, 4); }

PerturbationSpec<Rat> binary_spec() {
  return PerturbationSpec<Rat>::build(SymbolicSystem<Rat>::uniform(2), 1, 2);
}

CylinderFunction<Rat> alternating(int site) {
  return CylinderFunction<Rat>::single_site(4, site, {Rat(1), Rat(-1), Rat(1), Rat(-1)});
}

CylinderFunction<Rat> random_cylinder(Rng& rng, int alphabet, int wlo, int whi) {
  const int span = whi - wlo + 1;
  const int len = rng.next_int(1, std::min(3, span));
  const int lo = wlo + rng.next_int(0, span - len);
  long size = 1;
  for (int i = 0; i < len; ++i) size *= alphabet;
  std::vector<Rat> table(size);
  for (auto& v : table) v = ScalarTraits<Rat>::fraction(rng.next_int(-3, 3), rng.next_int(1, 2));
  return CylinderFunction<Rat>::from_table(alphabet, lo, lo + len - 1, std::move(table));
}

}  // namespace

TEST_CASE("cylinder functions canonicalize") {
  // index bit 2 is the letter at site 0, so the window collapses to [0,0]
  std::vector<Rat> table(16);
  for (int i = 0; i < 16; ++i) table[i] = Rat((i / 4) % 2 == 0 ? 1 : -1);
  const auto f = CylinderFunction<Rat>::from_table(2, -1, 2, std::move(table));
  CHECK(f.lo() == 0);
  CHECK(f.hi() == 0);
  CHECK(f.table() == std::vector<Rat>{Rat(1), Rat(-1)});

  const auto c = CylinderFunction<Rat>::from_table(3, 0, 1, std::vector<Rat>(9, Rat(5)));
  CHECK(c.is_constant());
  CHECK(c.value_at(0) == 5);

  CHECK_THROWS_AS(CylinderFunction<Rat>::from_table(2, 0, 1, {Rat(1)}), std::invalid_argument);
}

TEST_CASE("shift translates windows by -k") {
  const auto f = alternating(0);
  CHECK(shift_apply(f, 0) == f);
  const auto shifted = shift_apply(f, 1);
  CHECK(shifted.lo() == -1);
  CHECK(shifted.hi() == -1);
  CHECK(shifted.table() == f.table());
  CHECK(shift_apply(shift_apply(f, 3), -3) == f);
  CHECK(shift_apply(CylinderFunction<Rat>::constant(4, Rat(2)), 5).is_constant());
}

TEST_CASE("mean and inner product") {
  const auto sys = biased4();
  const auto f = alternating(0);
  // E[s] = 2/5 - 3/10 + 1/5 - 1/10 = 1/5
  CHECK(mean(sys, f) == Rat(1, 5));
  CHECK(inner_product(sys, f, f) == 1);
  // disjoint windows factorize
  const auto far = alternating(9);
  CHECK(inner_product(sys, f, far) == Rat(1, 5) * Rat(1, 5));
  const auto c = CylinderFunction<Rat>::constant(4, Rat(3));
  CHECK(inner_product(sys, c, f) == Rat(3, 5));
}

TEST_CASE("perturbation builder: default four-letter block") {
  const auto spec = uniform_spec();
  CHECK(spec.width() == 1);
  REQUIRE(spec.blocks().blocks.size() == 1);
  CHECK(spec.blocks().blocks[0].members == std::vector<int>{0, 1, 2, 3});
  CHECK(spec.blocks().residual.empty());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(spec.blocks().blocks[0].coupling.q[i][j] == (i == j ? Rat(0) : Rat(1, 12)));
}

TEST_CASE("perturbation builder widens the window until a coupling exists") {
  const auto sys = SymbolicSystem<Rat>::with_weights({Rat(4, 5), Rat(1, 5)});
  const auto spec = PerturbationSpec<Rat>::build(sys, 1, 4, BlockPolicy::Grow);
  // max word weight (4/5)^r crosses 1/2 at r = 4
  CHECK(spec.width() == 4);
  CHECK(spec.blocks().residual.empty());
}

TEST_CASE("phi_apply on the uniform four-letter block") {
  const auto spec = uniform_spec();
  const auto s = alternating(0);
  const auto image = phi_apply(s, spec, 0);
  CHECK(image.lo() == 0);
  CHECK(image.hi() == 0);
  CHECK(image.table() == std::vector<Rat>{Rat(-1, 3), Rat(1, 3), Rat(-1, 3), Rat(1, 3)});

  // disjoint translate leaves the function untouched
  CHECK(phi_apply(s, spec, 5) == s);
  CHECK(phi_apply(s, spec, -1) == s);
  // constants are fixed: V1 = 1
  const auto c = CylinderFunction<Rat>::constant(4, Rat(7));
  CHECK(phi_apply(c, spec, 0) == c);
}

TEST_CASE("phi preserves the mean and contracts the norm") {
  Rng rng(23);
  for (const auto& spec : {uniform_spec(), biased_spec()}) {
    for (int round = 0; round < 10; ++round) {
      const auto f = random_cylinder(rng, 4, -2, 2);
      for (int k : {-1, 0, 1, 2}) {
        const auto image = phi_apply(f, spec, k);
        CHECK(mean(spec.system(), image) == mean(spec.system(), f));
        CHECK(weighted_norm_squared(spec.system(), image) <=
              weighted_norm_squared(spec.system(), f));
        const auto co = phi_adjoint_apply(f, spec, k);
        CHECK(mean(spec.system(), co) == mean(spec.system(), f));
      }
    }
  }
}

TEST_CASE("phi_adjoint_apply is the inner-product adjoint") {
  // uniform blocks carry symmetric couplings: self-adjoint
  const auto spec = uniform_spec();
  const auto s = alternating(0);
  CHECK(phi_adjoint_apply(s, spec, 0) == phi_apply(s, spec, 0));
  CHECK(phi_adjoint_apply(s, spec, 3) == s);

  // biased coupling is not symmetric; verify <V f, g> = <f, V* g> exactly
  const auto bspec = biased_spec();
  Rng rng(37);
  for (int round = 0; round < 20; ++round) {
    const auto f = random_cylinder(rng, 4, -2, 2);
    const auto g = random_cylinder(rng, 4, -2, 2);
    for (int k : {-2, 0, 1}) {
      CHECK(inner_product(bspec.system(), phi_apply(f, bspec, k), g) ==
            inner_product(bspec.system(), f, phi_adjoint_apply(g, bspec, k)));
    }
  }
}

TEST_CASE("lambda pairing stabilizes to the limit correlation") {
  const auto spec = uniform_spec();
  const auto s = alternating(0);
  const auto base = lambda_pairing(s, s, spec, 0);
  CHECK(base.value == 1);  // empty product pairs f against g

  const auto report = lambda_pairing(s, s, spec, 12);
  CHECK(report.value == Rat(-1, 3));
  CHECK(report.stabilized_at == 1);
  for (size_t n = 1; n < report.series.size(); ++n) CHECK(report.series[n] == Rat(-1, 3));

  // functions on negative coordinates never meet the product
  const auto left = alternating(-3);
  const auto untouched = lambda_pairing(left, left, spec, 8);
  CHECK(untouched.value == 1);
  CHECK(untouched.stabilized_at == 0);
}

TEST_CASE("gamma pairing mirrors on negative sites") {
  const auto spec = uniform_spec();
  const auto s = alternating(-1);
  const auto base = gamma_pairing(s, s, spec, 0);
  CHECK(base.value == 1);
  const auto report = gamma_pairing(s, s, spec, 12);
  CHECK(report.value == Rat(-1, 3));
  CHECK(report.stabilized_at == 1);

  // functions on strictly positive coordinates are untouched
  const auto right = alternating(2);
  CHECK(gamma_pairing(right, right, spec, 10).value == 1);
}

TEST_CASE("lambda stabilization bound holds across windows") {
  Rng rng(41);
  for (const auto& spec : {uniform_spec(), biased_spec(), binary_spec()}) {
    const int a = spec.system().alphabet;
    for (int w = 0; w <= 4; ++w) {
      for (int round = 0; round < 4; ++round) {
        const auto f = random_cylinder(rng, a, -w, w);
        const auto g = random_cylinder(rng, a, -w, w);
        const int bound = w + spec.width() + 1;
        const auto lam = lambda_pairing(f, g, spec, bound + 4);
        CHECK(lam.stabilized_at <= bound);
        for (size_t n = bound; n < lam.series.size(); ++n) CHECK(lam.series[n] == lam.value);
        const auto gam = gamma_pairing(f, g, spec, bound + 4);
        CHECK(gam.stabilized_at <= bound);
      }
    }
  }
}

TEST_CASE("pi pairing decorrelates mean-zero observables") {
  const auto spec = uniform_spec();
  const auto s = alternating(0);
  CHECK(pi_pairing(s, s, spec, 0) == 1);
  const auto series = pi_pairing_series(s, s, spec, 10);
  for (int n = 1; n <= 10; ++n) CHECK(series[n] == 0);

  const auto c = CylinderFunction<Rat>::constant(4, Rat(1));
  const auto g = alternating(1);
  for (int n = 0; n <= 6; ++n)
    CHECK(pi_pairing(c, g, spec, n) == mean(spec.system(), g));
}

TEST_CASE("intertwining residuals vanish identically") {
  Rng rng(53);
  for (const auto& spec : {binary_spec(), biased_spec()}) {
    const int a = spec.system().alphabet;
    for (int round = 0; round < 6; ++round) {
      const auto f = random_cylinder(rng, a, -2, 2);
      const auto g = random_cylinder(rng, a, -2, 2);
      for (int n = 0; n <= 20; ++n) {
        const auto residuals = intertwining_pairing_check(f, g, spec, n);
        CHECK(residuals.lambda_residual == 0);
        CHECK(residuals.gamma_residual == 0);
      }
    }
  }
}

TEST_CASE("phi_k identity check") {
  const auto spec = uniform_spec();
  const auto s = alternating(0);
  CHECK(phi_k_identity_check(s, s, spec, 0) == Rat(-4, 3));
  for (int k = 1; k <= 8; ++k) {
    CHECK(phi_k_identity_check(s, s, spec, k) == 0);
    CHECK(phi_k_identity_check(s, s, spec, -k) == 0);
  }
  const auto c = CylinderFunction<Rat>::constant(4, Rat(2));
  for (int k = -4; k <= 4; ++k) CHECK(phi_k_identity_check(c, s, spec, k) == 0);
}

TEST_CASE("phi pairings match brute-force enumeration") {
  Rng rng(61);
  for (const auto& spec : {uniform_spec(), biased_spec()}) {
    for (int round = 0; round < 8; ++round) {
      const auto f = random_cylinder(rng, 4, -2, 2);
      const auto g = random_cylinder(rng, 4, -2, 2);
      for (int k : {-2, -1, 0, 1, 2}) {
        const Rat via_library = inner_product(spec.system(), phi_apply(f, spec, k), g);
        const Rat via_oracle = oracles::brute_force_phi_pairing(f, g, spec, k);
        CHECK(via_library == via_oracle);
      }
    }
  }
}

TEST_CASE("association check") {
  CHECK(association_check(uniform_spec()));
  CHECK(association_check(biased_spec()));
  CHECK(association_check(binary_spec()));

  // hand-built spec over [0,1] whose block mixes the site-1 letters: not
  // associated when the base window is only [0,0]
  const auto sys = SymbolicSystem<Rat>::uniform(2);
  BlockSystem<Rat> blocks;
  CouplingBlock<Rat> block;
  block.members = {0, 3};  // words 00 and 11 differ at site 1
  block.weights = {Rat(1, 2), Rat(1, 2)};
  block.coupling = CouplingMatrix<Rat>{{{Rat(0), Rat(1, 2)}, {Rat(1, 2), Rat(0)}},
                                       {Rat(1, 2), Rat(1, 2)}};
  blocks.blocks.push_back(block);
  blocks.residual = {1, 2};
  const auto handmade = PerturbationSpec<Rat>::from_blocks(sys, 0, 2, std::move(blocks));
  CHECK(association_check(handmade));        // fine over its own window
  CHECK_FALSE(association_check(handmade, 0, 0));  // mixes letters outside [0,0]

  // an all-residual perturbation is trivially associated, with a warning
  const auto skew = SymbolicSystem<Rat>::with_weights({Rat(4, 5), Rat(1, 5)});
  const auto degenerate = PerturbationSpec<Rat>::build(skew, 1, 4, BlockPolicy::AcceptResidual);
  CHECK(association_check(degenerate));
  CHECK_FALSE(degenerate.warnings().empty());
}

TEST_CASE("the lambda side stays on nonnegative sites, the gamma side below") {
  Rng rng(71);
  const auto spec = biased_spec();
  for (int round = 0; round < 10; ++round) {
    auto g = random_cylinder(rng, 4, -3, 3);
    const int original_lo = g.lo();
    for (int k = 6; k >= 0; --k) g = phi_adjoint_apply(g, spec, k);
    CHECK(g.lo() >= std::min(original_lo, spec.window_lo()));

    auto f = random_cylinder(rng, 4, -3, 3);
    const int original_hi = f.hi();
    for (int k = -6; k <= -1; ++k) f = phi_apply(f, spec, k);
    CHECK(f.hi() <= std::max(original_hi, spec.window_hi() - 1));
  }
}

TEST_CASE("tail ergodicity probe sees only constants") {
  CHECK(tail_ergodicity_probe(SymbolicSystem<Rat>::uniform(2), 1) == 1);
  CHECK(tail_ergodicity_probe(biased4(), 1) == 1);
  CHECK(tail_ergodicity_probe(SymbolicSystem<Rat>::uniform(1), 1) == 1);
  CHECK(tail_ergodicity_probe(SymbolicSystem<Rat>::uniform(2), 2) == 1);

  CHECK_THROWS_AS(tail_ergodicity_probe(SymbolicSystem<Rat>::uniform(2), 5), SizeLimitError);
  CHECK_THROWS_AS(tail_ergodicity_probe(SymbolicSystem<Rat>::uniform(4), 4), SizeLimitError);

  // independent float elimination agrees on the binary window-1 case
  const auto sys = SymbolicSystem<double>::with_weights({0.5, 0.5});
  std::vector<std::vector<double>> stacked;
  const int dim = 8;
  for (int site = 0; site < 3; ++site) {
    const int stride = site == 0 ? 4 : (site == 1 ? 2 : 1);
    for (int w = 0; w < dim; ++w) {
      std::vector<double> row(dim, 0.0);
      const int base = w - ((w / stride) % 2) * stride;
      for (int c = 0; c < 2; ++c) row[base + c * stride] += 0.5;
      row[w] -= 1.0;
      stacked.push_back(row);
    }
  }
  CHECK(oracles::float_nullspace_dimension(stacked) == 1);
  CHECK(tail_ergodicity_probe(sys, 1) == 1);
}
