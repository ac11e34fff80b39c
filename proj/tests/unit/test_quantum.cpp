#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fibqkd/quantum.hpp"
#include "fibqkd/stats.hpp"
#include "generators.hpp"

using namespace fibqkd;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

OamKet pair_ket(Oam a, Oam b) {
    const std::vector<Oam> v{a, b};
    return equal_superposition(v);
}

/// Draws n samples and checks each label's frequency within 3 standard errors.
void expect_born_rule(const OamKet& k, RandomStream& rng, int n) {
    std::map<Oam, int> hits;
    for (int i = 0; i < n; ++i) ++hits[measure(k, rng)];
    for (const auto& [l, c] : hits) EXPECT_GT(k.probability(l), 0.0) << l;
    for (const auto& [l, a] : k.terms()) {
        const double p = std::norm(a);
        const double se = std::sqrt(p * (1 - p) / n);
        EXPECT_NEAR(static_cast<double>(hits[l]) / n, p, 3 * se + 1e-12) << l;
    }
}

} // namespace

TEST(Superpose, Examples) {
    const auto k = pair_ket(5, 13);
    EXPECT_NEAR(std::abs(k.amplitude(5) - Amplitude(kInvSqrt2)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(k.amplitude(13) - Amplitude(kInvSqrt2)), 0.0, 1e-15);
    EXPECT_EQ(k.size(), 2U);

    const std::vector<Oam> eight{8};
    const std::vector<Amplitude> amp{{0.3, -4.0}};
    const auto b = superpose(eight, amp);
    EXPECT_EQ(b.size(), 1U);
    EXPECT_NEAR(std::abs(b.amplitude(8)), 1.0, 1e-15);

    const auto c = pair_ket(1, 5);
    EXPECT_NEAR(c.probability(1), 0.5, 1e-15);
    EXPECT_NEAR(c.probability(5), 0.5, 1e-15);
}

TEST(Superpose, Errors) {
    const std::vector<Oam> v{1, 2};
    const std::vector<Amplitude> zeros{0.0, 0.0};
    EXPECT_THROW(superpose(v, zeros), DomainError);
    const std::vector<Amplitude> one{1.0};
    EXPECT_THROW(superpose(v, one), DomainError);
}

TEST(Superpose, DropsZeroTermsAndMergesDuplicates) {
    const std::vector<Oam> v{3, 5, 3};
    const std::vector<Amplitude> a{1.0, 0.0, 1.0};
    const auto k = superpose(v, a);
    EXPECT_EQ(k.size(), 1U);
    EXPECT_NEAR(k.probability(3), 1.0, 1e-15);
}

TEST(Superpose, AlwaysNormalized) {
    gen::Source g(7);
    for (int i = 0; i < 500; ++i) EXPECT_NEAR(gen::ket(g).norm_squared(), 1.0, 1e-12);
}

TEST(InnerProduct, Examples) {
    gen::Source g(8);
    for (int i = 0; i < 200; ++i) {
        const auto k = gen::ket(g);
        EXPECT_NEAR(std::abs(inner_product(k, k) - Amplitude(1.0)), 0.0, 1e-12);
    }
    for (int j = 1; j < 12; ++j)
        for (int k = 1; k < 12; ++k)
            if (j != k) EXPECT_EQ(inner_product(OamKet::basis(fib::value(j)), OamKet::basis(fib::value(k))), Amplitude{});
}

TEST(InnerProduct, ConjugateSymmetricAndBounded) {
    gen::Source g(9);
    for (int i = 0; i < 500; ++i) {
        const auto a = gen::ket(g);
        const auto b = gen::ket(g);
        const auto ab = inner_product(a, b);
        EXPECT_NEAR(std::abs(ab - std::conj(inner_product(b, a))), 0.0, 1e-12);
        EXPECT_LE(std::abs(ab), 1.0 + 1e-12);
    }
}

TEST(InnerProduct, ConjugateLinearInFirstArgument) {
    const std::vector<Oam> v{2, 7};
    const std::vector<Amplitude> a{{0.0, 1.0}, {1.0, 0.0}};
    const auto k = superpose(v, a);
    // <k|2> = conj(i)/sqrt2
    EXPECT_NEAR(std::abs(inner_product(k, OamKet::basis(2)) - Amplitude(0.0, -kInvSqrt2)), 0.0, 1e-15);
}

TEST(Measure, BasisStateIsDeterministic) {
    RandomStream rng(1);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(measure(OamKet::basis(8), rng), 8);
}

TEST(Measure, EqualPairFrequencies) {
    RandomStream rng(2);
    const auto k = pair_ket(3, 5);
    int threes = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) threes += measure(k, rng) == 3;
    EXPECT_NEAR(static_cast<double>(threes) / n, 0.5, 0.01);
}

TEST(Measure, MixtureOfResentKets) {
    // Eve resends (|1>+|5>) or (|5>+|13>) with equal probability.
    RandomStream rng(3);
    const auto lo = pair_ket(1, 5);
    const auto hi = pair_ket(5, 13);
    std::map<Oam, int> hits;
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++hits[measure(rng.bernoulli(0.5) ? lo : hi, rng)];
    EXPECT_EQ(hits.size(), 3U);
    const double se = std::sqrt(0.25 * 0.75 / n);
    EXPECT_NEAR(hits[1] / double(n), 0.25, 3 * se);
    EXPECT_NEAR(hits[5] / double(n), 0.5, 3 * std::sqrt(0.25 / n));
    EXPECT_NEAR(hits[13] / double(n), 0.25, 3 * se);
}

TEST(Measure, BornRuleForRandomKets) {
    gen::Source g(10);
    RandomStream rng(10);
    for (int i = 0; i < 6; ++i) expect_born_rule(gen::ket(g), rng, 100000);
}

TEST(Measure, SeedDeterminesOutcomes) {
    const auto k = test_state(FibAlphabet(3, 8));
    RandomStream a(99);
    RandomStream b(99);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(measure(k, a), measure(k, b));
}

TEST(Measure, RejectsUnnormalized) {
    const std::vector<std::pair<Oam, Amplitude>> t{{1, 1.0}, {2, 1.0}};
    RandomStream rng(4);
    EXPECT_THROW(measure(OamKet::from_terms(t), rng), ContractViolation);
}

TEST(TestState, OverlapsAndOrthogonality) {
    for (int start = 3; start <= 12; ++start)
        for (int size : {2, 4, 8, 16}) {
            const FibAlphabet a(start, size);
            const auto t = test_state(a);
            EXPECT_NEAR(t.norm_squared(), 1.0, 1e-12);
            for (Oam m : a.members())
                EXPECT_NEAR(std::abs(inner_product(t, OamKet::basis(m))), 1.0 / std::sqrt(size), 1e-12);
            const auto mem = a.members();
            for (std::size_t k = 0; k + 1 < mem.size(); ++k)
                EXPECT_LT(std::abs(inner_product(t, pair_ket(mem[k], mem[k + 1]))), 1e-12);
        }
}

TEST(TestState, TwoMemberCase) {
    const auto t = test_state(FibAlphabet(5, 2)); // {8, 13}
    EXPECT_NEAR(std::abs(t.amplitude(8) - Amplitude(kInvSqrt2)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(t.amplitude(13) - Amplitude(-kInvSqrt2)), 0.0, 1e-15);
}

TEST(Projection, ShiftedDecoySum) {
    // (1/sqrt N) sum_n |F_n - l>: survival is (#members hit)/N.
    const FibAlphabet a(3, 8);
    int unique_cases = 0;
    for (Oam l = -100; l <= 100; ++l) {
        if (fib::is_fibonacci(l < 0 ? -l : l)) continue;
        std::vector<Oam> shifted;
        int hits = 0;
        for (Oam f : a.members()) {
            shifted.push_back(f - l);
            hits += a.contains(f - l);
        }
        const auto p = project_fib_subspace(equal_superposition(shifted), a);
        EXPECT_NEAR(p.survival, hits / 8.0, 1e-12) << l;
        EXPECT_EQ(p.empty(), hits == 0);
        if (hits == 1) {
            ++unique_cases;
            EXPECT_EQ(p.state.size(), 1U);
            EXPECT_NEAR(p.state.norm_squared(), 1.0, 1e-12);
        }
    }
    EXPECT_GT(unique_cases, 0);
}

TEST(Projection, Examples) {
    const FibAlphabet a(3, 8);
    const auto p = project_fib_subspace(OamKet::basis(8), a);
    EXPECT_DOUBLE_EQ(p.survival, 1.0);
    EXPECT_EQ(p.state.labels(), std::vector<Oam>{8});
    const auto z = project_fib_subspace(OamKet::basis(4), a);
    EXPECT_EQ(z.survival, 0.0);
    EXPECT_TRUE(z.empty());
    // Arm values below the alphabet are blocked too.
    EXPECT_TRUE(project_fib_subspace(OamKet::basis(2), a).empty());
    const auto half = project_fib_subspace(pair_ket(2, 5), a);
    EXPECT_NEAR(half.survival, 0.5, 1e-15);
}

TEST(Projection, CollapsePreservesNormalization) {
    gen::Source g(12);
    const FibAlphabet a(3, 8);
    for (int i = 0; i < 500; ++i) {
        std::vector<Oam> v;
        std::vector<Amplitude> amps;
        for (int j = 0; j < 6; ++j) {
            v.push_back(g.between(0, 100));
            amps.emplace_back(g.unit(), g.unit() - 0.5);
        }
        amps[0] += 1.0;
        const auto p = project_fib_subspace(superpose(v, amps), a);
        if (!p.empty()) EXPECT_NEAR(p.state.norm_squared(), 1.0, 1e-12);
        EXPECT_GE(p.survival, 0.0);
        EXPECT_LE(p.survival, 1.0 + 1e-12);
    }
}

TEST(EntangledPair, ConservationAndConditioning) {
    const FibAlphabet a(3, 8);
    const auto s = EntangledPairState::sorted_source(a);
    EXPECT_NEAR(s.norm_squared(), 1.0, 1e-12);
    EXPECT_EQ(s.terms().size(), 16U);
    for (const auto& [k, amp] : s.terms()) EXPECT_TRUE(a.contains(k.first + k.second));
    const auto bob = s.condition_on_alice(8);
    EXPECT_NEAR(bob.state.probability(5), 0.5, 1e-12);
    EXPECT_NEAR(bob.state.probability(13), 0.5, 1e-12);
    EXPECT_NEAR(bob.survival, 2.0 / 16.0, 1e-12);
    EXPECT_TRUE(s.condition_on_alice(4).empty());
}

TEST(EntangledPair, WeightedPumps) {
    const FibAlphabet a(3, 8);
    const std::map<Oam, double> w{{13, 3.0}, {21, 1.0}};
    const auto bob = EntangledPairState::sorted_source(a, w).condition_on_alice(8);
    EXPECT_NEAR(bob.state.probability(5), 0.75, 1e-12);
    EXPECT_NEAR(bob.state.probability(13), 0.25, 1e-12);
}

TEST(Stats, ProportionAndIndependence) {
    Proportion p;
    for (int i = 0; i < 100; ++i) p.add(i % 4 == 0);
    EXPECT_DOUBLE_EQ(p.fraction(), 0.25);
    EXPECT_NEAR(p.sigma_at(0.25), std::sqrt(0.25 * 0.75 / 100), 1e-15);

    RandomStream rng(5);
    std::vector<std::pair<int, int>> indep, dep;
    for (int i = 0; i < 20000; ++i) {
        const int x = static_cast<int>(rng.below(4));
        indep.emplace_back(x, static_cast<int>(rng.below(4)));
        dep.emplace_back(x, x ^ static_cast<int>(rng.bernoulli(0.1)));
    }
    EXPECT_GT(independence_test(indep).p_value, 1e-4);
    EXPECT_LT(independence_test(dep).p_value, 1e-10);
    EXPECT_GT(independence_test(dep).mutual_information_bits, 1.0);
}

TEST(Rng, NamedStreamsDifferAndRepeat) {
    const SeedTree t(42);
    EXPECT_NE(t.derive("alice"), t.derive("bob"));
    EXPECT_EQ(t.derive("alice"), SeedTree(42).derive("alice"));
    EXPECT_NE(t.derive("alice"), SeedTree(43).derive("alice"));
    auto s = t.stream("x");
    for (int i = 0; i < 10000; ++i) {
        const auto v = s.uniform_int(-3, 5);
        EXPECT_GE(v, -3);
        EXPECT_LE(v, 5);
        EXPECT_LT(s.below(7), 7U);
    }
}
