#include <gtest/gtest.h>

#include <cmath>

#include "homlab/dichotomy.hpp"
#include "oracles.hpp"

using namespace homlab;

TEST(Thresholds, TransitiveBoundFormula) {
    EXPECT_NEAR(transitive_bound(200, 3.0), 1.0 - 3.0 * std::sqrt(200.0 * std::log(200.0)) / 200.0, 1e-12);
    EXPECT_NEAR(transitive_bound(200, 3.0), 0.5125, 1e-3);
}

TEST(Thresholds, VerdictRules) {
    DichotomyThresholds th;
    EXPECT_EQ(decide(1.0, 0.0, 0.0, th), Verdict::FreeEvidence);
    EXPECT_EQ(decide(0.0, 0.97, 1.0, th), Verdict::TransitiveEvidence);
    EXPECT_EQ(decide(0.0, 0.47, 0.1, th), Verdict::Neither);
    EXPECT_EQ(decide(0.95, 0.02, 0.5, th), Verdict::Inconclusive);
    EXPECT_EQ(decide(0.0, 0.9, 0.92, th), Verdict::Inconclusive);
    EXPECT_EQ(to_string(Verdict::Neither), "Neither");
}

TEST(MatchedFraction, AtomicLabelsMatchColourCounts) {
    auto s = Sampler::bernoulli_shift_atomic(2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto x = sample(s, 2 * seed, 200), y = sample(s, 2 * seed + 1, 200);
        double hx = std::count(x.labels.begin(), x.labels.end(), 1.0);
        double hy = std::count(y.labels.begin(), y.labels.end(), 1.0);
        ASSERT_DOUBLE_EQ(matched_fraction(x, y, 1000), (200.0 - std::abs(hx - hy)) / 200.0);
    }
}

TEST(MatchedFraction, DiffuseLabelsNeverMatch) {
    auto s = Sampler::bernoulli_shift_diffuse(CatalogId::rado());
    EXPECT_EQ(matched_fraction(sample(s, 1, 64), sample(s, 2, 64), 1000), 0.0);
}

TEST(MatchedFraction, UnlabeledUsesBackAndForth) {
    auto a = oracle::random_graph(8, 0.5, 1);
    EXPECT_EQ(matched_fraction(a, act(oracle::random_permutation(8, 2), a), 100000), 1.0);
    auto edge = oracle::graph(2, {{0, 1}}), empty = oracle::graph(2, {});
    EXPECT_EQ(matched_fraction(edge, empty, 100), 0.5);
    EXPECT_THROW(matched_fraction(edge, oracle::graph(3, {}), 100), InputError);
}

TEST(Classify, DiffuseBernoulliShiftIsFree) {
    auto r = classify(Sampler::bernoulli_shift_diffuse(), 200, 200, 7);
    EXPECT_EQ(r.freeness_score, 1.0);
    EXPECT_EQ(r.matching_score, 0.0);
    EXPECT_EQ(r.verdict, Verdict::FreeEvidence);
    for (const auto& c : {CatalogId::dlo(), CatalogId::rado(), CatalogId::tournament()}) {
        auto rc = classify(Sampler::bernoulli_shift_diffuse(c), 64, 100, 7);
        EXPECT_EQ(rc.freeness_score, 1.0) << c.token();
        EXPECT_EQ(rc.verdict, Verdict::FreeEvidence) << c.token();
    }
}

TEST(Classify, DiffuseFreenessIsExactAtEveryWindow) {
    for (std::size_t n : {2U, 5U, 16U, 40U})
        EXPECT_EQ(classify(Sampler::bernoulli_shift_diffuse(CatalogId::rado()), n, 100, 3).freeness_score, 1.0) << n;
}

TEST(Classify, AtomicBernoulliShiftIsTransitive) {
    auto r = classify(Sampler::bernoulli_shift_atomic(2), 200, 200, 7);
    EXPECT_EQ(r.verdict, Verdict::TransitiveEvidence);
    EXPECT_GE(r.transitive_pass_rate, 0.95);
    EXPECT_EQ(r.freeness_score, 0.0);
    for (const auto& c : {CatalogId::dlo(), CatalogId::rado(), CatalogId::tournament()}) {
        auto rc = classify(Sampler::bernoulli_shift_atomic(2, c), 64, 100, 7);
        EXPECT_EQ(rc.verdict, Verdict::TransitiveEvidence) << c.token();
    }
}

TEST(Classify, SinftyMixtureIsNeither) {
    auto r = classify(Sampler::sinfty_mixture(0.5, 0.5), 200, 200, 7);
    EXPECT_EQ(r.verdict, Verdict::Neither);
    EXPECT_LT(r.freeness_score, 1.0);
    EXPECT_LT(r.matching_score, 1.0);
}

TEST(Classify, DeterministicAndValidated) {
    auto s = Sampler::bernoulli_shift_atomic(3);
    auto a = classify(s, 50, 100, 9), b = classify(s, 50, 100, 9);
    EXPECT_EQ(a.matched_fractions, b.matched_fractions);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_THROW(classify(s, 50, 99, 9), InputError);
    EXPECT_THROW(classify(s, 1, 100, 9), InputError);
}

TEST(TranspositionProbe, ProperCatalogsSeparateEveryPair) {
    for (const auto& c : {CatalogId::rado(), CatalogId::dlo(), CatalogId::tournament(), CatalogId::cyclic(),
                          CatalogId::poset()})
        for (std::size_t window : {10U, 16U}) {
            auto r = transposition_probe(c, window, 100, 1);
            EXPECT_EQ(r.success_rate, 1.0) << c.token() << " " << window;
            EXPECT_TRUE(r.failures.empty());
        }
}

TEST(TranspositionProbe, PureSetSeparatesNothing) {
    auto r = transposition_probe(CatalogId::pure_set(), 16, 100, 1);
    EXPECT_EQ(r.success_rate, 0.0);
    EXPECT_EQ(r.failures.size(), 5U);
}

TEST(TranspositionProbe, MatchedPartnersStayTogether) {
    auto r = transposition_probe(CatalogId::matched(), 16, 100, 1);
    EXPECT_LT(r.success_rate, 1.0);
    for (auto [x, y] : r.failures) EXPECT_EQ(x / 2, y / 2);
    EXPECT_THROW(transposition_probe(CatalogId::rado(), 2, 10, 1), InputError);
}
