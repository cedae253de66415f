#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "homlab/ire.hpp"
#include "homlab/stats.hpp"
#include "oracles.hpp"

using namespace homlab;

namespace {

std::vector<Sampler> builtin_samplers() {
    return {Sampler::erdos_renyi(0.5),
            Sampler::erdos_renyi(0.3),
            Sampler::uniform_linear_order(),
            Sampler::kaleidoscope(),
            Sampler::two_graph(),
            Sampler::bernoulli_shift_diffuse(),
            Sampler::bernoulli_shift_atomic(3),
            Sampler::bernoulli_shift_ber(0.3),
            Sampler::bernoulli_shift_diffuse(CatalogId::dlo()),
            Sampler::bernoulli_shift_atomic(2, CatalogId::rado()),
            Sampler::bernoulli_shift_ber(0.4, CatalogId::tournament()),
            Sampler::sinfty_mixture(0.5, 0.5),
            Sampler::parse("mix:0.5*er:0.2+0.5*er:0.8")};
}

RealExpansion restrict(const RealExpansion& x, std::size_t n) {
    if (!x.labeled()) return RealExpansion(prefix(x.structure, n));
    return RealExpansion(prefix(x.structure, n), std::vector<double>(x.labels.begin(), x.labels.begin() + n));
}

bool edge(const RealExpansion& x, Element i, Element j) { return x.structure.holds(0, std::vector<Element>{i, j}); }

}  // namespace

TEST(Sampler, TokensRoundTrip) {
    for (const auto& s : builtin_samplers()) {
        auto back = Sampler::parse(s.token(), s.kind == SamplerKind::BernoulliShift ? s.base : CatalogId::pure_set());
        EXPECT_EQ(back, s) << s.token();
    }
    EXPECT_THROW(Sampler::parse("er:1.5"), InputError);
    EXPECT_THROW(Sampler::parse("er"), InputError);
    EXPECT_THROW(Sampler::parse("ulo", CatalogId::rado()), InputError);
    EXPECT_THROW(Sampler::parse("bshift:weird"), InputError);
    EXPECT_THROW(Sampler::parse("mix:0.5*er:0.2"), InputError);  // weights must sum to 1
    EXPECT_THROW(Sampler::parse("nonsense"), InputError);
}

TEST(Sampler, DeterministicGivenSeedAndWindow) {
    for (const auto& s : builtin_samplers()) {
        auto a = sample(s, 42, 12), b = sample(s, 42, 12);
        EXPECT_EQ(a.structure, b.structure) << s.token();
        EXPECT_EQ(a.labels, b.labels) << s.token();
        EXPECT_EQ(a.labeled(), s.labeled());
        EXPECT_TRUE(a.structure.language().same_symbols(s.language()));
    }
}

TEST(Sampler, RestrictionEqualsDirectSampling) {
    for (const auto& s : builtin_samplers())
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto big = sample(s, seed, 10);
            auto small = sample(s, seed, 5);
            auto r = restrict(big, 5);
            ASSERT_EQ(r.structure, small.structure) << s.token();
            ASSERT_EQ(r.labels, small.labels) << s.token();
        }
}

// Restrictions of window-10 samples and direct window-5 samples under
// independent seeds have the same law of the qf-type of (0,1,2).
TEST(Sampler, ProjectiveConsistencyInLaw) {
    for (const auto& s : {Sampler::uniform_linear_order(), Sampler::erdos_renyi(0.3), Sampler::kaleidoscope(),
                          Sampler::two_graph()}) {
        std::map<std::string, std::array<double, 2>> counts;
        const std::size_t trials = 5000;
        for (std::size_t t = 0; t < trials; ++t) {
            auto r = restrict(sample(s, trial_seed(1, t), 10), 5);
            auto d = sample(s, trial_seed(2, t), 5);
            counts[qf_type(r.structure, std::vector<Element>{0, 1, 2}).key()][0] += 1;
            counts[qf_type(d.structure, std::vector<Element>{0, 1, 2}).key()][1] += 1;
        }
        std::vector<std::vector<double>> table(2);
        for (const auto& [k, c] : counts) {
            table[0].push_back(c[0]);
            table[1].push_back(c[1]);
        }
        auto chi = stats::chi_square_homogeneity(table);
        EXPECT_GT(chi.p_value, 0.001) << s.token();
    }
}

TEST(UniformLinearOrder, CylinderLawWithinThreeSigma) {
    const std::size_t trials = 100000;
    std::map<std::vector<Element>, double> freq;
    for (std::size_t t = 0; t < trials; ++t) {
        auto x = sample(Sampler::uniform_linear_order(), trial_seed(7, t), 3);
        std::vector<Element> order{0, 1, 2};
        std::sort(order.begin(), order.end(), [&](Element a, Element b) { return edge(x, a, b); });
        freq[order] += 1;
    }
    ASSERT_EQ(freq.size(), 6U);
    const double sigma = std::sqrt((1.0 / 6) * (5.0 / 6) / trials);
    for (const auto& [order, c] : freq) EXPECT_NEAR(c / trials, 1.0 / 6, 3 * sigma);
}

TEST(UniformLinearOrder, EverySampleIsATotalOrder) {
    const auto dlo = catalog_language(CatalogId::dlo());
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto x = sample(Sampler::uniform_linear_order(), seed, 9);
        const auto& lt = x.structure.relation(0);
        ASSERT_TRUE(age_member(CatalogId::dlo(), FinStructure(dlo, 9, {std::vector<Tuple>(lt.begin(), lt.end())})));
    }
}

TEST(ErdosRenyi, EdgeDensityWithinThreeSigma) {
    const double p = 0.3;
    double edges = 0, pairs = 0;
    for (std::size_t t = 0; pairs < 100000; ++t) {
        auto x = sample(Sampler::erdos_renyi(p), trial_seed(3, t), 20);
        for (Element i = 0; i < 20; ++i)
            for (Element j = i + 1; j < 20; ++j) {
                edges += edge(x, i, j);
                pairs += 1;
            }
    }
    EXPECT_NEAR(edges / pairs, p, 3 * std::sqrt(p * (1 - p) / pairs));
}

TEST(TwoGraph, EveryFourSetHasEvenHyperedgeCount) {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto x = sample(Sampler::two_graph(), seed, 8);
        std::vector<Element> v(4);
        for (v[0] = 0; v[0] < 8; ++v[0])
            for (v[1] = v[0] + 1; v[1] < 8; ++v[1])
                for (v[2] = v[1] + 1; v[2] < 8; ++v[2])
                    for (v[3] = v[2] + 1; v[3] < 8; ++v[3]) {
                        int count = 0;
                        for (int skip = 0; skip < 4; ++skip) {
                            std::vector<Element> tri;
                            for (int i = 0; i < 4; ++i)
                                if (i != skip) tri.push_back(v[i]);
                            count += x.structure.holds(1, tri);
                        }
                        ASSERT_EQ(count % 2, 0);
                        ++checked;
                    }
    }
    EXPECT_EQ(checked, 200U * 70U);
}

TEST(Kaleidoscope, EveryPairCarriesSomeColour) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto x = sample(Sampler::kaleidoscope(3), seed, 10);
        for (Element i = 0; i < 10; ++i)
            for (Element j = 0; j < 10; ++j) {
                if (i == j) continue;
                bool any = false;
                for (std::size_t c = 0; c < 3; ++c) any = any || x.structure.holds(c, std::vector<Element>{i, j});
                ASSERT_TRUE(any);
            }
    }
}

TEST(BernoulliShift, LabelsFollowTheBaseLaw) {
    auto atomic = sample(Sampler::bernoulli_shift_atomic(3), 5, 300);
    for (double l : atomic.labels) EXPECT_TRUE(l == 0.0 || l == 0.5 || l == 1.0);
    auto diffuse = sample(Sampler::bernoulli_shift_diffuse(), 5, 300);
    std::set<double> distinct(diffuse.labels.begin(), diffuse.labels.end());
    EXPECT_EQ(distinct.size(), 300U);
    auto over_rado = sample(Sampler::bernoulli_shift_diffuse(CatalogId::rado()), 5, 16);
    EXPECT_EQ(over_rado.structure, generate(CatalogId::rado(), 16));
}

TEST(Invariance, EveryBuiltinSamplerPasses) {
    for (const auto& s : builtin_samplers()) {
        auto r = invariance_test(s, 2, 10000, 0.01, 2024);
        EXPECT_TRUE(r.pass) << s.token() << " p=" << r.p_value;
    }
}

TEST(Invariance, TriplesAlsoPass) {
    for (const auto& s : {Sampler::uniform_linear_order(), Sampler::two_graph(), Sampler::kaleidoscope()}) {
        auto r = invariance_test(s, 3, 10000, 0.01, 99);
        EXPECT_TRUE(r.pass) << s.token() << " p=" << r.p_value;
    }
}

TEST(Invariance, ParityFixtureFails) {
    // Exact law of the fixture: (0,1) is never an edge and (0,2) always is.
    auto x = sample(Sampler::parity_fixture(), 0, 4);
    EXPECT_FALSE(edge(x, 0, 1));
    EXPECT_TRUE(edge(x, 0, 2));
    auto r = invariance_test(Sampler::parity_fixture(), 2, 10000, 0.01, 2024);
    EXPECT_FALSE(r.pass);
    EXPECT_LT(r.p_value, 1e-10);
}

TEST(Invariance, UniformOrderMatchesExactPairLaw) {
    // The order type of a pair (a,b) is a<b with probability 1/2.
    const std::size_t trials = 20000;
    std::vector<double> counts(2, 0.0);
    for (std::size_t t = 0; t < trials; ++t) counts[edge(sample(Sampler::uniform_linear_order(), trial_seed(5, t), 5), 3, 1)] += 1;
    EXPECT_GT(stats::chi_square_gof(counts, {0.5, 0.5}).p_value, 0.01);
}

TEST(Invariance, RejectsBadArguments) {
    EXPECT_THROW(invariance_test(Sampler::erdos_renyi(0.5), 2, 999, 0.01, 1), InputError);
    EXPECT_THROW(invariance_test(Sampler::erdos_renyi(0.5), 0, 1000, 0.01, 1), InputError);
    EXPECT_THROW(invariance_test(Sampler::erdos_renyi(0.5), 2, 1000, 1.5, 1), InputError);
}

TEST(Invariance, DegenerateTableIsReportedAsPass) {
    auto r = invariance_test(Sampler::erdos_renyi(1.0), 2, 1000, 0.01, 1);
    EXPECT_TRUE(r.degenerate);
    EXPECT_TRUE(r.pass);
}

TEST(Dissociation, ProductLawsPass) {
    std::vector<Element> a{0, 1}, b{2, 3};
    EXPECT_TRUE(dissociation_test(Sampler::erdos_renyi(0.3), a, b, 10000, 1).pass);
    EXPECT_TRUE(dissociation_test(Sampler::uniform_linear_order(), a, b, 10000, 1).pass);
    EXPECT_TRUE(dissociation_test(Sampler::bernoulli_shift_ber(0.3), a, b, 10000, 1).pass);
}

TEST(Dissociation, UniformOrderTableMatchesEnumeration) {
    // Over all 4! orders, the order types of {0,1} and {2,3} are independent fair coins.
    std::vector<std::vector<double>> exact(2, std::vector<double>(2, 0.0));
    for (const auto& perm : oracle::all_permutations(4)) exact[perm[0] < perm[1]][perm[2] < perm[3]] += 1;
    for (const auto& row : exact)
        for (double c : row) EXPECT_EQ(c, 6.0);
    EXPECT_NEAR(stats::mutual_information(exact), 0.0, 1e-12);
}

TEST(Dissociation, ErgodicMixtureFails) {
    auto mix = Sampler::parse("mix:0.5*er:0.2+0.5*er:0.8");
    std::vector<Element> a{0, 1}, b{2, 3};
    auto r = dissociation_test(mix, a, b, 10000, 1);
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.mutual_information, r.threshold);
    // Covariance of disjoint edge indicators: E[p^2] - E[p]^2 = 0.34 - 0.25 = 0.09.
    double e01 = 0, e23 = 0, both = 0;
    const std::size_t trials = 20000;
    for (std::size_t t = 0; t < trials; ++t) {
        auto x = sample(mix, trial_seed(8, t), 4);
        bool u = edge(x, 0, 1), v = edge(x, 2, 3);
        e01 += u;
        e23 += v;
        both += u && v;
    }
    double cov = both / trials - (e01 / trials) * (e23 / trials);
    EXPECT_NEAR(cov, 0.09, 0.015);
}

TEST(Dissociation, RejectsOverlapAndEmptySets) {
    std::vector<Element> a{0, 1}, b{1, 2}, none;
    EXPECT_THROW(dissociation_test(Sampler::erdos_renyi(0.3), a, b, 100, 1), InputError);
    EXPECT_THROW(dissociation_test(Sampler::erdos_renyi(0.3), a, none, 100, 1), InputError);
}

namespace {

std::vector<RealExpansion> draw(const Sampler& s, std::size_t count, std::size_t window, std::uint64_t seed) {
    std::vector<RealExpansion> out;
    for (std::size_t t = 0; t < count; ++t) out.push_back(sample(s, trial_seed(seed, t), window));
    return out;
}

}  // namespace

TEST(DeFinetti, IidBernoulliIsOneAtom) {
    auto est = definetti_decompose(draw(Sampler::bernoulli_shift_ber(0.3), 200, 400, 1), 1);
    ASSERT_EQ(est.atoms.size(), 1U);
    EXPECT_NEAR(est.atoms[0].location, 0.3, 0.03);
    EXPECT_DOUBLE_EQ(est.atoms[0].weight, 1.0);
}

TEST(DeFinetti, TwoPointMixtureRecovered) {
    auto mix = Sampler::mixed({{0.5, Sampler::bernoulli_shift_ber(0.2)}, {0.5, Sampler::bernoulli_shift_ber(0.8)}});
    auto est = definetti_decompose(draw(mix, 200, 400, 2), 2);
    ASSERT_EQ(est.atoms.size(), 2U);
    EXPECT_NEAR(est.atoms[0].location, 0.2, 0.03);
    EXPECT_NEAR(est.atoms[1].location, 0.8, 0.03);
    EXPECT_NEAR(est.atoms[0].weight, 0.5, 0.07);
    EXPECT_NEAR(est.atoms[1].weight, 0.5, 0.07);
}

TEST(DeFinetti, ThreePointMixtureRecovered) {
    auto mix = Sampler::mixed({{0.3, Sampler::bernoulli_shift_ber(0.1)},
                               {0.4, Sampler::bernoulli_shift_ber(0.5)},
                               {0.3, Sampler::bernoulli_shift_ber(0.9)}});
    auto est = definetti_decompose(draw(mix, 300, 400, 3), 3);
    ASSERT_EQ(est.atoms.size(), 3U);
    EXPECT_NEAR(est.atoms[1].location, 0.5, 0.03);
    EXPECT_NEAR(est.atoms[1].weight, 0.4, 0.08);
}

TEST(DeFinetti, UniformLabelsAreOneUniformCluster) {
    auto samples = draw(Sampler::bernoulli_shift_diffuse(), 100, 200, 4);
    auto est = definetti_decompose(samples, 4);
    ASSERT_EQ(est.atoms.size(), 1U);
    EXPECT_NEAR(est.atoms[0].location, 0.5, 0.02);
    // 20000 pooled labels: the 1% critical KS distance is 1.63/sqrt(20000).
    EXPECT_LT(est.atoms[0].ks_uniform, 1.63 / std::sqrt(20000.0));
}

TEST(DeFinetti, UnlabeledGraphsUseEdgeDensity) {
    auto mix = Sampler::parse("mix:0.5*er:0.2+0.5*er:0.8");
    auto est = definetti_decompose(draw(mix, 120, 100, 5), 5);
    ASSERT_EQ(est.atoms.size(), 2U);
    EXPECT_NEAR(est.atoms[0].location, 0.2, 0.03);
    EXPECT_NEAR(est.atoms[1].location, 0.8, 0.03);
}

TEST(DeFinetti, TooFewSamplesOrSmallWindowsThrow) {
    EXPECT_THROW(definetti_decompose(draw(Sampler::bernoulli_shift_ber(0.3), 99, 100, 1)), InputError);
    EXPECT_THROW(definetti_decompose(draw(Sampler::bernoulli_shift_ber(0.3), 100, 99, 1)), InputError);
}

TEST(FixedPoints, WindowFixedPointsByBruteForce) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto x = sample(Sampler::erdos_renyi(0.5), seed, 6);
        auto autos = oracle::automorphisms(x.structure);
        std::vector<Element> expected;
        for (Element e = 0; e < 6; ++e)
            if (std::all_of(autos.begin(), autos.end(), [&](const auto& f) { return f[e] == e; })) expected.push_back(e);
        ASSERT_EQ(window_fixed_points(x), expected);
    }
}

TEST(FixedPoints, MonitorStaysBelowThreshold) {
    for (const auto& s : {Sampler::erdos_renyi(0.5), Sampler::uniform_linear_order(), Sampler::two_graph(),
                          Sampler::bernoulli_shift_atomic(2), Sampler::bernoulli_shift_diffuse(CatalogId::rado()),
                          Sampler::sinfty_mixture(0.5, 0.5)}) {
        auto r = fixed_point_monitor(s, 8, 200, 6);
        EXPECT_TRUE(r.pass) << s.token() << " " << r.flagged_fraction;
        EXPECT_LE(r.flagged_fraction, kFixedPointThreshold);
    }
    EXPECT_THROW(fixed_point_monitor(Sampler::erdos_renyi(0.5), 3, 10, 1), InputError);
}
