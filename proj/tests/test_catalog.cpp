#include <gtest/gtest.h>

#include "homlab/backforth.hpp"
#include "homlab/catalog.hpp"
#include "homlab/stats.hpp"
#include "oracles.hpp"

using namespace homlab;

namespace {

std::vector<CatalogId> all_catalogs() {
    return {CatalogId::pure_set(),    CatalogId::dlo(),          CatalogId::cyclic(),     CatalogId::poset(),
            CatalogId::rado(),        CatalogId::kn_free(3),     CatalogId::kn_free(4),   CatalogId::hypergraph(3),
            CatalogId::tournament(),  CatalogId::metric(2),      CatalogId::matched()};
}

std::vector<Element> range(std::size_t n) {
    std::vector<Element> v(n);
    std::iota(v.begin(), v.end(), Element{0});
    return v;
}

}  // namespace

TEST(CatalogId, TokensRoundTrip) {
    for (const auto& c : all_catalogs()) EXPECT_EQ(CatalogId::parse(c.token()), c) << c.token();
    EXPECT_EQ(CatalogId::parse("kfree:3"), CatalogId::kn_free(3));
    EXPECT_EQ(CatalogId::parse("hyper:3"), CatalogId::hypergraph(3));
    EXPECT_EQ(CatalogId::parse("metric:2"), CatalogId::metric(2));
    EXPECT_THROW(CatalogId::parse("kfree:2"), InputError);
    EXPECT_THROW(CatalogId::parse("hyper:1"), InputError);
    EXPECT_THROW(CatalogId::parse("metric:0"), InputError);
    EXPECT_THROW(CatalogId::parse("graph"), InputError);
    EXPECT_TRUE(CatalogId::matched().negative_control());
    EXPECT_FALSE(CatalogId::rado().negative_control());
}

TEST(AgeMember, NamedExamples) {
    EXPECT_TRUE(age_member(CatalogId::rado(), oracle::random_graph(7, 0.5, 1)));
    auto triangle = oracle::graph(3, {{0, 1}, {1, 2}, {0, 2}});
    FinStructure tri_kfree(catalog_language(CatalogId::kn_free(3)), 3,
                           {std::vector<Tuple>(triangle.relation(0).begin(), triangle.relation(0).end())});
    EXPECT_FALSE(age_member(CatalogId::kn_free(3), tri_kfree));
    EXPECT_TRUE(age_member(CatalogId::kn_free(4), FinStructure(catalog_language(CatalogId::kn_free(4)), 3,
                                                               {std::vector<Tuple>(triangle.relation(0).begin(),
                                                                                   triangle.relation(0).end())})));
    FinStructure two_cycle(catalog_language(CatalogId::tournament()), 2, {{{0, 1}, {1, 0}}});
    EXPECT_FALSE(age_member(CatalogId::tournament(), two_cycle));
    FinStructure arc(catalog_language(CatalogId::tournament()), 2, {{{0, 1}}});
    EXPECT_TRUE(age_member(CatalogId::tournament(), arc));
}

TEST(AgeMember, LanguageMismatchThrows) {
    EXPECT_THROW(age_member(CatalogId::dlo(), oracle::random_graph(3, 0.5, 2)), InputError);
}

TEST(AgeMember, OrderAxioms) {
    auto lt = catalog_language(CatalogId::dlo());
    EXPECT_TRUE(age_member(CatalogId::dlo(), FinStructure(lt, 3, {{{0, 1}, {1, 2}, {0, 2}}})));
    EXPECT_FALSE(age_member(CatalogId::dlo(), FinStructure(lt, 3, {{{0, 1}, {1, 2}}})));  // incomparable 0,2
    EXPECT_TRUE(age_member(CatalogId::poset(), FinStructure(lt, 3, {{{0, 1}}})));
    EXPECT_FALSE(age_member(CatalogId::poset(), FinStructure(lt, 3, {{{0, 1}, {1, 2}}})));  // not transitive
    EXPECT_FALSE(age_member(CatalogId::poset(), FinStructure(lt, 2, {{{0, 0}}})));
}

TEST(ExtendWindow, PureSetIsEdgeless) {
    auto m = generate(CatalogId::pure_set(), 5);
    EXPECT_EQ(m.window(), 5U);
    EXPECT_EQ(m.tuple_count(), 0U);
}

TEST(ExtendWindow, RadoBitRuleWindowFour) {
    auto m = generate(CatalogId::rado(), 4);
    auto edge = [&](Element a, Element b) { return m.holds(0, std::vector<Element>{a, b}); };
    // adjacency of i<j is bit i of j
    for (Element j = 0; j < 4; ++j)
        for (Element i = 0; i < j; ++i) {
            bool expected = (j >> i) & 1U;
            EXPECT_EQ(edge(i, j), expected) << i << "," << j;
            EXPECT_EQ(edge(j, i), expected);
        }
    EXPECT_TRUE(edge(0, 1));
    EXPECT_FALSE(edge(0, 2));
    EXPECT_TRUE(edge(1, 2));
    EXPECT_TRUE(edge(0, 3));
    EXPECT_TRUE(edge(1, 3));
    EXPECT_FALSE(edge(2, 3));
}

TEST(ExtendWindow, MatchedSetPairsNeighbours) {
    auto m = generate(CatalogId::matched(), 6);
    FinStructure::Builder b(catalog_language(CatalogId::matched()), 6);
    b.add_symmetric(0, {0, 1}).add_symmetric(0, {2, 3}).add_symmetric(0, {4, 5});
    EXPECT_EQ(m, std::move(b).build());
}

TEST(ExtendWindow, TargetBelowCurrentThrows) {
    auto s = extend_window(GeneratorState(CatalogId::rado()), 8);
    EXPECT_THROW(extend_window(s, 4), InputError);
    EXPECT_EQ(extend_window(s, 8).current(), s.current());
}

TEST(ExtendWindow, DeterministicModeIgnoresSeed) {
    for (const auto& c : all_catalogs()) {
        auto a = generate(c, 12, GenerationMode::DeterministicGeneric, 1);
        auto b = generate(c, 12, GenerationMode::DeterministicGeneric, 99);
        EXPECT_EQ(a, b) << c.token();
    }
}

TEST(ExtendWindow, RandomizedModeDependsOnSeedOnly) {
    for (auto c : {CatalogId::rado(), CatalogId::tournament(), CatalogId::poset(), CatalogId::dlo()}) {
        auto a = generate(c, 16, GenerationMode::Randomized, 5);
        EXPECT_EQ(a, generate(c, 16, GenerationMode::Randomized, 5));
        EXPECT_NE(a, generate(c, 16, GenerationMode::Randomized, 6)) << c.token();
    }
}

TEST(ExtendWindow, ProjectiveConsistency) {
    std::vector<std::pair<std::size_t, std::size_t>> sizes = {{1, 5}, {3, 9}, {7, 8}, {10, 23}, {17, 40}, {40, 40}};
    for (const auto& c : all_catalogs())
        for (auto mode : {GenerationMode::DeterministicGeneric, GenerationMode::Randomized})
            for (std::uint64_t seed : {0ULL, 17ULL}) {
                GeneratorState s(c, mode, seed);
                for (auto [n, m] : sizes) {
                    auto big = extend_window(s, m).current();
                    ASSERT_EQ(prefix(big, n), extend_window(s, n).current()) << c.token() << " " << n << "/" << m;
                }
                // Extending in steps gives the same window as one jump.
                auto stepped = extend_window(extend_window(extend_window(s, 5), 13), 29).current();
                ASSERT_EQ(stepped, extend_window(s, 29).current()) << c.token();
            }
}

TEST(ExtendWindow, EveryInducedSubstructureIsInTheAge) {
    for (const auto& c : all_catalogs())
        for (auto mode : {GenerationMode::DeterministicGeneric, GenerationMode::Randomized}) {
            auto m = generate(c, 8, mode, 3);
            for (unsigned mask = 0; mask < 256; ++mask) {
                std::vector<Element> sub;
                for (Element i = 0; i < 8; ++i)
                    if (mask >> i & 1U) sub.push_back(i);
                ASSERT_TRUE(age_member(c, induced(m, sub))) << c.token() << " mask " << mask;
            }
            ASSERT_TRUE(age_member(c, generate(c, 48, mode, 3))) << c.token();
        }
}

TEST(ExtendWindow, HensonAvoidsForbiddenTournament) {
    // Forbid the 3-cycle: the limit's finite parts are then transitive tournaments or have non-edges.
    FinStructure cycle(catalog_language(CatalogId::henson({})), 3, {{{0, 1}, {1, 2}, {2, 0}}});
    auto c = CatalogId::henson({cycle});
    auto m = generate(c, 20);
    EXPECT_TRUE(age_member(c, m));
    for_each_tuple(20, 3, [&](const Tuple& t) {
        bool cyc = m.holds(0, std::vector<Element>{t[0], t[1]}) && m.holds(0, std::vector<Element>{t[1], t[2]}) &&
                   m.holds(0, std::vector<Element>{t[2], t[0]});
        ASSERT_FALSE(cyc);
    });
    EXPECT_THROW(CatalogId::henson({oracle::random_graph(3, 1.0, 1)}), InputError);
}

TEST(WitnessExtension, DloStrictlyBetween) {
    auto s = extend_window(GeneratorState(CatalogId::dlo()), 16);
    const auto& m = s.current();
    auto lt = [&](Element a, Element b) { return m.holds(0, std::vector<Element>{a, b}); };
    // Parameters: two elements with something between them, in increasing order.
    Element a = 2, b = 7;
    if (lt(b, a)) std::swap(a, b);
    std::vector<Element> params{a, b};
    std::optional<Element> expected;
    for (Element z = 0; z < m.window() && !expected; ++z)
        if (lt(a, z) && lt(z, b)) expected = z;
    ASSERT_TRUE(expected.has_value());
    auto desired = qf_type(m, std::vector<Element>{a, b, *expected});
    EXPECT_EQ(witness_extension(s, params, desired), expected);
}

TEST(WitnessExtension, RadoRealizesEveryPatternOverSmallSets) {
    for (std::vector<Element> A : {std::vector<Element>{0}, {0, 1}, {1, 2}, {0, 1, 2}}) {
        std::size_t window = std::size_t{1} << (A.back() + 2);
        auto s = extend_window(GeneratorState(CatalogId::rado()), window);
        auto lang = catalog_language(CatalogId::rado());
        const std::size_t a = A.size();
        auto base = induced(s.current(), A);
        for (unsigned pattern = 0; pattern < (1U << a); ++pattern) {
            FinStructure::Builder b(lang, a + 1);
            for (const auto& t : base.relation(0)) b.add(0, t);
            for (Element i = 0; i < a; ++i)
                if (pattern >> i & 1U) b.add_symmetric(0, {i, static_cast<Element>(a)});
            auto ext = std::move(b).build();
            Tuple t(a + 1);
            std::iota(t.begin(), t.end(), Element{0});
            auto desired = qf_type(ext, t);
            auto z = witness_extension(s, A, desired);
            ASSERT_TRUE(z.has_value()) << "pattern " << pattern;
            Tuple full = A;
            full.push_back(*z);
            ASSERT_TRUE(oracle::same_qf_type(s.current(), full, ext, t));
        }
    }
}

TEST(WitnessExtension, AgeInconsistentTypeThrows) {
    auto c = CatalogId::kn_free(3);
    auto s = extend_window(GeneratorState(c), 16);
    const auto& m = s.current();
    std::optional<std::pair<Element, Element>> edge;
    for (const auto& t : m.relation(0)) {
        edge = std::make_pair(t[0], t[1]);
        break;
    }
    ASSERT_TRUE(edge.has_value());
    FinStructure::Builder b(catalog_language(c), 3);
    b.add_symmetric(0, {0, 1}).add_symmetric(0, {0, 2}).add_symmetric(0, {1, 2});
    auto desired = qf_type(std::move(b).build(), std::vector<Element>{0, 1, 2});
    std::vector<Element> A{edge->first, edge->second};
    EXPECT_THROW(witness_extension(s, A, desired), InputError);
}

TEST(WitnessExtension, NotFoundWithoutGrowingTheWindow) {
    auto s = extend_window(GeneratorState(CatalogId::dlo()), 3);
    const auto& m = s.current();
    // Ask for a point below the minimum of the window.
    Element lo = 0;
    for (Element z = 0; z < 3; ++z)
        if (m.holds(0, std::vector<Element>{z, lo})) lo = z;
    auto lang = catalog_language(CatalogId::dlo());
    FinStructure below(lang, 2, {{{1, 0}}});
    auto desired = qf_type(below, std::vector<Element>{0, 1});
    EXPECT_EQ(witness_extension(s, std::vector<Element>{lo}, desired), std::nullopt);
    EXPECT_EQ(s.window(), 3U);
    EXPECT_THROW(witness_extension(s, std::vector<Element>{lo, 1}, desired), InputError);  // arity mismatch
}

// Extension property between substructures of a small window, with partners
// taken from a larger window of the same limit.
TEST(Ultrahomogeneity, PartialIsomorphismsExtendForthAndBack) {
    std::size_t checked = 0;
    for (const auto& c : {CatalogId::rado(), CatalogId::dlo(), CatalogId::tournament()}) {
        auto big = generate(c, c.kind == CatalogKind::Rado ? 512 : 128);
        auto small = prefix(big, 8);
        rng::SplitMix64 g(rng::hash(7, {static_cast<std::uint64_t>(c.kind)}));
        std::size_t instances = 0;
        while (instances < 40) {
            auto pool = range(8);
            std::shuffle(pool.begin(), pool.end(), g);
            std::vector<Element> s(pool.begin(), pool.begin() + 3);
            std::shuffle(pool.begin(), pool.end(), g);
            std::vector<Element> t(pool.begin(), pool.begin() + 3);
            if (!(qf_type(small, s) == qf_type(small, t))) continue;
            ++instances;
            std::vector<std::pair<Element, Element>> pairs;
            for (std::size_t i = 0; i < 3; ++i) pairs.push_back({s[i], t[i]});
            auto p = PartialIso::from_pairs(big, big, pairs);
            for (Element x = 0; x < 8; ++x) {
                ASSERT_TRUE(try_extend(p, ExtendSide::Forth, x).has_value()) << c.token();
                ASSERT_TRUE(try_extend(p, ExtendSide::Back, x).has_value()) << c.token();
            }
        }
        checked += instances;
    }
    EXPECT_GE(checked, 100U);
}

TEST(RandomizedRado, EdgeLawIsExchangeable) {
    std::vector<std::vector<double>> table(6, std::vector<double>(2, 0.0));
    const std::size_t trials = 4000;
    for (std::size_t t = 0; t < trials; ++t) {
        auto m = generate(CatalogId::rado(), 4, GenerationMode::Randomized, rng::hash(2024, {t}));
        std::size_t row = 0;
        for (Element i = 0; i < 4; ++i)
            for (Element j = i + 1; j < 4; ++j) table[row++][m.holds(0, std::vector<Element>{i, j}) ? 1 : 0] += 1;
    }
    auto chi = stats::chi_square_homogeneity(table);
    EXPECT_FALSE(chi.degenerate);
    EXPECT_GT(chi.p_value, 0.01);
    for (const auto& row : table) EXPECT_NEAR(row[1] / trials, 0.5, 0.04);
}
