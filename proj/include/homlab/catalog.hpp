#pragma once

// The catalog of homogeneous structures: age membership, projectively
// consistent window generation of each Fraisse limit, and one-point
// extension witnessing.
//
// Generation modes:
//  - deterministic-generic: Rado by the BIT predicate, DLO and cyclic order by
//    dyadic rationals, matched set by canonical pairing, and every other class
//    by greedy one-point extension. The greedy schedule walks all subsets A of
//    at most kScheduleWidth points (ordered by max element, then size, then
//    lexicographically) and every age-consistent one-point type over each A;
//    each new point realizes the first type not yet realized in the window.
//  - randomized: every new point draws its relations from counter-based
//    randomness keyed by (seed, point, partner), subject to the class axioms.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "homlab/rng.hpp"
#include "homlab/structure.hpp"

namespace homlab {

enum class CatalogKind {
    PureSet,
    DenseLinearOrder,
    CyclicOrder,
    GenericPoset,
    Rado,
    KnFree,
    KUniformHypergraph,
    GenericTournament,
    BoundedMetric,
    MatchedSet,
    Henson,
};

inline constexpr std::size_t kScheduleWidth = 3;

struct CatalogId {
    CatalogKind kind = CatalogKind::PureSet;
    unsigned param = 0;                      // n for K_n-free, k for hypergraphs, d for metrics
    std::vector<FinStructure> forbidden;     // Henson digraphs only

    static CatalogId pure_set() { return {CatalogKind::PureSet, 0, {}}; }
    static CatalogId dlo() { return {CatalogKind::DenseLinearOrder, 0, {}}; }
    static CatalogId cyclic() { return {CatalogKind::CyclicOrder, 0, {}}; }
    static CatalogId poset() { return {CatalogKind::GenericPoset, 0, {}}; }
    static CatalogId rado() { return {CatalogKind::Rado, 0, {}}; }
    static CatalogId tournament() { return {CatalogKind::GenericTournament, 0, {}}; }
    static CatalogId matched() { return {CatalogKind::MatchedSet, 0, {}}; }
    static CatalogId kn_free(unsigned n) {
        if (n < 3) throw InputError("K_n-free needs n >= 3");
        return {CatalogKind::KnFree, n, {}};
    }
    static CatalogId hypergraph(unsigned k) {
        if (k < 2 || k > 8) throw InputError("k-uniform hypergraph needs 2 <= k <= 8");
        return {CatalogKind::KUniformHypergraph, k, {}};
    }
    static CatalogId metric(unsigned d) {
        if (d < 1 || d > 16) throw InputError("bounded metric needs 1 <= d <= 16");
        return {CatalogKind::BoundedMetric, d, {}};
    }
    static CatalogId henson(std::vector<FinStructure> forbidden);

    // Tokens: pureset dlo cyclic poset rado kfree:<n> hyper:<k> tournament
    // metric:<d> matched henson:<file>[,<file>...]
    static CatalogId parse(std::string_view token);
    std::string token() const;

    // The matched set has algebraicity: a point's partner is fixed by its stabilizer.
    bool negative_control() const noexcept { return kind == CatalogKind::MatchedSet; }

    friend bool operator==(const CatalogId&, const CatalogId&) = default;
};

inline Language catalog_language(const CatalogId& c) {
    switch (c.kind) {
        case CatalogKind::PureSet: return Language("pureset", {});
        case CatalogKind::DenseLinearOrder: return Language("dlo", {{"lt", 2}});
        case CatalogKind::CyclicOrder: return Language("cyclic", {{"C", 3}});
        case CatalogKind::GenericPoset: return Language("poset", {{"lt", 2}});
        case CatalogKind::Rado: return Language("rado", {{"E", 2}});
        case CatalogKind::KnFree: return Language("kfree" + std::to_string(c.param), {{"E", 2}});
        case CatalogKind::KUniformHypergraph: return Language("hyper" + std::to_string(c.param), {{"H", c.param}});
        case CatalogKind::GenericTournament: return Language("tournament", {{"T", 2}});
        case CatalogKind::BoundedMetric: {
            std::vector<Symbol> s;
            for (unsigned i = 1; i <= c.param; ++i) s.push_back({"D" + std::to_string(i), 2});
            return Language("metric" + std::to_string(c.param), std::move(s));
        }
        case CatalogKind::MatchedSet: return Language("matched", {{"P", 2}});
        case CatalogKind::Henson: return Language("henson", {{"A", 2}});
    }
    return Language();
}

namespace detail {

// Mutable working copy used while a window grows.
class Work {
public:
    Work(Language lang, std::size_t n) : lang_(std::move(lang)), n_(n), rels_(lang_.size()), index_(lang_.size()) {
        for (std::size_t s = 0; s < lang_.size(); ++s) {
            unsigned r = lang_[s].arity;
            unsigned bits = std::min(32U, 64U / r);
            bases_.push_back(std::uint64_t{1} << bits);
        }
    }

    static Work from(const FinStructure& m) {
        Work w(m.language(), m.window());
        for (std::size_t s = 0; s < m.symbol_count(); ++s)
            for (const auto& t : m.relation(s)) w.add(s, t);
        return w;
    }

    const Language& language() const noexcept { return lang_; }
    std::size_t size() const noexcept { return n_; }

    Element add_point() {
        for (auto b : bases_)
            if (n_ + 1 >= b) throw InputError("window too large for this catalog's arity");
        return static_cast<Element>(n_++);
    }

    bool holds(std::size_t s, std::initializer_list<Element> t) const {
        return index_[s].count(code(s, t.begin(), t.end())) != 0;
    }
    bool holds(std::size_t s, std::span<const Element> t) const {
        return index_[s].count(code(s, t.begin(), t.end())) != 0;
    }

    void add(std::size_t s, const Tuple& t) {
        if (index_[s].insert(code(s, t.begin(), t.end())).second) rels_[s].push_back(t);
    }
    void add(std::size_t s, std::initializer_list<Element> t) { add(s, Tuple(t)); }

    void add_symmetric(std::size_t s, Tuple t) {
        std::sort(t.begin(), t.end());
        do add(s, t);
        while (std::next_permutation(t.begin(), t.end()));
    }

    void remove_last_point_tuples(std::size_t s, std::size_t keep) {
        while (rels_[s].size() > keep) {
            index_[s].erase(code(s, rels_[s].back().begin(), rels_[s].back().end()));
            rels_[s].pop_back();
        }
    }
    std::size_t count(std::size_t s) const noexcept { return rels_[s].size(); }

    FinStructure build() const { return FinStructure(lang_, n_, rels_); }

private:
    template <typename It>
    std::uint64_t code(std::size_t s, It b, It e) const {
        std::uint64_t c = 0;
        for (; b != e; ++b) c = c * bases_[s] + *b;
        return c;
    }

    Language lang_;
    std::size_t n_;
    std::vector<std::vector<Tuple>> rels_;
    std::vector<std::unordered_set<std::uint64_t>> index_;
    std::vector<std::uint64_t> bases_;
};

// All r-subsets of `pool` (pool sorted), lexicographic.
inline std::vector<std::vector<Element>> combinations(const std::vector<Element>& pool, std::size_t r) {
    std::vector<std::vector<Element>> out;
    if (r > pool.size()) return out;
    std::vector<std::size_t> idx(r);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
        std::vector<Element> c(r);
        for (std::size_t i = 0; i < r; ++i) c[i] = pool[idx[i]];
        out.push_back(std::move(c));
        int i = static_cast<int>(r) - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == pool.size() - r + static_cast<std::size_t>(i)) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

// Brute-force isomorphism test for tiny structures (forbidden tournaments).
inline bool isomorphic_brute(const FinStructure& a, const FinStructure& b) {
    if (a.window() != b.window() || !a.language().same_symbols(b.language())) return false;
    for (std::size_t s = 0; s < a.symbol_count(); ++s)
        if (a.relation(s).size() != b.relation(s).size()) return false;
    std::vector<Element> p(a.window());
    std::iota(p.begin(), p.end(), Element{0});
    do {
        bool ok = true;
        for (std::size_t s = 0; s < a.symbol_count() && ok; ++s)
            for (const auto& t : a.relation(s)) {
                Tuple u(t.size());
                for (std::size_t i = 0; i < t.size(); ++i) u[i] = p[t[i]];
                if (!b.holds(s, u)) {
                    ok = false;
                    break;
                }
            }
        if (ok) return true;
    } while (std::next_permutation(p.begin(), p.end()));
    return false;
}

inline bool is_tournament(const FinStructure& m, std::size_t s = 0) {
    for (Element a = 0; a < m.window(); ++a) {
        if (m.holds(s, std::array<Element, 2>{a, a})) return false;
        for (Element b = a + 1; b < m.window(); ++b)
            if (m.holds(s, std::array<Element, 2>{a, b}) == m.holds(s, std::array<Element, 2>{b, a})) return false;
    }
    return true;
}

// Distance between distinct x,y in a metric window, 0 if undefined.
inline unsigned metric_distance(const Work& w, Element x, Element y) {
    for (std::size_t s = 0; s < w.language().size(); ++s)
        if (w.holds(s, {x, y})) return static_cast<unsigned>(s + 1);
    return 0;
}

inline bool has_clique_with(const Work& w, Element z, unsigned size) {
    // Cliques of `size` vertices containing z, in a symmetric graph (symbol 0).
    std::vector<Element> nbrs;
    for (Element v = 0; v < w.size(); ++v)
        if (v != z && w.holds(0, {z, v})) nbrs.push_back(v);
    if (size <= 1) return true;
    std::vector<Element> chosen;
    auto rec = [&](auto&& self, std::size_t start) -> bool {
        if (chosen.size() + 1 == size) return true;
        for (std::size_t i = start; i < nbrs.size(); ++i) {
            bool ok = std::all_of(chosen.begin(), chosen.end(),
                                  [&](Element c) { return w.holds(0, {c, nbrs[i]}); });
            if (!ok) continue;
            chosen.push_back(nbrs[i]);
            if (self(self, i + 1)) return true;
            chosen.pop_back();
        }
        return false;
    };
    return rec(rec, 0);
}

inline bool henson_violation_with(const Work& w, Element z, const std::vector<FinStructure>& forbidden) {
    std::vector<Element> nbrs;
    for (Element v = 0; v < w.size(); ++v)
        if (v != z && (w.holds(0, {z, v}) || w.holds(0, {v, z}))) nbrs.push_back(v);
    for (const auto& f : forbidden) {
        if (f.window() == 0 || f.window() - 1 > nbrs.size()) continue;
        for (auto& sub : combinations(nbrs, f.window() - 1)) {
            sub.push_back(z);
            std::sort(sub.begin(), sub.end());
            bool complete = true;
            for (std::size_t i = 0; i < sub.size() && complete; ++i)
                for (std::size_t j = i + 1; j < sub.size(); ++j)
                    if (!w.holds(0, {sub[i], sub[j]}) && !w.holds(0, {sub[j], sub[i]})) {
                        complete = false;
                        break;
                    }
            if (!complete) continue;
            FinStructure::Builder b(Language("henson", {{"A", 2}}), sub.size());
            for (std::size_t i = 0; i < sub.size(); ++i)
                for (std::size_t j = 0; j < sub.size(); ++j)
                    if (i != j && w.holds(0, {sub[i], sub[j]}))
                        b.add(std::size_t{0}, Tuple{static_cast<Element>(i), static_cast<Element>(j)});
            auto sf = std::move(b).build();
            FinStructure relabeled(Language("henson", {{"A", 2}}), f.window(),
                                   {std::vector<Tuple>(f.relation(0).begin(), f.relation(0).end())});
            if (isomorphic_brute(sf, relabeled)) return true;
        }
    }
    return false;
}

// Checks every axiom instance that involves point z, assuming the window
// without z already satisfies the class axioms.
inline bool point_consistent(const CatalogId& c, const Work& w, Element z) {
    const std::size_t n = w.size();
    switch (c.kind) {
        case CatalogKind::PureSet: return true;
        case CatalogKind::Rado:
        case CatalogKind::KnFree:
        case CatalogKind::MatchedSet: {
            if (w.holds(0, {z, z})) return false;
            std::size_t deg = 0;
            for (Element v = 0; v < n; ++v) {
                if (v == z) continue;
                bool a = w.holds(0, {z, v}), b = w.holds(0, {v, z});
                if (a != b) return false;
                if (a) {
                    ++deg;
                    if (c.kind == CatalogKind::MatchedSet) {
                        for (Element u = 0; u < n; ++u)
                            if (u != z && u != v && w.holds(0, {v, u})) return false;
                    }
                }
            }
            if (c.kind == CatalogKind::MatchedSet && deg > 1) return false;
            if (c.kind == CatalogKind::KnFree && has_clique_with(w, z, c.param)) return false;
            return true;
        }
        case CatalogKind::GenericTournament:
        case CatalogKind::DenseLinearOrder: {
            if (w.holds(0, {z, z})) return false;
            for (Element v = 0; v < n; ++v)
                if (v != z && w.holds(0, {z, v}) == w.holds(0, {v, z})) return false;
            if (c.kind == CatalogKind::DenseLinearOrder) {
                for (Element x = 0; x < n; ++x)
                    for (Element y = 0; y < n; ++y) {
                        if (x == z || y == z || x == y) continue;
                        if (w.holds(0, {x, z}) && w.holds(0, {z, y}) && !w.holds(0, {x, y})) return false;
                        if (w.holds(0, {x, y}) && w.holds(0, {y, z}) && !w.holds(0, {x, z})) return false;
                        if (w.holds(0, {z, x}) && w.holds(0, {x, y}) && !w.holds(0, {z, y})) return false;
                    }
            }
            return true;
        }
        case CatalogKind::GenericPoset: {
            if (w.holds(0, {z, z})) return false;
            for (Element x = 0; x < n; ++x) {
                if (x == z) continue;
                if (w.holds(0, {x, z}) && w.holds(0, {z, x})) return false;
                for (Element y = 0; y < n; ++y) {
                    if (y == z || y == x) continue;
                    if (w.holds(0, {x, z}) && w.holds(0, {z, y}) && !w.holds(0, {x, y})) return false;
                    if (w.holds(0, {x, y}) && w.holds(0, {y, z}) && !w.holds(0, {x, z})) return false;
                    if (w.holds(0, {z, x}) && w.holds(0, {x, y}) && !w.holds(0, {z, y})) return false;
                }
            }
            return true;
        }
        case CatalogKind::KUniformHypergraph: return true;
        case CatalogKind::BoundedMetric: {
            for (std::size_t s = 0; s < w.language().size(); ++s)
                if (w.holds(s, {z, z})) return false;
            for (Element x = 0; x < n; ++x) {
                if (x == z) continue;
                unsigned cnt = 0;
                for (std::size_t s = 0; s < w.language().size(); ++s) {
                    bool a = w.holds(s, {z, x}), b = w.holds(s, {x, z});
                    if (a != b) return false;
                    cnt += a;
                }
                if (cnt != 1) return false;
            }
            for (Element x = 0; x < n; ++x)
                for (Element y = x + 1; y < n; ++y) {
                    if (x == z || y == z) continue;
                    int dxz = static_cast<int>(metric_distance(w, x, z));
                    int dyz = static_cast<int>(metric_distance(w, y, z));
                    int dxy = static_cast<int>(metric_distance(w, x, y));
                    if (dxy > dxz + dyz || dxz > dxy + dyz || dyz > dxy + dxz) return false;
                }
            return true;
        }
        case CatalogKind::Henson: {
            if (w.holds(0, {z, z})) return false;
            for (Element v = 0; v < n; ++v)
                if (v != z && w.holds(0, {z, v}) && w.holds(0, {v, z})) return false;
            return !henson_violation_with(w, z, c.forbidden);
        }
        case CatalogKind::CyclicOrder: break;
    }
    return true;
}

// Full axiom check for a cyclic order on a window (ternary, not incremental).
inline bool cyclic_order_axioms(const FinStructure& m) {
    const Element n = static_cast<Element>(m.window());
    auto C = [&](Element a, Element b, Element c) { return m.holds(0, std::array<Element, 3>{a, b, c}); };
    for (const auto& t : m.relation(0))
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) return false;
    for (Element a = 0; a < n; ++a)
        for (Element b = 0; b < n; ++b)
            for (Element c = 0; c < n; ++c) {
                if (a == b || b == c || a == c) continue;
                if (C(a, b, c) != C(b, c, a)) return false;
                if (C(a, b, c) == C(a, c, b)) return false;
                if (!C(a, b, c)) continue;
                for (Element d = 0; d < n; ++d) {
                    if (d == a || d == b || d == c) continue;
                    if (C(a, c, d) && !C(a, b, d)) return false;
                }
            }
    return true;
}

}  // namespace detail

inline CatalogId CatalogId::henson(std::vector<FinStructure> forbidden) {
    for (const auto& f : forbidden) {
        if (f.symbol_count() != 1 || f.language()[0].arity != 2)
            throw InputError("forbidden Henson patterns must have a single binary relation");
        if (!detail::is_tournament(f)) throw InputError("forbidden Henson patterns must be tournaments");
        if (f.window() < 2) throw InputError("forbidden tournaments need at least 2 points");
    }
    return {CatalogKind::Henson, static_cast<unsigned>(forbidden.size()), std::move(forbidden)};
}

inline CatalogId CatalogId::parse(std::string_view token) {
    auto colon = token.find(':');
    std::string head(token.substr(0, colon));
    std::string arg = colon == std::string_view::npos ? "" : std::string(token.substr(colon + 1));
    auto need_arg = [&](std::string_view what) {
        if (arg.empty()) throw InputError("catalog '" + head + "' needs a parameter (" + std::string(what) + ")");
        return static_cast<unsigned>(detail::parse_uint(arg, what));
    };
    if (head == "pureset") return pure_set();
    if (head == "dlo") return dlo();
    if (head == "cyclic") return cyclic();
    if (head == "poset") return poset();
    if (head == "rado") return rado();
    if (head == "tournament") return tournament();
    if (head == "matched") return matched();
    if (head == "kfree") return kn_free(need_arg("n"));
    if (head == "hyper") return hypergraph(need_arg("k"));
    if (head == "metric") return metric(need_arg("d"));
    if (head == "henson") {
        std::vector<FinStructure> f;
        if (!arg.empty())
            for (const auto& path : detail::split(arg, ',')) f.push_back(read_structure_file(path));
        return henson(std::move(f));
    }
    throw InputError("unknown catalog '" + std::string(token) + "'");
}

inline std::string CatalogId::token() const {
    switch (kind) {
        case CatalogKind::PureSet: return "pureset";
        case CatalogKind::DenseLinearOrder: return "dlo";
        case CatalogKind::CyclicOrder: return "cyclic";
        case CatalogKind::GenericPoset: return "poset";
        case CatalogKind::Rado: return "rado";
        case CatalogKind::KnFree: return "kfree:" + std::to_string(param);
        case CatalogKind::KUniformHypergraph: return "hyper:" + std::to_string(param);
        case CatalogKind::GenericTournament: return "tournament";
        case CatalogKind::BoundedMetric: return "metric:" + std::to_string(param);
        case CatalogKind::MatchedSet: return "matched";
        case CatalogKind::Henson: return "henson";
    }
    return "?";
}

inline bool age_member(const CatalogId& c, const FinStructure& m) {
    auto lang = catalog_language(c);
    if (!m.language().same_symbols(lang))
        throw InputError("structure language " + m.language().name() + " does not match catalog " + c.token());
    switch (c.kind) {
        case CatalogKind::PureSet: return true;
        case CatalogKind::CyclicOrder: return detail::cyclic_order_axioms(m);
        case CatalogKind::KUniformHypergraph:
            for (const auto& t : m.relation(0)) {
                Tuple s = t;
                std::sort(s.begin(), s.end());
                if (std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
                do
                    if (!m.holds(0, s)) return false;
                while (std::next_permutation(s.begin(), s.end()));
            }
            return true;
        default: break;
    }
    // Every other class is checked point by point on a growing copy.
    detail::Work w(lang, 0);
    for (Element z = 0; z < m.window(); ++z) {
        w.add_point();
        for (std::size_t s = 0; s < m.symbol_count(); ++s)
            for (const auto& t : m.relation(s))
                if (std::find(t.begin(), t.end(), z) != t.end() &&
                    std::all_of(t.begin(), t.end(), [&](Element e) { return e <= z; }))
                    w.add(s, t);
        if (!detail::point_consistent(c, w, z)) return false;
    }
    return true;
}

enum class GenerationMode { DeterministicGeneric, Randomized };

class GeneratorState {
public:
    explicit GeneratorState(CatalogId catalog, GenerationMode mode = GenerationMode::DeterministicGeneric,
                            std::uint64_t seed = 0)
        : catalog_(std::move(catalog)), mode_(mode), seed_(mode == GenerationMode::Randomized ? seed : 0),
          current_(catalog_language(catalog_), 0, {}) {}

    const CatalogId& catalog() const noexcept { return catalog_; }
    GenerationMode mode() const noexcept { return mode_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const FinStructure& current() const noexcept { return current_; }
    std::size_t window() const noexcept { return current_.window(); }

private:
    // Position in the greedy requirement schedule.
    struct Cursor {
        std::size_t level = 0;  // 0: the empty parameter set; L > 0: sets with max element L-1
        std::size_t subset = 0;
        std::size_t pattern = 0;
        friend bool operator==(const Cursor&, const Cursor&) = default;
    };

    friend GeneratorState extend_window(const GeneratorState& s, std::size_t target);

    CatalogId catalog_;
    GenerationMode mode_;
    std::uint64_t seed_;
    FinStructure current_;
    Cursor cursor_;
};

namespace detail {

// 1/2, 1/4, 3/4, 1/8, 3/8, ...
inline double dyadic(std::uint64_t i) {
    std::uint64_t level = 0;
    while ((std::uint64_t{2} << level) <= i + 1) ++level;
    std::uint64_t pos = i + 1 - (std::uint64_t{1} << level);
    return static_cast<double>(2 * pos + 1) / static_cast<double>(std::uint64_t{1} << (level + 1));
}

inline double order_key(const GeneratorState& s, Element i) {
    if (s.mode() == GenerationMode::Randomized) return rng::uniform(s.seed(), {rng::tag("order-key"), i});
    if (s.catalog().kind == CatalogKind::CyclicOrder) return i == 0 ? 0.0 : dyadic(i - 1);
    return dyadic(i);
}

// Relations between z and the parameter set A, for one greedy requirement.
using Pattern = std::vector<std::pair<std::size_t, Tuple>>;

inline std::vector<Pattern> one_point_patterns(const CatalogId& c, const std::vector<Element>& A, Element z) {
    std::vector<Pattern> out;
    const std::size_t m = A.size();
    auto power = [](std::size_t b, std::size_t e) {
        std::size_t p = 1;
        for (std::size_t i = 0; i < e; ++i) p *= b;
        return p;
    };
    switch (c.kind) {
        case CatalogKind::GenericTournament:
            for (std::size_t mask = 0; mask < power(2, m); ++mask) {
                Pattern p;
                for (std::size_t i = 0; i < m; ++i)
                    p.push_back({0, (mask >> i) & 1U ? Tuple{A[i], z} : Tuple{z, A[i]}});
                out.push_back(std::move(p));
            }
            break;
        case CatalogKind::KnFree:
        case CatalogKind::Rado:
            for (std::size_t mask = 0; mask < power(2, m); ++mask) {
                Pattern p;
                for (std::size_t i = 0; i < m; ++i)
                    if ((mask >> i) & 1U) {
                        p.push_back({0, {A[i], z}});
                        p.push_back({0, {z, A[i]}});
                    }
                out.push_back(std::move(p));
            }
            break;
        case CatalogKind::KUniformHypergraph: {
            auto faces = combinations(A, c.param - 1);
            for (std::size_t mask = 0; mask < power(2, faces.size()); ++mask) {
                Pattern p;
                for (std::size_t i = 0; i < faces.size(); ++i)
                    if ((mask >> i) & 1U) {
                        Tuple t = faces[i];
                        t.push_back(z);
                        std::sort(t.begin(), t.end());
                        do p.push_back({0, t});
                        while (std::next_permutation(t.begin(), t.end()));
                    }
                out.push_back(std::move(p));
            }
            break;
        }
        case CatalogKind::GenericPoset:
        case CatalogKind::Henson:
            for (std::size_t code = 0; code < power(3, m); ++code) {
                Pattern p;
                std::size_t x = code;
                for (std::size_t i = 0; i < m; ++i, x /= 3) {
                    if (x % 3 == 1) p.push_back({0, {A[i], z}});
                    if (x % 3 == 2) p.push_back({0, {z, A[i]}});
                }
                out.push_back(std::move(p));
            }
            break;
        case CatalogKind::BoundedMetric:
            for (std::size_t code = 0; code < power(c.param, m); ++code) {
                Pattern p;
                std::size_t x = code;
                for (std::size_t i = 0; i < m; ++i, x /= c.param) {
                    p.push_back({x % c.param, {A[i], z}});
                    p.push_back({x % c.param, {z, A[i]}});
                }
                out.push_back(std::move(p));
            }
            break;
        default: out.push_back({}); break;
    }
    for (auto& p : out) std::sort(p.begin(), p.end());
    return out;
}

// Relations between w and A in pattern form, with w written as `as`.
inline Pattern pattern_of(const Work& work, const std::vector<Element>& A, Element w, Element as) {
    Pattern p;
    std::vector<Element> pool = A;
    pool.push_back(w);
    for (std::size_t s = 0; s < work.language().size(); ++s) {
        unsigned r = work.language()[s].arity;
        for_each_tuple(pool.size(), r, [&](const Tuple& idx) {
            bool has_w = std::find(idx.begin(), idx.end(), static_cast<Element>(A.size())) != idx.end();
            if (!has_w) return;
            Tuple t(r), named(r);
            for (unsigned i = 0; i < r; ++i) {
                t[i] = pool[idx[i]];
                named[i] = idx[i] == A.size() ? as : pool[idx[i]];
            }
            if (work.holds(s, t)) p.push_back({s, named});
        });
    }
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
}

// Is the pattern consistent with the class on A u {z} alone?
inline bool pattern_age_consistent(const CatalogId& c, const Work& work, const std::vector<Element>& A,
                                   const Pattern& pattern, Element zglobal) {
    std::vector<Element> pool = A;
    std::sort(pool.begin(), pool.end());
    Work small(work.language(), 0);
    std::vector<Element> local(work.size() + 1, 0);
    for (Element a : pool) local[a] = small.add_point();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t s = 0; s < work.language().size(); ++s) {
            unsigned r = work.language()[s].arity;
            for_each_tuple(i + 1, r, [&](const Tuple& idx) {
                if (std::find(idx.begin(), idx.end(), static_cast<Element>(i)) == idx.end()) return;
                Tuple t(r), lt(r);
                for (unsigned j = 0; j < r; ++j) {
                    t[j] = pool[idx[j]];
                    lt[j] = local[pool[idx[j]]];
                }
                if (work.holds(s, t)) small.add(s, lt);
            });
        }
    }
    Element z = small.add_point();
    for (const auto& [s, t] : pattern) {
        Tuple lt(t.size());
        for (std::size_t j = 0; j < t.size(); ++j) lt[j] = t[j] == zglobal ? z : local[t[j]];
        small.add(s, lt);
    }
    if (c.kind == CatalogKind::KUniformHypergraph) return true;
    return point_consistent(c, small, z);
}

// Adds the pattern plus the class-specific completion towards points outside A.
inline bool realize_pattern(const CatalogId& c, Work& work, const std::vector<Element>& A, const Pattern& pattern,
                            Element z) {
    for (const auto& [s, t] : pattern) work.add(s, t);
    std::vector<bool> inA(work.size(), false);
    for (Element a : A) inA[a] = true;
    switch (c.kind) {
        case CatalogKind::GenericTournament:
            for (Element y = 0; y < z; ++y)
                if (!inA[y]) work.add(0, {y, z});
            break;
        case CatalogKind::GenericPoset: {
            std::vector<Element> down, up;
            for (Element a : A) {
                if (work.holds(0, {a, z})) down.push_back(a);
                if (work.holds(0, {z, a})) up.push_back(a);
            }
            for (Element y = 0; y < z; ++y) {
                for (Element a : down)
                    if (y == a || work.holds(0, {y, a})) work.add(0, {y, z});
                for (Element a : up)
                    if (y == a || work.holds(0, {a, y})) work.add(0, {z, y});
            }
            // The closure must not alter the requested type over A.
            for (Element a : A) {
                bool want_below = std::find(down.begin(), down.end(), a) != down.end();
                bool want_above = std::find(up.begin(), up.end(), a) != up.end();
                if (work.holds(0, {a, z}) != want_below || work.holds(0, {z, a}) != want_above) return false;
            }
            break;
        }
        case CatalogKind::BoundedMetric: {
            const unsigned d = c.param;
            for (Element y = 0; y < z; ++y) {
                if (inA[y]) continue;
                unsigned dist = d;
                for (Element a : A) {
                    unsigned via = metric_distance(work, z, a) + metric_distance(work, a, y);
                    dist = std::min(dist, via);
                }
                work.add(dist - 1, {z, y});
                work.add(dist - 1, {y, z});
            }
            break;
        }
        default: break;
    }
    return point_consistent(c, work, z);
}

inline std::vector<std::vector<Element>> schedule_subsets(std::size_t level) {
    if (level == 0) return {{}};
    const auto top = static_cast<Element>(level - 1);
    std::vector<Element> below(top);
    std::iota(below.begin(), below.end(), Element{0});
    std::vector<std::vector<Element>> out;
    for (std::size_t r = 0; r + 1 <= kScheduleWidth && r <= below.size(); ++r)
        for (auto& s : combinations(below, r)) {
            s.push_back(top);
            out.push_back(std::move(s));
        }
    return out;
}

inline bool uses_greedy_schedule(CatalogKind k) {
    switch (k) {
        case CatalogKind::GenericPoset:
        case CatalogKind::KnFree:
        case CatalogKind::KUniformHypergraph:
        case CatalogKind::GenericTournament:
        case CatalogKind::BoundedMetric:
        case CatalogKind::Henson: return true;
        default: return false;
    }
}

inline std::size_t snapshot_tuples(const Work& w, std::vector<std::size_t>& counts) {
    counts.resize(w.language().size());
    for (std::size_t s = 0; s < counts.size(); ++s) counts[s] = w.count(s);
    return counts.size();
}

inline void rollback(Work& w, const std::vector<std::size_t>& counts) {
    for (std::size_t s = 0; s < counts.size(); ++s) w.remove_last_point_tuples(s, counts[s]);
}

inline bool pick(std::uint64_t seed, std::initializer_list<std::uint64_t> words, double p) {
    return rng::uniform(seed, words) < p;
}

// Randomized one-point step for classes without an explicit random model.
inline void random_point(const GeneratorState& st, Work& w, Element z) {
    const auto& c = st.catalog();
    const auto seed = st.seed();
    switch (c.kind) {
        case CatalogKind::KnFree:
            for (Element i = 0; i < z; ++i) {
                if (!pick(seed, {rng::tag("edge"), i, z}, 0.5)) continue;
                std::vector<std::size_t> snap;
                snapshot_tuples(w, snap);
                w.add(0, {i, z});
                w.add(0, {z, i});
                if (has_clique_with(w, z, c.param)) rollback(w, snap);
            }
            break;
        case CatalogKind::KUniformHypergraph: {
            std::vector<Element> before(z);
            std::iota(before.begin(), before.end(), Element{0});
            for (auto& face : combinations(before, c.param - 1)) {
                std::uint64_t h = rng::tag("hyperedge");
                for (Element e : face) h = rng::mix64(h ^ (e + rng::kGolden));
                if (!pick(seed, {h, z}, 0.5)) continue;
                face.push_back(z);
                w.add_symmetric(0, face);
            }
            break;
        }
        case CatalogKind::GenericTournament:
            for (Element i = 0; i < z; ++i) {
                if (pick(seed, {rng::tag("arc"), i, z}, 0.5)) w.add(0, {i, z});
                else w.add(0, {z, i});
            }
            break;
        case CatalogKind::GenericPoset: {
            // 0 undecided, 1 below z, 2 above z, 3 incomparable
            std::vector<int> state(z, 0);
            for (Element i = 0; i < z; ++i) {
                if (state[i] != 0) continue;
                auto try_side = [&](bool below) {
                    std::vector<Element> forced{i};
                    for (Element x = 0; x < z; ++x)
                        if (below ? w.holds(0, {x, i}) : w.holds(0, {i, x})) forced.push_back(x);
                    for (Element x : forced) {
                        int want = below ? 1 : 2;
                        if (state[x] != 0 && state[x] != want) return false;
                    }
                    // Transitivity through z: below(z) < above(z).
                    for (Element x : forced)
                        for (Element y = 0; y < z; ++y) {
                            if (below && state[y] == 2 && !w.holds(0, {x, y})) return false;
                            if (!below && state[y] == 1 && !w.holds(0, {y, x})) return false;
                        }
                    for (Element x : forced) state[x] = below ? 1 : 2;
                    return true;
                };
                double u = rng::uniform(seed, {rng::tag("poset"), i, z});
                bool done = false;
                if (u < 1.0 / 3.0) done = try_side(true);
                else if (u < 2.0 / 3.0) done = try_side(false);
                if (!done) state[i] = 3;
            }
            for (Element x = 0; x < z; ++x) {
                if (state[x] == 1) w.add(0, {x, z});
                if (state[x] == 2) w.add(0, {z, x});
            }
            break;
        }
        case CatalogKind::BoundedMetric: {
            const int d = static_cast<int>(c.param);
            std::vector<int> dz(z, 0);
            for (Element i = 0; i < z; ++i) {
                int lo = 1, hi = d;
                for (Element j = 0; j < i; ++j) {
                    int dji = static_cast<int>(metric_distance(w, j, i));
                    lo = std::max(lo, std::abs(dz[j] - dji));
                    hi = std::min(hi, dz[j] + dji);
                }
                if (lo > hi) throw std::logic_error("metric one-point extension has an empty interval");
                auto span = static_cast<std::uint64_t>(hi - lo + 1);
                dz[i] = lo + static_cast<int>(rng::hash(seed, {rng::tag("dist"), i, z}) % span);
            }
            for (Element i = 0; i < z; ++i) {
                w.add(static_cast<std::size_t>(dz[i] - 1), {i, z});
                w.add(static_cast<std::size_t>(dz[i] - 1), {z, i});
            }
            break;
        }
        case CatalogKind::Henson:
            for (Element i = 0; i < z; ++i) {
                double u = rng::uniform(seed, {rng::tag("henson"), i, z});
                if (u < 1.0 / 3.0) continue;
                std::vector<std::size_t> snap;
                snapshot_tuples(w, snap);
                if (u < 2.0 / 3.0) w.add(0, {i, z});
                else w.add(0, {z, i});
                if (henson_violation_with(w, z, c.forbidden)) rollback(w, snap);
            }
            break;
        default: break;
    }
}

}  // namespace detail

inline GeneratorState extend_window(const GeneratorState& s, std::size_t target) {
    if (target < s.window())
        throw InputError("extend_window target " + std::to_string(target) + " is below the current window " +
                         std::to_string(s.window()));
    if (target == s.window()) return s;
    GeneratorState out = s;
    const auto& c = s.catalog();
    auto work = detail::Work::from(s.current());
    const bool random = s.mode() == GenerationMode::Randomized;

    while (work.size() < target) {
        const Element z = work.add_point();
        switch (c.kind) {
            case CatalogKind::PureSet: break;
            case CatalogKind::DenseLinearOrder: {
                double kz = detail::order_key(s, z);
                for (Element i = 0; i < z; ++i) {
                    if (detail::order_key(s, i) < kz) work.add(0, {i, z});
                    else work.add(0, {z, i});
                }
                break;
            }
            case CatalogKind::CyclicOrder: {
                std::vector<double> key(z + 1);
                for (Element i = 0; i <= z; ++i) key[i] = detail::order_key(s, i);
                for (Element i = 0; i < z; ++i)
                    for (Element j = i + 1; j < z; ++j) {
                        std::array<Element, 3> t{i, j, z};
                        std::sort(t.begin(), t.end(), [&](Element a, Element b) { return key[a] < key[b]; });
                        work.add(0, {t[0], t[1], t[2]});
                        work.add(0, {t[1], t[2], t[0]});
                        work.add(0, {t[2], t[0], t[1]});
                    }
                break;
            }
            case CatalogKind::Rado:
                for (Element i = 0; i < z; ++i) {
                    bool edge = random ? detail::pick(s.seed(), {rng::tag("edge"), i, z}, 0.5)
                                       : (i < 32 && ((z >> i) & 1U));
                    if (edge) {
                        work.add(0, {i, z});
                        work.add(0, {z, i});
                    }
                }
                break;
            case CatalogKind::MatchedSet:
                if (z % 2 == 1) {
                    work.add(0, {z - 1, z});
                    work.add(0, {z, z - 1});
                }
                break;
            default:
                if (random) {
                    detail::random_point(s, work, z);
                    break;
                }
                // Greedy schedule.
                {
                    auto& cur = out.cursor_;
                    bool placed = false;
                    std::size_t cached_level = SIZE_MAX, cached_subset = SIZE_MAX;
                    std::vector<std::vector<Element>> subsets;
                    std::vector<detail::Pattern> patterns;
                    while (!placed) {
                        if (cur.level > 0 && cur.level - 1 >= z) break;  // no requirement over existing points
                        if (cached_level != cur.level) {
                            subsets = detail::schedule_subsets(cur.level);
                            cached_level = cur.level;
                            cached_subset = SIZE_MAX;
                        }
                        if (cur.subset >= subsets.size()) {
                            ++cur.level;
                            cur.subset = 0;
                            cur.pattern = 0;
                            continue;
                        }
                        const auto& A = subsets[cur.subset];
                        if (cached_subset != cur.subset) {
                            patterns = detail::one_point_patterns(c, A, z);
                            cached_subset = cur.subset;
                        }
                        if (cur.pattern >= patterns.size()) {
                            ++cur.subset;
                            cur.pattern = 0;
                            continue;
                        }
                        const auto& pat = patterns[cur.pattern];
                        ++cur.pattern;
                        if (!detail::pattern_age_consistent(c, work, A, pat, z)) continue;
                        bool realized = false;
                        for (Element w = 0; w < z && !realized; ++w) {
                            if (std::find(A.begin(), A.end(), w) != A.end()) continue;
                            realized = detail::pattern_of(work, A, w, z) == pat;
                        }
                        if (realized) continue;
                        std::vector<std::size_t> snap;
                        detail::snapshot_tuples(work, snap);
                        if (detail::realize_pattern(c, work, A, pat, z)) placed = true;
                        else detail::rollback(work, snap);
                    }
                    if (!placed) {
                        if (!detail::realize_pattern(c, work, {}, {}, z))
                            throw std::logic_error("default one-point extension violates the class axioms");
                    }
                }
                break;
        }
    }
    out.current_ = work.build();
    return out;
}

inline FinStructure generate(const CatalogId& c, std::size_t n,
                             GenerationMode mode = GenerationMode::DeterministicGeneric, std::uint64_t seed = 0) {
    return extend_window(GeneratorState(c, mode, seed), n).current();
}

// Least window element z with qf_type(current, A+z) == desired, or nullopt.
// Never grows the window.
inline std::optional<Element> witness_extension(const GeneratorState& s, std::span<const Element> params,
                                                const QfType& desired) {
    const auto& m = s.current();
    if (desired.arity() != params.size() + 1)
        throw InputError("desired type must have arity |A|+1");
    auto lang = catalog_language(s.catalog());
    auto realized = desired.realize(m.language());
    if (!age_member(s.catalog(), realized))
        throw InputError("desired type is not consistent with the age of " + s.catalog().token());
    Tuple head;
    for (std::size_t i = 0; i < params.size(); ++i) head.push_back(desired.equality_pattern()[i]);
    if (!(qf_type(realized, head) == qf_type(m, params)))
        throw InputError("desired type does not restrict to the type of the parameters");
    Tuple t(params.begin(), params.end());
    t.push_back(0);
    for (Element z = 0; z < m.window(); ++z) {
        t.back() = z;
        if (qf_type(m, t) == desired) return z;
    }
    return std::nullopt;
}

}  // namespace homlab
