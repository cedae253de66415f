#pragma once

// Orbit partitions of pointwise stabilizers on k-tuples (as qf-types over a
// parameter set), the join test <G_A, G_B> = G_{A n B}, algebraic-closure
// probing by block growth, and separating tuples.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homlab/catalog.hpp"
#include "homlab/structure.hpp"

namespace homlab {

struct OrbitPartition {
    std::size_t window = 0;
    unsigned arity = 0;
    std::vector<Element> params;
    std::vector<std::string> keys;           // qf-type key of (params, t) per block
    std::vector<std::vector<Tuple>> blocks;  // in order of first tuple, lexicographic

    std::size_t block_count() const noexcept { return blocks.size(); }

    // Block index of tuple t (linear in the number of blocks).
    std::optional<std::size_t> block_of(const Tuple& t) const {
        for (std::size_t b = 0; b < blocks.size(); ++b)
            if (std::binary_search(blocks[b].begin(), blocks[b].end(), t)) return b;
        return std::nullopt;
    }

    // Block index per tuple, indexed by the base-window code of the tuple.
    std::vector<std::uint32_t> labels() const {
        std::vector<std::uint32_t> out(detail::checked_pow(window, arity).value_or(0));
        for (std::size_t b = 0; b < blocks.size(); ++b)
            for (const auto& t : blocks[b]) out[detail::encode(t, window)] = static_cast<std::uint32_t>(b);
        return out;
    }
};

namespace detail {

inline void check_params(const FinStructure& m, std::span<const Element> a) {
    for (Element e : a)
        if (e >= m.window())
            throw InputError("parameter " + std::to_string(e) + " outside window of size " + std::to_string(m.window()));
}

inline std::vector<Element> normalized(std::span<const Element> a) {
    std::vector<Element> v(a.begin(), a.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0U); }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace detail

// Partition of window^k by qf-type over A. For windows of ultrahomogeneous
// structures this is the trace of the G_A-orbits on the window.
inline OrbitPartition tuple_orbits(const FinStructure& m, unsigned k, std::span<const Element> a) {
    detail::check_params(m, a);
    if (!detail::checked_pow(m.window(), k) || *detail::checked_pow(m.window(), k) > (std::uint64_t{1} << 26))
        throw InputError("window^k too large to enumerate");
    OrbitPartition p;
    p.window = m.window();
    p.arity = k;
    p.params = detail::normalized(a);
    std::map<std::string, std::size_t> index;
    Tuple full(p.params.begin(), p.params.end());
    const std::size_t base = full.size();
    full.resize(base + k);
    for_each_tuple(m.window(), k, [&](const Tuple& t) {
        std::copy(t.begin(), t.end(), full.begin() + static_cast<std::ptrdiff_t>(base));
        auto key = qf_type(m, full).key();
        auto [it, fresh] = index.emplace(key, p.blocks.size());
        if (fresh) {
            p.blocks.emplace_back();
            p.keys.push_back(key);
        }
        p.blocks[it->second].push_back(t);
    });
    return p;
}

inline OrbitPartition tuple_orbits(const CatalogId& c, const FinStructure& m, unsigned k, std::span<const Element> a) {
    if (!m.language().same_symbols(catalog_language(c)))
        throw InputError("structure does not belong to catalog " + c.token());
    return tuple_orbits(m, k, a);
}

struct GagbResult {
    bool holds = false;
    std::size_t window = 0;  // window at which the verdict was reached
    std::size_t join_blocks = 0;
    std::size_t meet_blocks = 0;
    std::optional<std::pair<Tuple, Tuple>> certificate;  // same G_{AnB} block, different join components
};

// Compares the join of the G_A and G_B partitions with the G_{AnB} partition
// on a given window. With checked > 0 only tuples inside the first `checked`
// points are compared; the rest of the window still links them.
inline GagbResult gagb_on(const FinStructure& m, std::span<const Element> a, std::span<const Element> b, unsigned k,
                          std::size_t checked = 0) {
    auto A = detail::normalized(a), B = detail::normalized(b);
    std::vector<Element> AB;
    std::set_intersection(A.begin(), A.end(), B.begin(), B.end(), std::back_inserter(AB));
    auto pa = tuple_orbits(m, k, A), pb = tuple_orbits(m, k, B), pab = tuple_orbits(m, k, AB);
    const std::size_t n = m.window();
    if (checked == 0 || checked > n) checked = n;
    auto inside = [&](const Tuple& t) { return std::all_of(t.begin(), t.end(), [&](Element e) { return e < checked; }); };
    detail::UnionFind uf(detail::checked_pow(n, k).value_or(0));
    for (const auto* part : {&pa, &pb})
        for (const auto& block : part->blocks)
            for (std::size_t i = 1; i < block.size(); ++i)
                uf.unite(static_cast<std::uint32_t>(detail::encode(block[0], n)),
                         static_cast<std::uint32_t>(detail::encode(block[i], n)));
    GagbResult r;
    r.window = n;
    std::set<std::uint32_t> roots;
    r.holds = true;
    for (const auto& block : pab.blocks) {
        std::optional<std::pair<const Tuple*, std::uint32_t>> first;
        for (const auto& t : block) {
            if (!inside(t)) continue;
            auto c = uf.find(static_cast<std::uint32_t>(detail::encode(t, n)));
            roots.insert(c);
            if (!first) first = std::make_pair(&t, c);
            else if (c != first->second && r.holds) {
                r.holds = false;
                r.certificate = std::make_pair(*first->first, t);
            }
        }
        r.meet_blocks += first.has_value();
    }
    r.join_blocks = roots.size();
    return r;
}

// Window truncation can only split orbits, so a failure is retried once at
// double window before it is reported. The retry still compares only tuples
// of the original window; the added points serve as witnesses.
inline GagbResult gagb_check(const GeneratorState& state, std::span<const Element> a, std::span<const Element> b,
                             std::size_t window, unsigned k) {
    for (Element e : a)
        if (e >= window) throw InputError("A element outside window");
    for (Element e : b)
        if (e >= window) throw InputError("B element outside window");
    auto at = [&](std::size_t n) {
        if (state.window() == n) return state.current();
        if (state.window() > n) return prefix(state.current(), n);
        return extend_window(state, n).current();
    };
    auto r = gagb_on(at(window), a, b, k);
    if (!r.holds) r = gagb_on(at(2 * window), a, b, k, window);
    return r;
}

inline GagbResult gagb_check(const CatalogId& c, std::span<const Element> a, std::span<const Element> b,
                             std::size_t window, unsigned k,
                             GenerationMode mode = GenerationMode::DeterministicGeneric, std::uint64_t seed = 0) {
    return gagb_check(GeneratorState(c, mode, seed), a, b, window, k);
}

// Elements of the initial window whose qf-type-over-A block does not grow when
// the window grows to max_window.
inline std::vector<Element> acl_probe(const CatalogId& c, std::span<const Element> a, std::size_t max_window,
                                      GenerationMode mode = GenerationMode::DeterministicGeneric,
                                      std::uint64_t seed = 0) {
    auto A = detail::normalized(a);
    std::size_t initial = std::max<std::size_t>(A.empty() ? 0 : A.back() + 2, 8);
    if (max_window <= initial)
        throw InputError("acl probe needs max_window > " + std::to_string(initial));
    GeneratorState s(c, mode, seed);
    s = extend_window(s, initial);
    auto small = tuple_orbits(s.current(), 1, A);
    s = extend_window(s, max_window);
    auto large = tuple_orbits(s.current(), 1, A);
    std::map<std::string, std::size_t> grown;
    for (std::size_t b = 0; b < large.blocks.size(); ++b) grown[large.keys[b]] = large.blocks[b].size();
    std::vector<Element> out;
    for (std::size_t b = 0; b < small.blocks.size(); ++b)
        if (grown[small.keys[b]] == small.blocks[b].size())
            for (const auto& t : small.blocks[b]) out.push_back(t[0]);
    std::sort(out.begin(), out.end());
    return out;
}

// A tuple z avoiding x and y with qf_type(z,x) != qf_type(z,y), lengths 1 up
// to the maximal arity of the language, lexicographically least first.
inline std::optional<Tuple> separating_tuple(const FinStructure& m, Element x, Element y) {
    if (x >= m.window() || y >= m.window()) throw InputError("point outside window");
    if (x == y) throw InputError("separating_tuple needs distinct points");
    const unsigned max_len = m.language().max_arity();
    std::optional<Tuple> found;
    for (unsigned len = 1; len <= max_len && !found; ++len) {
        Tuple zx(len + 1), zy(len + 1);
        for_each_tuple(m.window(), len, [&](const Tuple& z) {
            if (found) return;
            for (Element e : z)
                if (e == x || e == y) return;
            std::copy(z.begin(), z.end(), zx.begin());
            std::copy(z.begin(), z.end(), zy.begin());
            zx.back() = x;
            zy.back() = y;
            if (!(qf_type(m, zx) == qf_type(m, zy))) found = z;
        });
    }
    return found;
}

inline std::optional<Tuple> separating_tuple(const CatalogId& c, Element x, Element y, std::size_t window_budget) {
    if (x >= window_budget || y >= window_budget) throw InputError("point outside window budget");
    return separating_tuple(generate(c, window_budget), x, y);
}

}  // namespace homlab
