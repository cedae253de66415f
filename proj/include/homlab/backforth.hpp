#pragma once

// Partial isomorphisms between real expansions, one-step extension, and
// alternating back-and-forth search for isomorphisms and automorphisms.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "homlab/structure.hpp"

namespace homlab {

namespace detail {

inline constexpr std::uint32_t kUnmapped = ~std::uint32_t{0};

// A real expansion plus per-point incidence lists of its tuples.
struct IndexedExpansion {
    RealExpansion x;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incident;  // point -> (symbol, tuple index)

    explicit IndexedExpansion(RealExpansion e) : x(std::move(e)), incident(x.window()) {
        const auto& m = x.structure;
        for (std::size_t s = 0; s < m.symbol_count(); ++s) {
            auto rel = m.relation(s);
            for (std::size_t i = 0; i < rel.size(); ++i) {
                const auto& t = rel[i];
                for (std::size_t j = 0; j < t.size(); ++j)
                    if (std::find(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(j), t[j]) ==
                        t.begin() + static_cast<std::ptrdiff_t>(j))
                        incident[t[j]].push_back({s, i});
            }
        }
    }

    double label(Element e) const { return x.labeled() ? x.labels[e] : 0.0; }
};

// Stable colors of 1-dimensional refinement, computed jointly so that colors
// are comparable across the two structures.
inline std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> refine_colors(const IndexedExpansion& a,
                                                                                      const IndexedExpansion& b) {
    const IndexedExpansion* side[2] = {&a, &b};
    std::vector<std::uint32_t> col[2];
    {
        std::map<double, std::uint32_t> dict;
        for (int k = 0; k < 2; ++k)
            for (Element e = 0; e < side[k]->x.window(); ++e) dict.emplace(side[k]->label(e), 0);
        std::uint32_t next = 0;
        for (auto& [_, c] : dict) c = next++;
        for (int k = 0; k < 2; ++k) {
            col[k].resize(side[k]->x.window());
            for (Element e = 0; e < side[k]->x.window(); ++e) col[k][e] = dict[side[k]->label(e)];
        }
    }
    std::size_t classes = 0;
    while (true) {
        std::map<std::vector<std::uint32_t>, std::uint32_t> dict;
        std::vector<std::vector<std::uint32_t>> sig[2];
        for (int k = 0; k < 2; ++k) {
            const auto& m = side[k]->x.structure;
            sig[k].resize(m.window());
            for (Element e = 0; e < m.window(); ++e) {
                std::vector<std::vector<std::uint32_t>> items;
                for (auto [s, i] : side[k]->incident[e]) {
                    const auto& t = m.relation(s)[i];
                    std::vector<std::uint32_t> item{static_cast<std::uint32_t>(s)};
                    for (Element v : t) {
                        item.push_back(v == e ? kUnmapped : 0);
                        item.push_back(col[k][v]);
                    }
                    items.push_back(std::move(item));
                }
                std::sort(items.begin(), items.end());
                auto& out = sig[k][e];
                out.push_back(col[k][e]);
                for (const auto& it : items) {
                    out.push_back(static_cast<std::uint32_t>(it.size()));
                    out.insert(out.end(), it.begin(), it.end());
                }
                dict.emplace(out, 0);
            }
        }
        std::uint32_t next = 0;
        for (auto& [_, c] : dict) c = next++;
        for (int k = 0; k < 2; ++k)
            for (Element e = 0; e < side[k]->x.window(); ++e) col[k][e] = dict[sig[k][e]];
        if (dict.size() == classes) break;
        classes = dict.size();
    }
    return {std::move(col[0]), std::move(col[1])};
}

}  // namespace detail

class PartialIso {
public:
    PartialIso(RealExpansion source, RealExpansion target)
        : PartialIso(std::make_shared<const detail::IndexedExpansion>(std::move(source)),
                     std::make_shared<const detail::IndexedExpansion>(std::move(target))) {}

    PartialIso(std::shared_ptr<const detail::IndexedExpansion> source,
               std::shared_ptr<const detail::IndexedExpansion> target)
        : src_(std::move(source)), tgt_(std::move(target)),
          fwd_(src_->x.window(), detail::kUnmapped), back_(tgt_->x.window(), detail::kUnmapped) {
        if (!src_->x.structure.language().same_symbols(tgt_->x.structure.language()))
            throw InputError("partial isomorphism between structures of different languages");
        if (src_->x.labeled() != tgt_->x.labeled())
            throw InputError("partial isomorphism between a labeled and an unlabeled structure");
    }

    // Throws InputError if the pairs do not form a partial isomorphism.
    static PartialIso from_pairs(RealExpansion source, RealExpansion target,
                                 const std::vector<std::pair<Element, Element>>& pairs) {
        PartialIso p(std::move(source), std::move(target));
        for (auto [a, b] : pairs) {
            if (a >= p.source().window() || b >= p.target().window())
                throw InputError("pair (" + std::to_string(a) + "," + std::to_string(b) + ") outside the windows");
            if (p.fwd_[a] == b) continue;
            if (!p.can_add(a, b))
                throw InputError("pair (" + std::to_string(a) + "," + std::to_string(b) +
                                 ") is not consistent with a partial isomorphism");
            p.add(a, b);
        }
        return p;
    }

    const RealExpansion& source() const noexcept { return src_->x; }
    const RealExpansion& target() const noexcept { return tgt_->x; }
    const std::vector<std::pair<Element, Element>>& pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }

    std::optional<Element> image(Element a) const {
        if (a >= fwd_.size() || fwd_[a] == detail::kUnmapped) return std::nullopt;
        return fwd_[a];
    }
    std::optional<Element> preimage(Element b) const {
        if (b >= back_.size() || back_[b] == detail::kUnmapped) return std::nullopt;
        return back_[b];
    }

    bool total() const noexcept { return pairs_.size() == fwd_.size() && pairs_.size() == back_.size(); }

    // Would adding (a,b) keep this a partial isomorphism?
    bool can_add(Element a, Element b) const {
        if (a >= fwd_.size() || b >= back_.size()) return false;
        if (fwd_[a] != detail::kUnmapped || back_[b] != detail::kUnmapped) return false;
        if (src_->label(a) != tgt_->label(b)) return false;
        return tuples_preserved(*src_, *tgt_, fwd_, a, b) && tuples_preserved(*tgt_, *src_, back_, b, a);
    }

    void add(Element a, Element b) {
        if (!can_add(a, b))
            throw InputError("pair (" + std::to_string(a) + "," + std::to_string(b) + ") cannot be added");
        fwd_[a] = b;
        back_[b] = a;
        pairs_.push_back({a, b});
    }

    PartialIso with(Element a, Element b) const {
        PartialIso p = *this;
        p.add(a, b);
        return p;
    }

    // The total map as a permutation (source and target of equal window).
    FinPermutation as_permutation() const {
        if (!total() || fwd_.size() != back_.size()) throw InputError("partial isomorphism is not total");
        return FinPermutation(std::vector<Element>(fwd_.begin(), fwd_.end()));
    }

    std::shared_ptr<const detail::IndexedExpansion> indexed_source() const noexcept { return src_; }
    std::shared_ptr<const detail::IndexedExpansion> indexed_target() const noexcept { return tgt_; }

private:
    // Every tuple of `from` inside dom+{a} and containing a maps to a tuple of `to`.
    static bool tuples_preserved(const detail::IndexedExpansion& from, const detail::IndexedExpansion& to,
                                 const std::vector<std::uint32_t>& map, Element a, Element b) {
        const auto& m = from.x.structure;
        Tuple img;
        for (auto [s, i] : from.incident[a]) {
            const auto& t = m.relation(s)[i];
            img.resize(t.size());
            bool inside = true;
            for (std::size_t j = 0; j < t.size() && inside; ++j) {
                if (t[j] == a) img[j] = b;
                else if (map[t[j]] == detail::kUnmapped) inside = false;
                else img[j] = map[t[j]];
            }
            if (inside && !to.x.structure.holds(s, img)) return false;
        }
        return true;
    }

    std::shared_ptr<const detail::IndexedExpansion> src_, tgt_;
    std::vector<std::uint32_t> fwd_, back_;
    std::vector<std::pair<Element, Element>> pairs_;
};

enum class ExtendSide { Forth, Back };

// Forth: least target partner for source point x. Back: least source partner
// for target point x. An already-mapped x returns its current partner.
// nullopt means the map is stuck at x.
inline std::optional<Element> try_extend(const PartialIso& p, ExtendSide side, Element x) {
    if (side == ExtendSide::Forth) {
        if (x >= p.source().window()) throw InputError("forth point outside source window");
        if (auto y = p.image(x)) return y;
        for (Element y = 0; y < p.target().window(); ++y)
            if (p.can_add(x, y)) return y;
    } else {
        if (x >= p.target().window()) throw InputError("back point outside target window");
        if (auto y = p.preimage(x)) return y;
        for (Element y = 0; y < p.source().window(); ++y)
            if (p.can_add(y, x)) return y;
    }
    return std::nullopt;
}

inline constexpr std::size_t kDefaultSearchBudget = 1'000'000;

struct IsoSearchResult {
    bool found = false;
    bool budget_exhausted = false;
    std::size_t nodes = 0;
    PartialIso best;  // the full isomorphism when found, else the largest partial map reached
};

namespace detail {

class BackForthSearch {
public:
    BackForthSearch(PartialIso start, std::vector<std::uint32_t> src_col, std::vector<std::uint32_t> tgt_col,
                    std::size_t budget, bool alternate)
        : cur_(std::move(start)), best_(cur_), src_col_(std::move(src_col)), tgt_col_(std::move(tgt_col)),
          budget_(budget), alternate_(alternate) {}

    bool run() { return dfs(); }

    bool exhausted() const noexcept { return exhausted_; }
    std::size_t nodes() const noexcept { return nodes_; }
    const PartialIso& current() const noexcept { return cur_; }
    const PartialIso& best() const noexcept { return best_; }
    bool total_found() const { return cur_.total(); }

    // Source points are tried in this order when going forth.
    std::vector<Element> forth_order;
    // Partners the first forth step may not use (to force a moved point).
    std::optional<std::pair<Element, Element>> forbid;

private:
    bool dfs() {
        if (cur_.size() > best_.size()) best_ = cur_;
        if (cur_.total()) return true;
        if (nodes_ >= budget_) {
            exhausted_ = true;
            return false;
        }
        auto key = state_key();
        if (dead_.count(key)) return false;
        ++nodes_;

        bool forth = !alternate_ || cur_.size() % 2 == 0;
        Element x = 0;
        bool have = false;
        if (forth) {
            for (Element e : forth_order)
                if (!cur_.image(e)) {
                    x = e;
                    have = true;
                    break;
                }
            if (!have) forth = false;
        }
        if (!forth) {
            for (Element e = 0; e < cur_.target().window(); ++e)
                if (!cur_.preimage(e)) {
                    x = e;
                    have = true;
                    break;
                }
        }
        if (!have) return false;

        const std::size_t other = forth ? cur_.target().window() : cur_.source().window();
        for (Element y = 0; y < other; ++y) {
            Element a = forth ? x : y, b = forth ? y : x;
            if (src_col_[a] != tgt_col_[b]) continue;
            if (forbid && forbid->first == a && forbid->second == b) continue;
            if (!cur_.can_add(a, b)) continue;
            PartialIso saved = cur_;
            cur_.add(a, b);
            if (dfs()) return true;
            cur_ = std::move(saved);
            if (exhausted_) return false;
        }
        dead_.insert(std::move(key));
        return false;
    }

    std::string state_key() const {
        auto pairs = cur_.pairs();
        std::sort(pairs.begin(), pairs.end());
        std::string k;
        k.reserve(pairs.size() * 8);
        for (auto [a, b] : pairs) {
            k.append(reinterpret_cast<const char*>(&a), sizeof a);
            k.append(reinterpret_cast<const char*>(&b), sizeof b);
        }
        return k;
    }

    PartialIso cur_, best_;
    std::vector<std::uint32_t> src_col_, tgt_col_;
    std::size_t budget_;
    bool alternate_;
    std::size_t nodes_ = 0;
    bool exhausted_ = false;
    std::unordered_set<std::string> dead_;
};

}  // namespace detail

// Alternating back-and-forth search for an isomorphism source -> target.
inline IsoSearchResult build_isomorphism(const RealExpansion& source, const RealExpansion& target,
                                         std::size_t budget = kDefaultSearchBudget) {
    auto s = std::make_shared<const detail::IndexedExpansion>(source);
    auto t = std::make_shared<const detail::IndexedExpansion>(target);
    PartialIso start(s, t);
    if (source.window() != target.window() || source.structure.tuple_count() != target.structure.tuple_count())
        return {false, false, 0, start};
    auto [cs, ct] = detail::refine_colors(*s, *t);
    auto hs = cs, ht = ct;
    std::sort(hs.begin(), hs.end());
    std::sort(ht.begin(), ht.end());
    if (hs != ht) return {false, false, 0, start};
    detail::BackForthSearch search(start, std::move(cs), std::move(ct), budget, true);
    search.forth_order.resize(source.window());
    std::iota(search.forth_order.begin(), search.forth_order.end(), Element{0});
    bool ok = search.run();
    return {ok, search.exhausted(), search.nodes(), ok ? search.current() : search.best()};
}

// Largest partial isomorphism reached by back-and-forth without the
// invariant prefilter, so non-isomorphic windows still get a partial map.
inline PartialIso largest_partial_isomorphism(const RealExpansion& source, const RealExpansion& target,
                                              std::size_t budget = kDefaultSearchBudget) {
    auto s = std::make_shared<const detail::IndexedExpansion>(source);
    auto t = std::make_shared<const detail::IndexedExpansion>(target);
    detail::BackForthSearch search(PartialIso(s, t), std::vector<std::uint32_t>(source.window(), 0),
                                   std::vector<std::uint32_t>(target.window(), 0), budget, true);
    search.forth_order.resize(source.window());
    std::iota(search.forth_order.begin(), search.forth_order.end(), Element{0});
    search.run();
    return search.total_found() ? search.current() : search.best();
}

enum class AutomorphismStatus { Found, None, BudgetExhausted };

struct AutomorphismResult {
    AutomorphismStatus status = AutomorphismStatus::None;
    std::optional<FinPermutation> automorphism;
    std::size_t nodes = 0;
};

// With require_moved = x: some automorphism g with g(x) != x. Without: the
// lexicographically least non-identity automorphism (as an image list).
inline AutomorphismResult automorphism_search(const RealExpansion& m, std::optional<Element> require_moved = {},
                                              std::size_t budget = kDefaultSearchBudget) {
    const std::size_t n = m.window();
    if (require_moved && *require_moved >= n) throw InputError("point outside window");
    auto ix = std::make_shared<const detail::IndexedExpansion>(m);
    auto [cs, ct] = detail::refine_colors(*ix, *ix);
    AutomorphismResult out;
    bool exhausted = false;
    auto attempt = [&](PartialIso start, std::vector<Element> order) -> bool {
        detail::BackForthSearch search(std::move(start), cs, ct, budget > out.nodes ? budget - out.nodes : 0, false);
        search.forth_order = std::move(order);
        bool ok = search.run();
        out.nodes += search.nodes();
        if (search.exhausted()) exhausted = true;
        if (ok) {
            out.status = AutomorphismStatus::Found;
            out.automorphism = search.current().as_permutation();
        }
        return ok;
    };
    std::vector<Element> ascending(n);
    std::iota(ascending.begin(), ascending.end(), Element{0});
    if (require_moved) {
        const Element x = *require_moved;
        std::vector<Element> order{x};
        for (Element e : ascending)
            if (e != x) order.push_back(e);
        for (Element y = 0; y < n && !exhausted; ++y) {
            if (y == x || cs[x] != ct[y]) continue;
            PartialIso start(ix, ix);
            if (!start.can_add(x, y)) continue;
            start.add(x, y);
            if (attempt(start, order)) return out;
        }
    } else {
        // Fix 0..x-1, move x to the least possible larger point.
        for (std::size_t xi = n; xi-- > 0 && !exhausted;) {
            const auto x = static_cast<Element>(xi);
            PartialIso base(ix, ix);
            bool ok = true;
            for (Element e = 0; e < x && ok; ++e) {
                if (!base.can_add(e, e)) ok = false;
                else base.add(e, e);
            }
            if (!ok) continue;
            for (Element y = x + 1; y < n && !exhausted; ++y) {
                if (cs[x] != ct[y] || !base.can_add(x, y)) continue;
                if (attempt(base.with(x, y), ascending)) return out;
            }
        }
    }
    out.status = exhausted ? AutomorphismStatus::BudgetExhausted : AutomorphismStatus::None;
    return out;
}

}  // namespace homlab
