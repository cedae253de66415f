#pragma once

// Finite permutation groups as stand-ins for closed subgroups of S_inf:
// subgroup lattices, stabilizers, normalizers, the orbit-equivalence
// structure M_G(H), and the colouring construction that realizes an
// invariant random subgroup as a stabilizer law.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "homlab/parallel.hpp"
#include "homlab/rng.hpp"
#include "homlab/structure.hpp"

namespace homlab {

inline constexpr std::size_t kMaxGroupDegree = 12;
inline constexpr std::size_t kMaxGroupOrder = 1'000'000;

namespace detail {

inline std::uint64_t perm_code(const FinPermutation& g) {
    std::uint64_t c = 0;
    for (Element e : g.images()) c = (c << 4) | e;
    return c;
}

}  // namespace detail

class FiniteGroup {
public:
    FiniteGroup() : FiniteGroup(0, {}) {}

    // The group generated by `gens` inside Sym(degree).
    FiniteGroup(std::size_t degree, std::vector<FinPermutation> gens) : degree_(degree), gens_(std::move(gens)) {
        if (degree > kMaxGroupDegree)
            throw InputError("group degree above " + std::to_string(kMaxGroupDegree) + " is not supported");
        for (const auto& g : gens_)
            if (g.size() != degree) throw InputError("generator degree does not match group degree");
        auto id = FinPermutation::identity(degree);
        std::unordered_set<std::uint64_t> seen{detail::perm_code(id)};
        elements_.push_back(id);
        for (std::size_t i = 0; i < elements_.size(); ++i)
            for (const auto& g : gens_) {
                auto x = g * elements_[i];
                if (seen.insert(detail::perm_code(x)).second) {
                    elements_.push_back(std::move(x));
                    if (elements_.size() > kMaxGroupOrder) throw InputError("group too large to enumerate");
                }
            }
        std::sort(elements_.begin(), elements_.end());
        codes_.reserve(elements_.size());
        for (const auto& e : elements_) codes_.insert(detail::perm_code(e));
    }

    static FiniteGroup symmetric(std::size_t n) {
        std::vector<FinPermutation> gens;
        if (n >= 2) {
            gens.push_back(FinPermutation::from_cycles(n, "(0 1)"));
            std::vector<Element> cyc(n);
            for (std::size_t i = 0; i < n; ++i) cyc[i] = static_cast<Element>((i + 1) % n);
            gens.emplace_back(std::move(cyc));
        }
        return FiniteGroup(n, std::move(gens));
    }

    static FiniteGroup alternating(std::size_t n) {
        std::vector<FinPermutation> gens;
        for (std::size_t i = 2; i < n; ++i) {
            std::vector<Element> im(n);
            std::iota(im.begin(), im.end(), Element{0});
            im[0] = 1;
            im[1] = static_cast<Element>(i);
            im[i] = 0;
            gens.emplace_back(std::move(im));
        }
        return FiniteGroup(n, std::move(gens));
    }

    // Generators in cycle notation separated by ';', e.g. "(0 1)(2 3);(0 2)".
    // "" or "()" gives the trivial group.
    static FiniteGroup from_generators(std::size_t degree, std::string_view text) {
        std::vector<FinPermutation> gens;
        for (const auto& part : detail::split(text, ';')) {
            auto trimmed = part;
            trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(), [](unsigned char c) { return std::isspace(c); }),
                          trimmed.end());
            if (trimmed.empty()) continue;
            gens.push_back(FinPermutation::from_cycles(degree, part));
        }
        return FiniteGroup(degree, std::move(gens));
    }

    // S<n>, A<n>, or gens:<degree>:<generators>.
    static FiniteGroup parse(std::string_view token) {
        if (token.size() >= 2 && (token[0] == 'S' || token[0] == 'A')) {
            auto n = detail::parse_uint(token.substr(1), "group degree");
            if (n < 1 || n > kMaxGroupDegree) throw InputError("group degree out of range");
            return token[0] == 'S' ? symmetric(n) : alternating(n);
        }
        if (token.starts_with("gens:")) {
            auto rest = token.substr(5);
            auto colon = rest.find(':');
            if (colon == std::string_view::npos) throw InputError("group token gens:<degree>:<generators>");
            return from_generators(detail::parse_uint(rest.substr(0, colon), "group degree"), rest.substr(colon + 1));
        }
        throw InputError("unknown group '" + std::string(token) + "' (use S<n>, A<n> or gens:<n>:<cycles>)");
    }

    std::size_t degree() const noexcept { return degree_; }
    std::size_t order() const noexcept { return elements_.size(); }
    const std::vector<FinPermutation>& generators() const noexcept { return gens_; }
    const std::vector<FinPermutation>& elements() const noexcept { return elements_; }
    bool contains(const FinPermutation& g) const {
        return g.size() == degree_ && codes_.count(detail::perm_code(g)) > 0;
    }
    bool is_subgroup_of(const FiniteGroup& g) const {
        if (degree_ != g.degree_) return false;
        return std::all_of(elements_.begin(), elements_.end(), [&](const auto& x) { return g.contains(x); });
    }
    bool is_trivial() const noexcept { return elements_.size() == 1; }

    // Generators listed as "(0 1)(2 3);(0 2)"; a canonical name is the
    // element list, so equal groups can print differently.
    std::string generators_text() const {
        std::string out;
        for (const auto& g : gens_) {
            if (g.is_identity()) continue;
            if (!out.empty()) out += ";";
            out += g.to_cycles();
        }
        return out.empty() ? "()" : out;
    }

    friend bool operator==(const FiniteGroup& a, const FiniteGroup& b) {
        return a.degree_ == b.degree_ && a.elements_ == b.elements_;
    }
    friend bool operator<(const FiniteGroup& a, const FiniteGroup& b) {
        if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
        if (a.order() != b.order()) return a.order() < b.order();
        return a.elements_ < b.elements_;
    }

private:
    std::size_t degree_ = 0;
    std::vector<FinPermutation> gens_;
    std::vector<FinPermutation> elements_;  // sorted
    std::unordered_set<std::uint64_t> codes_;
};

// Subgroup generated by elements of the ambient degree; throws unless inside g.
inline FiniteGroup subgroup(const FiniteGroup& g, std::vector<FinPermutation> gens) {
    FiniteGroup h(g.degree(), std::move(gens));
    if (!h.is_subgroup_of(g)) throw InputError("generators do not lie in the ambient group");
    return h;
}

inline FiniteGroup subgroup(const FiniteGroup& g, std::string_view generators) {
    auto h = FiniteGroup::from_generators(g.degree(), generators);
    if (!h.is_subgroup_of(g)) throw InputError("H is not a subgroup of G");
    return h;
}

// All subgroups, ordered by (order, elements). Built by joining cyclic
// subgroups until no new subgroup appears.
inline std::vector<FiniteGroup> all_subgroups(const FiniteGroup& g) {
    std::vector<FinPermutation> cyclic_gens;
    {
        std::set<std::vector<FinPermutation>> cyclic;
        for (const auto& x : g.elements()) {
            FiniteGroup c(g.degree(), {x});
            if (cyclic.insert(c.elements()).second) cyclic_gens.push_back(x);
        }
    }
    std::set<std::vector<FinPermutation>> seen;
    std::vector<FiniteGroup> out;
    FiniteGroup trivial(g.degree(), {});
    seen.insert(trivial.elements());
    out.push_back(trivial);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (const auto& x : cyclic_gens) {
            if (out[i].contains(x)) continue;
            auto gens = out[i].generators();
            gens.push_back(x);
            FiniteGroup j(g.degree(), std::move(gens));
            if (seen.insert(j.elements()).second) out.push_back(std::move(j));
        }
    std::sort(out.begin(), out.end());
    return out;
}

// Elements g with fixes(g) true, i.e. g.x == x for the point the predicate
// describes. The result is a subgroup whenever the predicate comes from an action.
template <typename Pred>
    requires std::predicate<Pred&, const FinPermutation&>
FiniteGroup stabilizer(const FiniteGroup& g, Pred&& fixes) {
    std::vector<FinPermutation> gens;
    FiniteGroup current(g.degree(), {});
    for (const auto& x : g.elements())
        if (!current.contains(x) && fixes(x)) {
            gens.push_back(x);
            current = FiniteGroup(g.degree(), gens);
        }
    return current;
}

// g H g^{-1}
inline FiniteGroup conjugate(const FiniteGroup& g, const FiniteGroup& h, const FinPermutation& x) {
    if (!g.contains(x)) throw InputError("conjugating element is not in G");
    if (!h.is_subgroup_of(g)) throw InputError("H is not a subgroup of G");
    auto xi = x.inverse();
    std::vector<FinPermutation> gens;
    for (const auto& s : h.generators()) gens.push_back(x * s * xi);
    return FiniteGroup(h.degree(), std::move(gens));
}

inline FiniteGroup normalizer(const FiniteGroup& g, const FiniteGroup& h) {
    if (!h.is_subgroup_of(g)) throw InputError("H is not a subgroup of G");
    return stabilizer(g, [&](const FinPermutation& x) {
        auto xi = x.inverse();
        return std::all_of(h.generators().begin(), h.generators().end(),
                           [&](const auto& s) { return h.contains(x * s * xi); });
    });
}

// Labels move with the points: (g.x).labels[g(i)] = x.labels[i].
inline RealExpansion act(const FinPermutation& g, const RealExpansion& x) {
    RealExpansion out(act(g, x.structure));
    if (x.labeled()) {
        out.labels.assign(x.labels.size(), 0.0);
        for (Element i = 0; i < x.labels.size(); ++i) out.labels[g(i)] = x.labels[i];
    }
    return out;
}

inline FiniteGroup stabilizer(const FiniteGroup& g, const RealExpansion& x) {
    if (x.window() != g.degree()) throw InputError("structure window does not match group degree");
    return stabilizer(g, [&](const FinPermutation& p) {
        auto y = act(p, x);
        return y.structure == x.structure && y.labels == x.labels;
    });
}

inline std::vector<Element> fixed_points(const FiniteGroup& h) {
    std::vector<Element> out;
    for (Element i = 0; i < h.degree(); ++i)
        if (std::all_of(h.generators().begin(), h.generators().end(), [&](const auto& s) { return s(i) == i; }))
            out.push_back(i);
    return out;
}

// Whether N_G(H) moves any fixed point of H to any other.
inline bool normalizer_transitive_on_fixed_points(const FiniteGroup& g, const FiniteGroup& h) {
    auto fix = fixed_points(h);
    if (fix.size() <= 1) return true;
    auto n = normalizer(g, h);
    std::set<Element> orbit;
    for (const auto& x : n.elements()) orbit.insert(x(fix[0]));
    return std::all_of(fix.begin(), fix.end(), [&](Element e) { return orbit.count(e) > 0; });
}

namespace detail {

// H-orbit id of every tuple of length len over the window, as a dense vector
// indexed by tuple code; ids are the least code in the orbit.
inline std::vector<std::uint64_t> tuple_orbit_reps(const FiniteGroup& h, unsigned len) {
    const std::size_t n = h.degree();
    const auto total = checked_pow(n, len).value();
    std::vector<std::uint64_t> rep(total, ~std::uint64_t{0});
    Tuple t(len);
    for (std::uint64_t c = 0; c < total; ++c) {
        if (rep[c] != ~std::uint64_t{0}) continue;
        std::uint64_t x = c;
        for (unsigned i = len; i-- > 0;) {
            t[i] = static_cast<Element>(x % n);
            x /= n;
        }
        for (const auto& g : h.elements()) rep[encode(g.apply(t), n)] = c;
    }
    return rep;
}

}  // namespace detail

// The orbit-equivalence structure of H inside G, truncated at tuple length L:
// relation O<n> (arity 2n) holds on (a, b) iff b lies in the H-orbit of the
// n-tuple a; relation G<n>_<j> (arity n) is the j-th G-orbit of n-tuples.
inline FinStructure mg_of_h(const FiniteGroup& g, const FiniteGroup& h, unsigned max_len) {
    if (!h.is_subgroup_of(g)) throw InputError("H is not a subgroup of G");
    if (max_len < g.degree()) throw InputError("tuple length cap must be at least the group degree");
    const std::size_t n = g.degree();
    std::vector<Symbol> syms;
    std::vector<std::vector<Tuple>> rels;
    for (unsigned len = 1; len <= max_len; ++len) {
        if (!detail::checked_pow(n, 2 * len) || *detail::checked_pow(n, 2 * len) > (std::uint64_t{1} << 26))
            throw InputError("tuple length cap too large for this degree");
        syms.push_back({"O" + std::to_string(len), 2 * len});
        auto hrep = detail::tuple_orbit_reps(h, len);
        std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> members;
        for (std::uint64_t c = 0; c < hrep.size(); ++c) members[hrep[c]].push_back(c);
        auto decode = [&](std::uint64_t c) {
            Tuple t(len);
            for (unsigned i = len; i-- > 0;) {
                t[i] = static_cast<Element>(c % n);
                c /= n;
            }
            return t;
        };
        std::vector<Tuple> orel;
        for (const auto& [_, block] : members)
            for (auto a : block)
                for (auto b : block) {
                    auto t = decode(a);
                    auto u = decode(b);
                    t.insert(t.end(), u.begin(), u.end());
                    orel.push_back(std::move(t));
                }
        rels.push_back(std::move(orel));
        auto grep = detail::tuple_orbit_reps(g, len);
        std::map<std::uint64_t, std::vector<std::uint64_t>> gblocks;
        for (std::uint64_t c = 0; c < grep.size(); ++c) gblocks[grep[c]].push_back(c);
        std::size_t j = 0;
        for (const auto& [_, block] : gblocks) {
            syms.push_back({"G" + std::to_string(len) + "_" + std::to_string(j++), len});
            std::vector<Tuple> r;
            for (auto c : block) r.push_back(decode(c));
            rels.push_back(std::move(r));
        }
    }
    return FinStructure(Language("dynamical", std::move(syms)), n, std::move(rels));
}

// {g in G : g.M == M}
inline FiniteGroup automorphisms_within(const FiniteGroup& g, const FinStructure& m) {
    if (m.window() != g.degree()) throw InputError("structure window does not match group degree");
    return stabilizer(g, [&](const FinPermutation& x) { return act(x, m) == m; });
}

// Finitely supported probability law on subgroups of an ambient group.
struct SubgroupLaw {
    std::vector<std::pair<FiniteGroup, double>> atoms;

    static SubgroupLaw delta(const FiniteGroup& h) { return {{{h, 1.0}}}; }

    // Uniform on the conjugacy class of H in G.
    static SubgroupLaw conjugacy_class(const FiniteGroup& g, const FiniteGroup& h) {
        std::set<FiniteGroup> cls;
        for (const auto& x : g.elements()) cls.insert(conjugate(g, h, x));
        SubgroupLaw law;
        for (const auto& c : cls) law.atoms.push_back({c, 1.0 / static_cast<double>(cls.size())});
        return law;
    }

    // Merges repeated subgroups and checks the weights.
    void validate(const FiniteGroup& g) {
        std::map<FiniteGroup, double> merged;
        double total = 0;
        for (const auto& [h, w] : atoms) {
            if (!(w >= 0)) throw InputError("subgroup law weights must be nonnegative");
            if (!h.is_subgroup_of(g)) throw InputError("support subgroup not inside the ambient group");
            merged[h] += w;
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) throw InputError("subgroup law weights must sum to 1");
        atoms.clear();
        for (auto& [h, w] : merged)
            if (w > 0) atoms.push_back({h, w});
    }

    double weight_of(const FiniteGroup& h) const {
        for (const auto& [k, w] : atoms)
            if (k == h) return w;
        return 0.0;
    }
};

struct ConjugationWitness {
    FiniteGroup subgroup;
    FinPermutation element;
    double weight = 0.0;            // law weight of subgroup
    double conjugate_weight = 0.0;  // law weight of element.subgroup.element^-1
};

// A pair (H, g) with nu(H) != nu(gHg^-1), checked over the generators of G
// (enough, since invariance under generators implies invariance under G).
inline std::optional<ConjugationWitness> conjugation_violation(const FiniteGroup& g, const SubgroupLaw& nu) {
    for (const auto& [h, w] : nu.atoms)
        for (const auto& x : g.generators()) {
            auto c = conjugate(g, h, x);
            double wc = nu.weight_of(c);
            if (std::abs(wc - w) > 1e-9) return ConjugationWitness{h, x, w, wc};
        }
    return std::nullopt;
}

struct IrsTrial {
    std::size_t drawn = 0;  // index into law atoms
    FiniteGroup stabilizer;
    bool exact = false;
};

struct IrsRealization {
    std::size_t trials = 0;
    std::vector<IrsTrial> per_trial;
    std::vector<std::pair<FiniteGroup, std::size_t>> empirical;  // stabilizer counts, ordered
    bool exact_match = true;
    bool law_within_3sigma = true;
};

// Colour every H-orbit of tuples of length <= degree with an independent
// uniform real (a hash of the orbit's least tuple), then compute the exact
// stabilizer of the coloured point in G.
inline FiniteGroup colored_point_stabilizer(const FiniteGroup& g, const FiniteGroup& h, std::uint64_t seed) {
    const std::size_t n = g.degree();
    std::vector<std::vector<double>> color(n + 1);
    for (unsigned len = 1; len <= n; ++len) {
        auto rep = detail::tuple_orbit_reps(h, len);
        color[len].resize(rep.size());
        for (std::size_t c = 0; c < rep.size(); ++c) color[len][c] = rng::uniform(seed, {rng::tag("orbit"), len, rep[c]});
    }
    return stabilizer(g, [&](const FinPermutation& x) {
        for (unsigned len = 1; len <= n; ++len) {
            bool ok = true;
            for_each_tuple(n, len, [&](const Tuple& t) {
                if (ok && color[len][detail::encode(x.apply(t), n)] != color[len][detail::encode(t, n)]) ok = false;
            });
            if (!ok) return false;
        }
        return true;
    });
}

inline IrsRealization realize_irs(const FiniteGroup& g, SubgroupLaw nu, std::uint64_t seed, std::size_t trials,
                                  std::size_t threads = 1) {
    if (trials == 0) throw InputError("realize_irs needs trials >= 1");
    nu.validate(g);
    if (auto w = conjugation_violation(g, nu))
        throw InputError("law is not conjugation invariant: H=" + w->subgroup.generators_text() + " g=" +
                         w->element.to_cycles() + " weight " + std::to_string(w->weight) + " vs " +
                         std::to_string(w->conjugate_weight));
    IrsRealization out;
    out.trials = trials;
    out.per_trial = parallel_map(trials, threads, [&](std::size_t t) {
        auto ts = rng::hash(seed, {rng::tag("trial"), t});
        double u = rng::uniform(ts, {rng::tag("draw")});
        std::size_t k = nu.atoms.size() - 1;
        double acc = 0;
        for (std::size_t i = 0; i < nu.atoms.size(); ++i) {
            acc += nu.atoms[i].second;
            if (u < acc) {
                k = i;
                break;
            }
        }
        IrsTrial r;
        r.drawn = k;
        r.stabilizer = colored_point_stabilizer(g, nu.atoms[k].first, ts);
        r.exact = r.stabilizer == nu.atoms[k].first;
        return r;
    });
    std::map<FiniteGroup, std::size_t> counts;
    for (const auto& r : out.per_trial) {
        counts[r.stabilizer]++;
        out.exact_match = out.exact_match && r.exact;
    }
    for (auto& [h, c] : counts) out.empirical.push_back({h, c});
    const double n = static_cast<double>(trials);
    for (const auto& [h, c] : counts) {
        double p = nu.weight_of(h);
        if (p == 0.0) out.law_within_3sigma = false;
    }
    for (const auto& [h, p] : nu.atoms) {
        double c = counts.count(h) ? static_cast<double>(counts[h]) : 0.0;
        if (std::abs(c - n * p) > 3.0 * std::sqrt(n * p * (1 - p)) + 1e-9) out.law_within_3sigma = false;
    }
    return out;
}

}  // namespace homlab
