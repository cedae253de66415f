#pragma once

// Samplers for invariant random expansions and the statistical tests run on
// them: exchangeability, dissociation, de Finetti decomposition, and the
// fixed-point monitor.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "homlab/backforth.hpp"
#include "homlab/catalog.hpp"
#include "homlab/parallel.hpp"
#include "homlab/rng.hpp"
#include "homlab/stats.hpp"
#include "homlab/structure.hpp"

namespace homlab {

enum class SamplerKind {
    ErdosRenyi,
    UniformLinearOrder,
    Kaleidoscope,
    TwoGraphGraphing,
    BernoulliShift,
    SinftyMixture,
    MixedIid,
    ParityFixture,  // edge iff i+j even; deliberately not invariant
};

enum class BaseLaw { Diffuse, Atomic, Bernoulli };

inline constexpr unsigned kKaleidoscopeColors = 4;

struct Sampler {
    SamplerKind kind = SamplerKind::ErdosRenyi;
    double p = 0.5;         // edge probability, Bernoulli parameter
    double q = 0.5;         // S_inf mixture: probability a point carries a diffuse label
    unsigned atoms = 2;     // atomic base law: uniform on {0, 1/(m-1), ..., 1}
    unsigned colors = kKaleidoscopeColors;
    BaseLaw law = BaseLaw::Diffuse;
    CatalogId base = CatalogId::pure_set();
    std::vector<std::pair<double, Sampler>> components;  // mixed i.i.d.

    static Sampler erdos_renyi(double p) { return checked(make(SamplerKind::ErdosRenyi, p)); }
    static Sampler uniform_linear_order() { return make(SamplerKind::UniformLinearOrder); }
    static Sampler kaleidoscope(unsigned colors = kKaleidoscopeColors) {
        if (colors < 1 || colors > 64) throw InputError("kaleidoscope needs 1..64 colors");
        auto s = make(SamplerKind::Kaleidoscope);
        s.colors = colors;
        return s;
    }
    static Sampler two_graph() { return make(SamplerKind::TwoGraphGraphing); }
    static Sampler bernoulli_shift_diffuse(CatalogId base = CatalogId::pure_set()) {
        auto s = make(SamplerKind::BernoulliShift);
        s.law = BaseLaw::Diffuse;
        s.base = std::move(base);
        return s;
    }
    static Sampler bernoulli_shift_atomic(unsigned m, CatalogId base = CatalogId::pure_set()) {
        if (m < 1) throw InputError("atomic base law needs at least one atom");
        auto s = make(SamplerKind::BernoulliShift);
        s.law = BaseLaw::Atomic;
        s.atoms = m;
        s.base = std::move(base);
        return s;
    }
    static Sampler bernoulli_shift_ber(double p, CatalogId base = CatalogId::pure_set()) {
        auto s = make(SamplerKind::BernoulliShift, p);
        s.law = BaseLaw::Bernoulli;
        s.base = std::move(base);
        return checked(std::move(s));
    }
    static Sampler sinfty_mixture(double q, double p) {
        auto s = make(SamplerKind::SinftyMixture, p, q);
        if (!(q > 0 && q < 1)) throw InputError("S_inf mixture needs 0 < q < 1");
        return checked(std::move(s));
    }
    static Sampler mixed(std::vector<std::pair<double, Sampler>> parts) {
        if (parts.empty()) throw InputError("mixture needs at least one component");
        double total = 0;
        for (const auto& [w, c] : parts) {
            if (!(w > 0)) throw InputError("mixture weights must be positive");
            total += w;
            if (!c.language().same_symbols(parts[0].second.language()))
                throw InputError("mixture components must share a language");
        }
        if (std::abs(total - 1.0) > 1e-9) throw InputError("mixture weights must sum to 1");
        auto s = make(SamplerKind::MixedIid);
        s.components = std::move(parts);
        s.base = s.components[0].second.base;
        return s;
    }
    static Sampler parity_fixture() { return make(SamplerKind::ParityFixture); }

    // Tokens: er:<p> ulo kaleido[:<colors>] twograph bshift:diffuse
    // bshift:atomic:<m> bshift:ber:<p> sinfty:<q>:<p> parity
    // mix:<w>*<token>+<w>*<token>...   The base catalog applies to bshift.
    static Sampler parse(std::string_view token, const CatalogId& base = CatalogId::pure_set());
    std::string token() const;

    Language language() const {
        switch (kind) {
            case SamplerKind::ErdosRenyi:
            case SamplerKind::ParityFixture: return Language("graph", {{"E", 2}});
            case SamplerKind::UniformLinearOrder: return Language("order", {{"lt", 2}});
            case SamplerKind::Kaleidoscope: {
                std::vector<Symbol> s;
                for (unsigned c = 0; c < colors; ++c) s.push_back({"R" + std::to_string(c), 2});
                return Language("kaleidoscope", std::move(s));
            }
            case SamplerKind::TwoGraphGraphing: return Language("twograph", {{"E", 2}, {"H", 3}});
            case SamplerKind::BernoulliShift: return catalog_language(base);
            case SamplerKind::SinftyMixture: return catalog_language(CatalogId::pure_set());
            case SamplerKind::MixedIid: return components.at(0).second.language();
        }
        return Language();
    }

    bool labeled() const {
        switch (kind) {
            case SamplerKind::BernoulliShift:
            case SamplerKind::SinftyMixture: return true;
            case SamplerKind::MixedIid: return components.at(0).second.labeled();
            default: return false;
        }
    }

    friend bool operator==(const Sampler&, const Sampler&) = default;

private:
    static Sampler make(SamplerKind kind, double p = 0.5, double q = 0.5) {
        Sampler s;
        s.kind = kind;
        s.p = p;
        s.q = q;
        return s;
    }
    static Sampler checked(Sampler s) {
        if (!(s.p >= 0 && s.p <= 1)) throw InputError("probability must lie in [0,1]");
        return s;
    }
};

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
    return rng::hash(seed, {rng::tag("trial"), trial});
}

namespace detail {

inline std::string format_double(double x) {
    std::string s = std::to_string(x);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

inline double parse_probability(std::string_view s, std::string_view what) {
    try {
        std::size_t used = 0;
        double v = std::stod(std::string(s), &used);
        if (used != s.size() || !std::isfinite(v)) throw InputError("");
        return v;
    } catch (const std::exception&) {
        throw InputError("expected a number for " + std::string(what) + ", got '" + std::string(s) + "'");
    }
}

// Deterministic catalog windows are reused across trials.
inline FinStructure cached_base_window(const CatalogId& c, std::size_t n) {
    if (c.kind == CatalogKind::PureSet) return FinStructure(catalog_language(c), n, {});
    static std::mutex mu;
    static std::map<std::string, GeneratorState> cache;
    std::lock_guard lock(mu);
    auto key = c.token();
    if (c.kind == CatalogKind::Henson)
        for (const auto& f : c.forbidden) key += "|" + to_text(f);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, GeneratorState(c)).first;
    if (it->second.window() < n) it->second = extend_window(it->second, n);
    if (it->second.window() == n) return it->second.current();
    return prefix(it->second.current(), n);
}

inline double base_label(const Sampler& s, std::uint64_t seed, Element i) {
    switch (s.law) {
        case BaseLaw::Diffuse: return rng::uniform(seed, {rng::tag("label"), i});
        case BaseLaw::Atomic: {
            if (s.atoms <= 1) return 0.0;
            auto j = rng::hash(seed, {rng::tag("atom"), i}) % s.atoms;
            return static_cast<double>(j) / static_cast<double>(s.atoms - 1);
        }
        case BaseLaw::Bernoulli: return rng::uniform(seed, {rng::tag("ber"), i}) < s.p ? 1.0 : 0.0;
    }
    return 0.0;
}

}  // namespace detail

inline Sampler Sampler::parse(std::string_view token, const CatalogId& base) {
    auto parts = detail::split(token, ':');
    const auto& head = parts[0];
    auto need = [&](std::size_t count) {
        if (parts.size() != count) throw InputError("malformed sampler token '" + std::string(token) + "'");
    };
    auto pure_only = [&](Sampler s) {
        if (base.kind != CatalogKind::PureSet)
            throw InputError("sampler '" + head + "' expands the pure set; use --catalog pureset");
        return s;
    };
    if (head == "mix") {
        auto body = token.substr(4);
        std::vector<std::pair<double, Sampler>> comps;
        for (const auto& term : detail::split(body, '+')) {
            auto star = term.find('*');
            if (star == std::string::npos) throw InputError("mixture terms look like <weight>*<sampler>");
            comps.push_back({detail::parse_probability(term.substr(0, star), "mixture weight"),
                             parse(term.substr(star + 1), base)});
        }
        return mixed(std::move(comps));
    }
    if (head == "er") {
        need(2);
        return pure_only(erdos_renyi(detail::parse_probability(parts[1], "edge probability")));
    }
    if (head == "ulo") {
        need(1);
        return pure_only(uniform_linear_order());
    }
    if (head == "kaleido") {
        if (parts.size() == 1) return pure_only(kaleidoscope());
        need(2);
        return pure_only(kaleidoscope(static_cast<unsigned>(detail::parse_uint(parts[1], "colors"))));
    }
    if (head == "twograph") {
        need(1);
        return pure_only(two_graph());
    }
    if (head == "parity") {
        need(1);
        return pure_only(parity_fixture());
    }
    if (head == "sinfty") {
        need(3);
        return pure_only(sinfty_mixture(detail::parse_probability(parts[1], "q"), detail::parse_probability(parts[2], "p")));
    }
    if (head == "bshift") {
        if (parts.size() == 2 && parts[1] == "diffuse") return bernoulli_shift_diffuse(base);
        if (parts.size() == 3 && parts[1] == "atomic")
            return bernoulli_shift_atomic(static_cast<unsigned>(detail::parse_uint(parts[2], "atoms")), base);
        if (parts.size() == 3 && parts[1] == "ber")
            return bernoulli_shift_ber(detail::parse_probability(parts[2], "Bernoulli parameter"), base);
        throw InputError("bshift takes diffuse, atomic:<m> or ber:<p>");
    }
    throw InputError("unknown sampler '" + std::string(token) + "'");
}

inline std::string Sampler::token() const {
    switch (kind) {
        case SamplerKind::ErdosRenyi: return "er:" + detail::format_double(p);
        case SamplerKind::UniformLinearOrder: return "ulo";
        case SamplerKind::Kaleidoscope: return "kaleido:" + std::to_string(colors);
        case SamplerKind::TwoGraphGraphing: return "twograph";
        case SamplerKind::ParityFixture: return "parity";
        case SamplerKind::SinftyMixture: return "sinfty:" + detail::format_double(q) + ":" + detail::format_double(p);
        case SamplerKind::BernoulliShift:
            switch (law) {
                case BaseLaw::Diffuse: return "bshift:diffuse";
                case BaseLaw::Atomic: return "bshift:atomic:" + std::to_string(atoms);
                case BaseLaw::Bernoulli: return "bshift:ber:" + detail::format_double(p);
            }
            break;
        case SamplerKind::MixedIid: {
            std::string out = "mix:";
            for (std::size_t i = 0; i < components.size(); ++i) {
                if (i) out += "+";
                out += detail::format_double(components[i].first) + "*" + components[i].second.token();
            }
            return out;
        }
    }
    return "?";
}

// A sample on window n. Every random quantity is a hash of (seed, indices), so
// sample(s, seed, n) restricted to {0..m-1} equals sample(s, seed, m).
inline RealExpansion sample(const Sampler& s, std::uint64_t seed, std::size_t n) {
    const auto lang = s.language();
    const auto N = static_cast<Element>(n);
    switch (s.kind) {
        case SamplerKind::ErdosRenyi:
        case SamplerKind::ParityFixture: {
            FinStructure::Builder b(lang, n);
            for (Element i = 0; i < N; ++i)
                for (Element j = i + 1; j < N; ++j) {
                    bool edge = s.kind == SamplerKind::ParityFixture ? (i + j) % 2 == 0
                                                                       : rng::uniform(seed, {rng::tag("er"), i, j}) < s.p;
                    if (edge) b.add_symmetric(0, {i, j});
                }
            return std::move(b).build();
        }
        case SamplerKind::UniformLinearOrder: {
            std::vector<double> key(n);
            for (Element i = 0; i < N; ++i) key[i] = rng::uniform(seed, {rng::tag("ulo"), i});
            FinStructure::Builder b(lang, n);
            for (Element i = 0; i < N; ++i)
                for (Element j = 0; j < N; ++j)
                    if (i != j && (key[i] < key[j] || (key[i] == key[j] && i < j))) b.add(0, {i, j});
            return std::move(b).build();
        }
        case SamplerKind::Kaleidoscope: {
            FinStructure::Builder b(lang, n);
            for (Element i = 0; i < N; ++i)
                for (Element j = i + 1; j < N; ++j) {
                    // Colour set: i.i.d. Ber(2^-M) per colour with M ~ Geometric(1/2), conditioned nonempty.
                    std::vector<unsigned> chosen;
                    for (std::uint64_t attempt = 0; attempt < 64 && chosen.empty(); ++attempt) {
                        auto h = rng::hash(seed, {rng::tag("kal-level"), i, j, attempt});
                        int m = 1 + (h == 0 ? 63 : std::countr_zero(h));
                        double q = std::ldexp(1.0, -m);
                        for (unsigned c = 0; c < s.colors; ++c)
                            if (rng::uniform(seed, {rng::tag("kal-color"), i, j, attempt, c}) < q) chosen.push_back(c);
                    }
                    if (chosen.empty())
                        chosen.push_back(static_cast<unsigned>(rng::hash(seed, {rng::tag("kal-fallback"), i, j}) % s.colors));
                    for (unsigned c : chosen) b.add_symmetric(c, {i, j});
                }
            return std::move(b).build();
        }
        case SamplerKind::TwoGraphGraphing: {
            std::vector<std::vector<char>> e(n, std::vector<char>(n, 0));
            FinStructure::Builder b(lang, n);
            for (Element i = 0; i < N; ++i)
                for (Element j = i + 1; j < N; ++j)
                    if (rng::uniform(seed, {rng::tag("edge"), i, j}) < 0.5) {
                        e[i][j] = e[j][i] = 1;
                        b.add_symmetric(0, {i, j});
                    }
            for (Element i = 0; i < N; ++i)
                for (Element j = i + 1; j < N; ++j)
                    for (Element k = j + 1; k < N; ++k)
                        if ((e[i][j] + e[i][k] + e[j][k]) % 2 == 0) b.add_symmetric(1, {i, j, k});
            return std::move(b).build();
        }
        case SamplerKind::BernoulliShift: {
            std::vector<double> labels(n);
            for (Element i = 0; i < N; ++i) labels[i] = detail::base_label(s, seed, i);
            return RealExpansion(detail::cached_base_window(s.base, n), std::move(labels));
        }
        case SamplerKind::SinftyMixture: {
            std::vector<double> labels(n);
            for (Element i = 0; i < N; ++i) {
                bool diffuse = rng::uniform(seed, {rng::tag("in-A"), i}) < s.q;
                labels[i] = diffuse ? rng::uniform(seed, {rng::tag("X"), i})
                                    : (rng::uniform(seed, {rng::tag("Y"), i}) < s.p ? 1.0 : 0.0);
            }
            return RealExpansion(FinStructure(lang, n, {}), std::move(labels));
        }
        case SamplerKind::MixedIid: {
            double u = rng::uniform(seed, {rng::tag("mix")});
            double acc = 0;
            for (const auto& [w, c] : s.components) {
                acc += w;
                if (u < acc) return sample(c, rng::hash(seed, {rng::tag("component")}), n);
            }
            return sample(s.components.back().second, rng::hash(seed, {rng::tag("component")}), n);
        }
    }
    throw InputError("unknown sampler");
}

namespace detail {

inline constexpr unsigned kLabelBins = 4;

// qf-type of a tuple plus the binned labels of its entries.
inline std::string labeled_type_key(const RealExpansion& x, std::span<const Element> t) {
    std::string key = qf_type(x.structure, t).key();
    if (x.labeled()) {
        key += "|lab=";
        for (Element e : t) {
            auto bin = std::min<unsigned>(kLabelBins - 1, static_cast<unsigned>(x.labels[e] * kLabelBins));
            key += static_cast<char>('0' + bin);
        }
    }
    return key;
}

inline std::vector<Tuple> injective_tuples(std::size_t n, unsigned k) {
    std::vector<Tuple> out;
    for_each_tuple(n, k, [&](const Tuple& t) {
        Tuple s = t;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) == s.end()) out.push_back(t);
    });
    return out;
}

}  // namespace detail

struct InvarianceReport {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    bool degenerate = false;
    bool pass = true;
    std::size_t window = 0;
    std::size_t rows = 0;
};

// Each trial contributes the qf-type of one injective k-tuple (trial t uses
// tuple t mod R), so table rows are independent. Rows are grouped by their
// type in the base structure; within each group the rows must share a law.
inline InvarianceReport invariance_test(const Sampler& s, unsigned k, std::size_t trials, double significance,
                                        std::uint64_t seed, std::size_t window = 0, std::size_t threads = 1) {
    if (trials < 1000) throw InputError("invariance_test needs at least 1000 trials");
    if (k == 0) throw InputError("invariance_test needs k >= 1");
    if (!(significance > 0 && significance < 1)) throw InputError("significance must lie in (0,1)");
    const std::size_t n = window ? window : std::max<std::size_t>(k + 2, 4);
    if (n < k) throw InputError("window smaller than k");
    auto tuples = detail::injective_tuples(n, k);
    auto keys = parallel_map(trials, threads, [&](std::size_t t) {
        auto x = sample(s, trial_seed(seed, t), n);
        return detail::labeled_type_key(x, tuples[t % tuples.size()]);
    });
    std::map<std::string, std::size_t> col;
    for (const auto& key : keys) col.emplace(key, 0);
    std::size_t next = 0;
    for (auto& [_, c] : col) c = next++;

    // Base orbit classes of the tuples.
    FinStructure base = s.kind == SamplerKind::BernoulliShift ? detail::cached_base_window(s.base, n)
                                                              : FinStructure(catalog_language(CatalogId::pure_set()), n, {});
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t r = 0; r < tuples.size(); ++r) groups[qf_type(base, tuples[r]).key()].push_back(r);

    std::vector<std::vector<double>> table(tuples.size(), std::vector<double>(col.size(), 0.0));
    for (std::size_t t = 0; t < trials; ++t) table[t % tuples.size()][col[keys[t]]] += 1;

    InvarianceReport rep;
    rep.window = n;
    rep.rows = tuples.size();
    bool any = false;
    for (const auto& [_, rows] : groups) {
        std::vector<std::vector<double>> sub;
        for (auto r : rows) sub.push_back(table[r]);
        auto chi = stats::chi_square_homogeneity(sub);
        if (chi.degenerate) continue;
        any = true;
        rep.statistic += chi.statistic;
        rep.dof += chi.dof;
    }
    rep.degenerate = !any;
    rep.p_value = any ? stats::chi_square_sf(rep.statistic, rep.dof) : 1.0;
    rep.pass = rep.degenerate || rep.p_value >= significance;
    return rep;
}

struct DissociationReport {
    double mutual_information = 0.0;  // nats
    double threshold = 0.0;           // 1/sqrt(trials)
    double g_statistic = 0.0;
    double g_p_value = 1.0;
    bool pass = true;
};

inline DissociationReport dissociation_test(const Sampler& s, std::span<const Element> a, std::span<const Element> b,
                                            std::size_t trials, std::uint64_t seed, std::size_t threads = 1) {
    if (trials == 0) throw InputError("dissociation_test needs trials >= 1");
    if (a.empty() || b.empty()) throw InputError("dissociation_test needs nonempty A and B");
    for (Element x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) throw InputError("A and B must be disjoint");
    Element top = 0;
    for (Element x : a) top = std::max(top, x);
    for (Element x : b) top = std::max(top, x);
    const std::size_t n = top + 1;
    auto pairs = parallel_map(trials, threads, [&](std::size_t t) {
        auto x = sample(s, trial_seed(seed, t), n);
        return std::make_pair(detail::labeled_type_key(x, a), detail::labeled_type_key(x, b));
    });
    std::map<std::string, std::size_t> ra, rb;
    for (const auto& [ka, kb] : pairs) {
        ra.emplace(ka, 0);
        rb.emplace(kb, 0);
    }
    std::size_t i = 0;
    for (auto& [_, v] : ra) v = i++;
    i = 0;
    for (auto& [_, v] : rb) v = i++;
    std::vector<std::vector<double>> joint(ra.size(), std::vector<double>(rb.size(), 0.0));
    for (const auto& [ka, kb] : pairs) joint[ra[ka]][rb[kb]] += 1;
    DissociationReport rep;
    rep.mutual_information = stats::mutual_information(joint);
    rep.threshold = 1.0 / std::sqrt(static_cast<double>(trials));
    auto g = stats::g_test(joint);
    rep.g_statistic = g.statistic;
    rep.g_p_value = g.p_value;
    rep.pass = rep.mutual_information < rep.threshold;
    return rep;
}

struct MixingAtom {
    double location = 0.0;
    double weight = 0.0;
    std::size_t samples = 0;
    double ks_uniform = 0.0;  // pooled labels of the atom's samples vs U[0,1]; 0 if unlabeled
};

struct DeFinettiEstimate {
    std::vector<MixingAtom> atoms;  // ascending location
    std::vector<double> summaries;  // per-sample marginal summary
    std::size_t chosen_k = 1;
};

// Per-sample summary of the one-point marginal: the mean label if labeled,
// else the frequency of the first unary relation, else the density of the
// first binary relation over ordered pairs of distinct points.
inline double marginal_summary(const RealExpansion& x) {
    const std::size_t n = x.window();
    if (n == 0) return 0.0;
    if (x.labeled()) return std::accumulate(x.labels.begin(), x.labels.end(), 0.0) / static_cast<double>(n);
    const auto& lang = x.structure.language();
    for (std::size_t s = 0; s < lang.size(); ++s)
        if (lang[s].arity == 1) return static_cast<double>(x.structure.relation(s).size()) / static_cast<double>(n);
    for (std::size_t s = 0; s < lang.size(); ++s)
        if (lang[s].arity == 2 && n > 1) {
            std::size_t off = 0;
            for (const auto& t : x.structure.relation(s)) off += t[0] != t[1];
            return static_cast<double>(off) / static_cast<double>(n * (n - 1));
        }
    throw InputError("no unary or binary relation and no labels to summarize");
}

inline constexpr std::size_t kMaxMixingAtoms = 8;

inline DeFinettiEstimate definetti_decompose(const std::vector<RealExpansion>& samples, std::uint64_t seed = 0) {
    if (samples.size() < 100) throw InputError("de Finetti decomposition needs at least 100 samples");
    for (const auto& x : samples)
        if (x.window() < 100) throw InputError("de Finetti decomposition needs windows of at least 100 points");
    DeFinettiEstimate est;
    for (const auto& x : samples) est.summaries.push_back(marginal_summary(x));
    auto gap = stats::gap_statistic(est.summaries, kMaxMixingAtoms, 20, seed);
    est.chosen_k = gap.k;
    auto cl = stats::kmeans_1d(est.summaries, gap.k);
    for (std::size_t c = 0; c < cl.centers.size(); ++c) {
        MixingAtom atom;
        atom.location = cl.centers[c];
        atom.samples = cl.sizes[c];
        atom.weight = static_cast<double>(cl.sizes[c]) / static_cast<double>(samples.size());
        std::vector<double> pooled;
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (cl.assignment[i] == c && samples[i].labeled())
                pooled.insert(pooled.end(), samples[i].labels.begin(), samples[i].labels.end());
        atom.ks_uniform = pooled.empty() ? 0.0 : stats::ks_uniform(pooled);
        est.atoms.push_back(atom);
    }
    return est;
}

struct FixedPointReport {
    double flagged_fraction = 0.0;
    double threshold = 0.05;
    std::size_t trials = 0;
    bool pass = true;
};

inline constexpr double kFixedPointThreshold = 0.05;

// Points of a window moved by no automorphism of the window.
inline std::vector<Element> window_fixed_points(const RealExpansion& x, std::size_t budget = kDefaultSearchBudget) {
    std::vector<Element> out;
    for (Element e = 0; e < x.window(); ++e)
        if (automorphism_search(x, e, budget).status == AutomorphismStatus::None) out.push_back(e);
    return out;
}

// Fraction of samples whose window automorphism group fixes a small positive
// number of points (at most a quarter of the window) and whose fixed set does
// not grow when the window doubles: the same points stay fixed and no new ones
// join. For invariant expansions without algebraicity the fixed set is either
// empty or infinite, so this should vanish. Rigid windows fix everything and
// are not flagged.
inline FixedPointReport fixed_point_monitor(const Sampler& s, std::size_t window, std::size_t trials,
                                            std::uint64_t seed, std::size_t threads = 1) {
    if (window < 4) throw InputError("fixed-point monitor needs window >= 4");
    auto flags = parallel_map(trials, threads, [&](std::size_t t) -> char {
        auto ts = trial_seed(seed, t);
        auto small = window_fixed_points(sample(s, ts, window));
        if (small.empty() || small.size() > window / 4) return 0;
        auto large = window_fixed_points(sample(s, ts, 2 * window));
        if (large.size() > small.size()) return 0;
        for (Element e : small)
            if (!std::binary_search(large.begin(), large.end(), e)) return 0;
        return 1;
    });
    FixedPointReport rep;
    rep.trials = trials;
    rep.threshold = kFixedPointThreshold;
    rep.flagged_fraction =
        trials ? static_cast<double>(std::count(flags.begin(), flags.end(), 1)) / static_cast<double>(trials) : 0.0;
    rep.pass = rep.flagged_fraction <= rep.threshold;
    return rep;
}

}  // namespace homlab
