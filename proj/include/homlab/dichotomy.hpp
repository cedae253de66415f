#pragma once

// Essential freeness versus essential transitivity at window scale: single
// samples are scored for rigidity, independent pairs for how much of one can
// be matched onto the other.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homlab/backforth.hpp"
#include "homlab/catalog.hpp"
#include "homlab/ire.hpp"
#include "homlab/orbits.hpp"
#include "homlab/parallel.hpp"
#include "homlab/rng.hpp"

namespace homlab {

enum class Verdict { FreeEvidence, TransitiveEvidence, Neither, Inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::FreeEvidence: return "FreeEvidence";
        case Verdict::TransitiveEvidence: return "TransitiveEvidence";
        case Verdict::Neither: return "Neither";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

struct DichotomyThresholds {
    double free_min = 0.99;         // freeness_score needed for FreeEvidence
    double free_match_max = 0.05;   // matching_score allowed with FreeEvidence
    double transitive_c = 3.0;      // pair passes if matched >= 1 - c*sqrt(n ln n)/n
    double transitive_rate = 0.95;  // share of passing pairs for TransitiveEvidence
    double neither_free_max = 0.90;
    double neither_match_min = 0.10;
    double neither_rate_max = 0.90;
    std::size_t search_budget = 20'000;
};

struct DichotomyReport {
    std::size_t window = 0;
    std::size_t trials = 0;  // single samples and also independent pairs
    double freeness_score = 0.0;
    double matching_score = 0.0;       // mean matched fraction over pairs
    double transitive_pass_rate = 0.0;  // share of pairs above the matched-fraction bound
    double matched_bound = 0.0;
    std::size_t budget_exhausted = 0;  // automorphism searches that gave up (counted as not free)
    std::vector<double> matched_fractions;
    Verdict verdict = Verdict::Inconclusive;
};

inline double transitive_bound(std::size_t n, double c) {
    const double x = static_cast<double>(n);
    return 1.0 - c * std::sqrt(x * std::log(x)) / x;
}

inline Verdict decide(double freeness, double matching, double pass_rate, const DichotomyThresholds& th) {
    if (freeness >= th.free_min && matching <= th.free_match_max) return Verdict::FreeEvidence;
    if (pass_rate >= th.transitive_rate) return Verdict::TransitiveEvidence;
    if ((freeness < th.neither_free_max || matching > th.neither_match_min) && pass_rate < th.neither_rate_max)
        return Verdict::Neither;
    return Verdict::Inconclusive;
}

// Fraction of one window that can be matched onto the other. Labeled
// expansions are coupled by counting points with equal (1-type, label) on
// both sides, since any maximal label-respecting matching has exactly that
// size; unlabeled ones fall back to back-and-forth, scoring the largest
// partial isomorphism reached.
inline double matched_fraction(const RealExpansion& x, const RealExpansion& y, std::size_t budget) {
    const std::size_t n = x.window();
    if (n == 0 || y.window() != n) throw InputError("matched_fraction needs equal nonempty windows");
    if (x.labeled()) {
        auto classes = [](const RealExpansion& e) {
            std::map<std::pair<std::string, double>, std::size_t> out;
            for (Element i = 0; i < e.window(); ++i)
                out[{qf_type(e.structure, std::vector<Element>{i}).key(), e.labels[i]}]++;
            return out;
        };
        auto cx = classes(x), cy = classes(y);
        std::size_t matched = 0;
        for (const auto& [k, c] : cx)
            if (auto it = cy.find(k); it != cy.end()) matched += std::min(c, it->second);
        return static_cast<double>(matched) / static_cast<double>(n);
    }
    if (build_isomorphism(x, y, budget).found) return 1.0;
    return static_cast<double>(largest_partial_isomorphism(x, y, budget).size()) / static_cast<double>(n);
}

inline DichotomyReport classify(const Sampler& s, std::size_t window, std::size_t trials, std::uint64_t seed,
                                const DichotomyThresholds& th = {}, std::size_t threads = 1) {
    if (trials < 100) throw InputError("classify needs at least 100 trials");
    if (window < 2) throw InputError("classify needs window >= 2");
    DichotomyReport rep;
    rep.window = window;
    rep.trials = trials;
    rep.matched_bound = transitive_bound(window, th.transitive_c);
    struct Trial {
        AutomorphismStatus status = AutomorphismStatus::None;
        double matched = 0.0;
    };
    auto results = parallel_map(trials, threads, [&](std::size_t t) {
        Trial r;
        auto single = sample(s, rng::hash(seed, {rng::tag("single"), t}), window);
        r.status = automorphism_search(single, std::nullopt, th.search_budget).status;
        auto left = sample(s, rng::hash(seed, {rng::tag("left"), t}), window);
        auto right = sample(s, rng::hash(seed, {rng::tag("right"), t}), window);
        r.matched = matched_fraction(left, right, th.search_budget);
        return r;
    });
    std::size_t free = 0, pass = 0;
    double total = 0;
    for (const auto& r : results) {
        free += r.status == AutomorphismStatus::None;
        rep.budget_exhausted += r.status == AutomorphismStatus::BudgetExhausted;
        total += r.matched;
        pass += r.matched >= rep.matched_bound;
        rep.matched_fractions.push_back(r.matched);
    }
    const double n = static_cast<double>(trials);
    rep.freeness_score = static_cast<double>(free) / n;
    rep.matching_score = total / n;
    rep.transitive_pass_rate = static_cast<double>(pass) / n;
    rep.verdict = decide(rep.freeness_score, rep.matching_score, rep.transitive_pass_rate, th);
    return rep;
}

struct ProbeReport {
    std::size_t window = 0;
    std::size_t search_window = 0;
    std::size_t pairs = 0;
    std::size_t separated = 0;
    double success_rate = 0.0;
    std::vector<std::pair<Element, Element>> failures;  // first few unseparated pairs
};

// Samples distinct pairs (x, y) of the deterministic window and looks for a
// tuple whose type over x differs from its type over y. Witnesses may come
// from a window search_factor times larger, since two points adjacent in a
// small dense window have nothing between them yet.
inline ProbeReport transposition_probe(const CatalogId& c, std::size_t window, std::size_t pairs, std::uint64_t seed,
                                       std::size_t threads = 1, std::size_t search_factor = 4) {
    if (window < 3) throw InputError("transposition probe needs window >= 3");
    if (pairs == 0) throw InputError("transposition probe needs pairs >= 1");
    if (search_factor < 1) throw InputError("search factor must be >= 1");
    const auto m = generate(c, window * search_factor);
    auto pair_at = [&](std::size_t i) {
        auto x = static_cast<Element>(rng::hash(seed, {rng::tag("px"), i}) % window);
        auto y = static_cast<Element>(rng::hash(seed, {rng::tag("py"), i}) % (window - 1));
        if (y >= x) ++y;
        return std::make_pair(x, y);
    };
    auto ok = parallel_map(pairs, threads, [&](std::size_t i) -> char {
        auto [x, y] = pair_at(i);
        return separating_tuple(m, x, y).has_value() ? 1 : 0;
    });
    ProbeReport rep;
    rep.window = window;
    rep.search_window = m.window();
    rep.pairs = pairs;
    for (std::size_t i = 0; i < pairs; ++i) {
        if (ok[i]) {
            ++rep.separated;
        } else if (rep.failures.size() < 5) {
            rep.failures.push_back(pair_at(i));
        }
    }
    rep.success_rate = static_cast<double>(rep.separated) / static_cast<double>(pairs);
    return rep;
}

}  // namespace homlab
