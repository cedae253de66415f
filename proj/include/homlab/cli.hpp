#pragma once

// Command driver: a RunConfig names a subcommand plus flags, run() dispatches
// it and writes JSON lines, the summary record last. Exit status 0 on
// success, 1 when a check or statistical test fails, 2 on bad input.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "homlab/backforth.hpp"
#include "homlab/catalog.hpp"
#include "homlab/dichotomy.hpp"
#include "homlab/group.hpp"
#include "homlab/ire.hpp"
#include "homlab/orbits.hpp"
#include "homlab/structure.hpp"

namespace homlab::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

struct RunConfig {
    std::vector<std::string> command;  // e.g. {"gagb"} or {"irs", "realize"}
    std::string catalog;
    std::string sampler;
    std::optional<std::size_t> window;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    double significance = 0.01;
    std::string output;       // empty: the stream passed to run()
    std::size_t threads = 0;  // 0: hardware concurrency
    std::map<std::string, std::string> options;  // command-specific flags without the leading "--"
    bool per_trial = false;
};

// Command-specific flags, each taking one value.
inline const std::vector<std::pair<std::string, std::string>>& option_flags() {
    static const std::vector<std::pair<std::string, std::string>> flags = {
        {"in", "structure file"},
        {"left", "structure file (source)"},
        {"right", "structure file (target)"},
        {"tuple", "comma-separated window elements"},
        {"subset", "comma-separated window elements"},
        {"perm", "permutation in cycle notation"},
        {"A", "comma-separated parameter set"},
        {"B", "comma-separated parameter set"},
        {"k", "tuple length"},
        {"type", "qf-type key"},
        {"mode", "deterministic | random"},
        {"max-window", "largest window for the acl probe"},
        {"x", "window element"},
        {"y", "window element"},
        {"side", "forth | back"},
        {"pairs", "partial map as a:b,c:d"},
        {"require-moved", "element an automorphism must move"},
        {"budget", "search node budget"},
        {"group", "S<n>, A<n> or gens:<n>:<cycles>"},
        {"H", "subgroup generators in cycle notation, ';'-separated"},
        {"g", "group element in cycle notation"},
        {"law", "class | delta"},
        {"L", "tuple length cap"},
        {"labels", "comma-separated labels in [0,1]"},
    };
    return flags;
}

struct Command {
    std::string name;  // space-separated words
    std::string help;
    std::vector<std::string> operations;  // library operations it exercises
    bool needs_seed = false;
    std::function<int(const RunConfig&, std::ostream&)> handler;
};

namespace detail {

inline void emit(std::ostream& out, const Json& j) { out << j.dump() << '\n'; }

inline const std::string* find_option(const RunConfig& c, const std::string& name) {
    auto it = c.options.find(name);
    return it == c.options.end() ? nullptr : &it->second;
}

inline const std::string& require_option(const RunConfig& c, const std::string& name) {
    if (const auto* v = find_option(c, name)) return *v;
    throw InputError("missing --" + name);
}

inline std::size_t option_size(const RunConfig& c, const std::string& name, std::size_t fallback) {
    const auto* v = find_option(c, name);
    return v ? static_cast<std::size_t>(homlab::detail::parse_uint(*v, name)) : fallback;
}

inline std::vector<Element> parse_elements(std::string_view text) {
    std::vector<Element> out;
    if (text.empty() || text == "none" || text == "-") return out;
    for (const auto& part : homlab::detail::split(text, ','))
        out.push_back(static_cast<Element>(homlab::detail::parse_uint(part, "element")));
    return out;
}

inline std::vector<Element> option_elements(const RunConfig& c, const std::string& name) {
    const auto* v = find_option(c, name);
    return v ? parse_elements(*v) : std::vector<Element>{};
}

inline std::size_t window_of(const RunConfig& c, std::size_t fallback) {
    auto n = c.window.value_or(fallback);
    if (n == 0) throw InputError("--window must be positive");
    return n;
}

inline std::size_t trials_of(const RunConfig& c, std::size_t fallback) {
    auto n = c.trials.value_or(fallback);
    if (n == 0) throw InputError("--trials must be positive");
    return n;
}

inline std::uint64_t seed_of(const RunConfig& c) {
    if (!c.seed) throw InputError("--seed is required for this command");
    return *c.seed;
}

inline CatalogId catalog_of(const RunConfig& c) {
    if (c.catalog.empty()) throw InputError("missing --catalog");
    return CatalogId::parse(c.catalog);
}

inline CatalogId base_catalog_of(const RunConfig& c) {
    return c.catalog.empty() ? CatalogId::pure_set() : CatalogId::parse(c.catalog);
}

inline Sampler sampler_of(const RunConfig& c) {
    if (c.sampler.empty()) throw InputError("missing --sampler");
    return Sampler::parse(c.sampler, base_catalog_of(c));
}

inline GenerationMode mode_of(const RunConfig& c) {
    const auto* m = find_option(c, "mode");
    if (!m || *m == "deterministic") return GenerationMode::DeterministicGeneric;
    if (*m == "random") return GenerationMode::Randomized;
    throw InputError("--mode takes deterministic or random");
}

inline std::uint64_t mode_seed(const RunConfig& c) {
    return mode_of(c) == GenerationMode::Randomized ? seed_of(c) : c.seed.value_or(0);
}

inline Json elements_json(std::span<const Element> v) { return Json(std::vector<Element>(v.begin(), v.end())); }

inline Json group_json(const FiniteGroup& g) {
    return Json{{"order", g.order()}, {"generators", g.generators_text()}};
}

inline Json header(const std::string& name) {
    Json j;
    j["command"] = name;
    return j;
}

inline FinStructure structure_option(const RunConfig& c, const std::string& name) {
    return read_structure_file(require_option(c, name));
}

// ---- core structures ----

inline int cmd_qftype(const RunConfig& c, std::ostream& out) {
    auto m = structure_option(c, "in");
    auto t = parse_elements(require_option(c, "tuple"));
    auto ty = qf_type(m, t);
    auto j = header("qftype");
    j["tuple"] = elements_json(t);
    j["classes"] = ty.classes();
    j["key"] = ty.key();
    emit(out, j);
    return kExitOk;
}

inline int cmd_act(const RunConfig& c, std::ostream& out) {
    auto m = structure_option(c, "in");
    auto g = FinPermutation::from_cycles(m.window(), require_option(c, "perm"));
    auto j = header("act");
    j["perm"] = g.to_cycles();
    j["structure"] = to_text(act(g, m));
    emit(out, j);
    return kExitOk;
}

inline int cmd_induced(const RunConfig& c, std::ostream& out) {
    auto m = structure_option(c, "in");
    auto s = parse_elements(require_option(c, "subset"));
    auto j = header("induced");
    j["subset"] = elements_json(s);
    j["structure"] = to_text(induced(m, s));
    emit(out, j);
    return kExitOk;
}

// ---- catalog ----

inline int cmd_generate(const RunConfig& c, std::ostream& out) {
    auto cat = catalog_of(c);
    auto n = window_of(c, 16);
    GeneratorState s(cat, mode_of(c), mode_seed(c));
    s = extend_window(s, n);
    auto j = header("generate");
    j["catalog"] = cat.token();
    j["window"] = n;
    j["tuples"] = s.current().tuple_count();
    j["structure"] = to_text(s.current());
    emit(out, j);
    return kExitOk;
}

inline int cmd_age(const RunConfig& c, std::ostream& out) {
    auto cat = catalog_of(c);
    auto m = structure_option(c, "in");
    bool member = age_member(cat, m);
    auto j = header("age");
    j["catalog"] = cat.token();
    j["member"] = member;
    emit(out, j);
    return kExitOk;
}

inline int cmd_witness(const RunConfig& c, std::ostream& out) {
    auto cat = catalog_of(c);
    auto n = window_of(c, 16);
    auto params = option_elements(c, "A");
    auto desired = QfType::from_key(catalog_language(cat), require_option(c, "type"));
    auto s = extend_window(GeneratorState(cat, mode_of(c), mode_seed(c)), n);
    auto z = witness_extension(s, params, desired);
    auto j = header("witness");
    j["catalog"] = cat.token();
    j["window"] = n;
    j["A"] = elements_json(params);
    j["result"] = z ? Json(*z) : Json("NotFound");
    emit(out, j);
    return kExitOk;
}

// ---- back-and-forth ----

inline std::size_t budget_of(const RunConfig& c) { return option_size(c, "budget", kDefaultSearchBudget); }

inline Json pairs_json(const PartialIso& p) {
    Json arr = Json::array();
    for (const auto& [a, b] : p.pairs()) arr.push_back({a, b});
    return arr;
}

inline int cmd_backforth(const RunConfig& c, std::ostream& out) {
    auto l = structure_option(c, "left"), r = structure_option(c, "right");
    auto res = build_isomorphism(l, r, budget_of(c));
    auto j = header("backforth");
    j["result"] = res.found ? "Isomorphic" : (res.budget_exhausted ? "BudgetExhausted" : "NotIsomorphic");
    j["nodes"] = res.nodes;
    j["map_size"] = res.best.size();
    j["map"] = pairs_json(res.best);
    emit(out, j);
    return kExitOk;
}

inline int cmd_extend(const RunConfig& c, std::ostream& out) {
    auto l = structure_option(c, "left"), r = structure_option(c, "right");
    std::vector<std::pair<Element, Element>> pairs;
    if (const auto* text = find_option(c, "pairs"); text && !text->empty())
        for (const auto& part : homlab::detail::split(*text, ',')) {
            auto ab = homlab::detail::split(part, ':');
            if (ab.size() != 2) throw InputError("--pairs entries look like a:b");
            pairs.push_back({static_cast<Element>(homlab::detail::parse_uint(ab[0], "pair")),
                             static_cast<Element>(homlab::detail::parse_uint(ab[1], "pair"))});
        }
    auto p = PartialIso::from_pairs(l, r, pairs);
    const auto* side_text = find_option(c, "side");
    ExtendSide side = ExtendSide::Forth;
    if (side_text && *side_text == "back") side = ExtendSide::Back;
    else if (side_text && *side_text != "forth") throw InputError("--side takes forth or back");
    auto x = static_cast<Element>(homlab::detail::parse_uint(require_option(c, "x"), "x"));
    auto partner = try_extend(p, side, x);
    auto j = header("extend");
    j["side"] = side == ExtendSide::Forth ? "forth" : "back";
    j["x"] = x;
    j["result"] = partner ? Json(*partner) : Json("Stuck");
    emit(out, j);
    return kExitOk;
}

inline int cmd_automorphism(const RunConfig& c, std::ostream& out) {
    auto m = structure_option(c, "in");
    std::optional<Element> moved;
    if (const auto* v = find_option(c, "require-moved"))
        moved = static_cast<Element>(homlab::detail::parse_uint(*v, "require-moved"));
    auto res = automorphism_search(m, moved, budget_of(c));
    auto j = header("automorphism");
    switch (res.status) {
        case AutomorphismStatus::Found: j["result"] = res.automorphism->to_cycles(); break;
        case AutomorphismStatus::None: j["result"] = "None"; break;
        case AutomorphismStatus::BudgetExhausted: j["result"] = "BudgetExhausted"; break;
    }
    j["nodes"] = res.nodes;
    emit(out, j);
    return kExitOk;
}

// ---- orbits ----

inline unsigned k_of(const RunConfig& c, unsigned fallback) {
    auto k = option_size(c, "k", fallback);
    if (k == 0) throw InputError("--k must be positive");
    return static_cast<unsigned>(k);
}

inline int cmd_orbits(const RunConfig& c, std::ostream& out) {
    auto cat = catalog_of(c);
    auto n = window_of(c, 16);
    auto k = k_of(c, 1);
    auto a = option_elements(c, "A");
    auto m = find_option(c, "in") ? structure_option(c, "in")
                                   : extend_window(GeneratorState(cat, mode_of(c), mode_seed(c)), n).current();
    auto p = tuple_orbits(cat, m, k, a);
    auto j = header("orbits");
    j["catalog"] = cat.token();
    j["window"] = m.window();
    j["k"] = k;
    j["A"] = elements_json(p.params);
    j["block_count"] = p.block_count();
    Json sizes = Json::array();
    for (const auto& b : p.blocks) sizes.push_back(b.size());
    j["block_sizes"] = sizes;
    emit(out, j);
    return kExitOk;
}

inline int cmd_gagb(const RunConfig& c, std::ostream& out) {
    auto cat = catalog_of(c);
    auto a = option_elements(c, "A"), b = option_elements(c, "B");
    auto k = k_of(c, 1);
    auto n = window_of(c, 32);
    auto r = gagb_check(GeneratorState(cat, mode_of(c), mode_seed(c)), a, b, n, k);
    auto j = header("gagb");
    j["catalog"] = cat.token();
    j["A"] = elements_json(a);
    j["B"] = elements_json(b);
    j["k"] = k;
    j["window"] = r.window;
    j["join_blocks"] = r.join_blocks;
    j["meet_blocks"] = r.meet_blocks;
    j["result"] = r.holds ? "Holds" : "FailsWithCertificate";
    if (r.certificate) j["certificate"] = {elements_json(r.certificate->first), elements_json(r.certificate->second)};
    emit(out, j);
    return r.holds ? kExitOk : kExitCheckFailed;
}

inline int cmd_acl(const RunConfig& c, std::ostream& out) {
    auto cat = catalog_of(c);
    auto a = option_elements(c, "A");
    auto max_window = option_size(c, "max-window", 64);
    auto found = acl_probe(cat, a, max_window, mode_of(c), mode_seed(c));
    auto j = header("acl");
    j["catalog"] = cat.token();
    j["A"] = elements_json(a);
    j["max_window"] = max_window;
    j["acl"] = elements_json(found);
    emit(out, j);
    return kExitOk;
}

inline int cmd_separate(const RunConfig& c, std::ostream& out) {
    auto x = static_cast<Element>(homlab::detail::parse_uint(require_option(c, "x"), "x"));
    auto y = static_cast<Element>(homlab::detail::parse_uint(require_option(c, "y"), "y"));
    std::optional<Tuple> t;
    auto j = header("separate");
    if (find_option(c, "in")) {
        t = separating_tuple(structure_option(c, "in"), x, y);
    } else {
        auto cat = catalog_of(c);
        auto n = window_of(c, 32);
        t = separating_tuple(cat, x, y, n);
        j["catalog"] = cat.token();
        j["window"] = n;
    }
    j["x"] = x;
    j["y"] = y;
    j["result"] = t ? elements_json(*t) : Json("NotFound");
    emit(out, j);
    return kExitOk;
}

// ---- samplers ----

inline Json sampler_header(const RunConfig& c, const std::string& name, const Sampler& s, std::size_t n) {
    auto j = header(name);
    j["sampler"] = s.token();
    if (s.kind == SamplerKind::BernoulliShift) j["catalog"] = s.base.token();
    j["seed"] = seed_of(c);
    j["window"] = n;
    return j;
}

inline constexpr std::size_t kTypeFrequencyWindow = 6;

inline int cmd_sample(const RunConfig& c, std::ostream& out) {
    auto s = sampler_of(c);
    auto n = window_of(c, 3);
    auto trials = trials_of(c, 1);
    auto seed = seed_of(c);
    Tuple all(n);
    std::iota(all.begin(), all.end(), Element{0});
    const bool types = n <= kTypeFrequencyWindow;
    struct Row {
        std::string key;
        double summary = 0.0;
        std::size_t tuples = 0;
    };
    auto rows = parallel_map(trials, c.threads, [&](std::size_t t) {
        auto x = sample(s, trial_seed(seed, t), n);
        Row r;
        if (types) r.key = homlab::detail::labeled_type_key(x, all);
        r.tuples = x.structure.tuple_count();
        try {
            r.summary = marginal_summary(x);
        } catch (const InputError&) {
            r.summary = 0.0;
        }
        return r;
    });
    std::map<std::string, std::size_t> counts;
    double mean = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        if (c.per_trial) {
            Json rec{{"trial", t}, {"summary", rows[t].summary}, {"tuples", rows[t].tuples}};
            if (types) rec["type"] = rows[t].key;
            emit(out, rec);
        }
        if (types) counts[rows[t].key]++;
        mean += rows[t].summary;
    }
    auto j = sampler_header(c, "sample", s, n);
    j["trials"] = trials;
    j["mean_summary"] = mean / static_cast<double>(trials);
    if (types) {
        Json freq = Json::object();
        for (const auto& [k, v] : counts) freq[k] = static_cast<double>(v) / static_cast<double>(trials);
        j["distinct_types"] = counts.size();
        j["frequencies"] = freq;
    }
    emit(out, j);
    return kExitOk;
}

inline int cmd_invariance(const RunConfig& c, std::ostream& out) {
    auto s = sampler_of(c);
    auto k = k_of(c, 2);
    auto trials = trials_of(c, 10000);
    auto n = c.window.value_or(0);
    auto r = invariance_test(s, k, trials, c.significance, seed_of(c), n, c.threads);
    auto j = sampler_header(c, "invariance", s, r.window);
    j["k"] = k;
    j["trials"] = trials;
    j["statistic"] = r.statistic;
    j["dof"] = r.dof;
    j["p_value"] = r.p_value;
    j["significance"] = c.significance;
    j["degenerate"] = r.degenerate;
    j["pass"] = r.pass;
    emit(out, j);
    return r.pass ? kExitOk : kExitCheckFailed;
}

inline int cmd_dissociation(const RunConfig& c, std::ostream& out) {
    auto s = sampler_of(c);
    auto a = option_elements(c, "A"), b = option_elements(c, "B");
    auto trials = trials_of(c, 10000);
    auto r = dissociation_test(s, a, b, trials, seed_of(c), c.threads);
    Element top = 0;
    for (Element e : a) top = std::max(top, e);
    for (Element e : b) top = std::max(top, e);
    auto j = sampler_header(c, "dissociation", s, top + 1);
    j["A"] = elements_json(a);
    j["B"] = elements_json(b);
    j["trials"] = trials;
    j["statistic"] = r.mutual_information;
    j["threshold"] = r.threshold;
    j["g_statistic"] = r.g_statistic;
    j["g_p_value"] = r.g_p_value;
    j["pass"] = r.pass;
    emit(out, j);
    return r.pass ? kExitOk : kExitCheckFailed;
}

inline int cmd_definetti(const RunConfig& c, std::ostream& out) {
    auto s = sampler_of(c);
    auto n = window_of(c, 400);
    auto trials = trials_of(c, 200);
    auto seed = seed_of(c);
    auto samples = parallel_map(trials, c.threads, [&](std::size_t t) { return sample(s, trial_seed(seed, t), n); });
    auto est = definetti_decompose(samples, seed);
    auto j = sampler_header(c, "definetti", s, n);
    j["trials"] = trials;
    j["k"] = est.chosen_k;
    Json atoms = Json::array();
    for (const auto& a : est.atoms)
        atoms.push_back({{"location", a.location}, {"weight", a.weight}, {"samples", a.samples},
                         {"ks_uniform", a.ks_uniform}});
    j["atoms"] = atoms;
    emit(out, j);
    return kExitOk;
}

inline int cmd_fixedpoints(const RunConfig& c, std::ostream& out) {
    auto s = sampler_of(c);
    auto n = window_of(c, 12);
    auto trials = trials_of(c, 100);
    auto r = fixed_point_monitor(s, n, trials, seed_of(c), c.threads);
    auto j = sampler_header(c, "fixedpoints", s, n);
    j["trials"] = trials;
    j["statistic"] = r.flagged_fraction;
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    emit(out, j);
    return r.pass ? kExitOk : kExitCheckFailed;
}

// ---- invariant random subgroups ----

inline FiniteGroup group_of(const RunConfig& c) { return FiniteGroup::parse(require_option(c, "group")); }

inline FiniteGroup h_of(const RunConfig& c, const FiniteGroup& g) { return subgroup(g, require_option(c, "H")); }

inline int cmd_irs_stab(const RunConfig& c, std::ostream& out) {
    auto g = group_of(c);
    std::vector<double> labels;
    if (const auto* text = find_option(c, "labels"))
        for (const auto& part : homlab::detail::split(*text, ','))
            labels.push_back(homlab::detail::parse_probability(part, "label"));
    FinStructure base = find_option(c, "in") ? structure_option(c, "in")
                                             : FinStructure(catalog_language(CatalogId::pure_set()), g.degree(), {});
    RealExpansion point(std::move(base), std::move(labels));
    auto st = stabilizer(g, point);
    auto j = header("irs stab");
    j["group"] = group_json(g);
    j["stabilizer"] = group_json(st);
    emit(out, j);
    return kExitOk;
}

inline int cmd_irs_mgh(const RunConfig& c, std::ostream& out) {
    auto g = group_of(c);
    auto h = h_of(c, g);
    auto L = static_cast<unsigned>(option_size(c, "L", g.degree()));
    auto m = mg_of_h(g, h, L);
    auto aut = automorphisms_within(g, m);
    auto nor = normalizer(g, h);
    auto j = header("irs mgh");
    j["group"] = group_json(g);
    j["H"] = group_json(h);
    j["L"] = L;
    j["symbols"] = m.symbol_count();
    j["tuples"] = m.tuple_count();
    j["automorphisms"] = group_json(aut);
    j["normalizer"] = group_json(nor);
    j["aut_equals_normalizer"] = aut == nor;
    emit(out, j);
    return aut == nor ? kExitOk : kExitCheckFailed;
}

inline int cmd_irs_realize(const RunConfig& c, std::ostream& out) {
    auto g = group_of(c);
    auto h = h_of(c, g);
    auto trials = trials_of(c, 100);
    const auto* law_text = find_option(c, "law");
    SubgroupLaw nu;
    if (!law_text || *law_text == "class") nu = SubgroupLaw::conjugacy_class(g, h);
    else if (*law_text == "delta") nu = SubgroupLaw::delta(h);
    else throw InputError("--law takes class or delta");
    auto r = realize_irs(g, nu, seed_of(c), trials, c.threads);
    if (c.per_trial)
        for (std::size_t t = 0; t < r.per_trial.size(); ++t)
            emit(out, Json{{"trial", t},
                           {"drawn", r.per_trial[t].drawn},
                           {"stabilizer_order", r.per_trial[t].stabilizer.order()},
                           {"exact", r.per_trial[t].exact}});
    auto j = header("irs realize");
    j["group"] = group_json(g);
    j["H"] = group_json(h);
    j["seed"] = seed_of(c);
    j["trials"] = trials;
    j["support"] = r.empirical.size();
    Json emp = Json::array();
    for (const auto& [k, n] : r.empirical) emp.push_back({{"subgroup", k.generators_text()}, {"order", k.order()},
                                                         {"count", n}, {"weight", nu.weight_of(k)}});
    j["empirical"] = emp;
    j["law_within_3sigma"] = r.law_within_3sigma;
    j["exact_match"] = r.exact_match;
    emit(out, j);
    return r.exact_match && r.law_within_3sigma ? kExitOk : kExitCheckFailed;
}

inline int cmd_irs_normalizer(const RunConfig& c, std::ostream& out) {
    auto g = group_of(c);
    auto h = h_of(c, g);
    auto n = normalizer(g, h);
    auto j = header("irs normalizer");
    j["group"] = group_json(g);
    j["H"] = group_json(h);
    j["normalizer"] = group_json(n);
    j["transitive_on_fixed_points"] = normalizer_transitive_on_fixed_points(g, h);
    emit(out, j);
    return kExitOk;
}

inline int cmd_irs_conjugate(const RunConfig& c, std::ostream& out) {
    auto g = group_of(c);
    auto h = h_of(c, g);
    auto x = FinPermutation::from_cycles(g.degree(), require_option(c, "g"));
    auto k = conjugate(g, h, x);
    auto j = header("irs conjugate");
    j["H"] = group_json(h);
    j["g"] = x.to_cycles();
    j["conjugate"] = group_json(k);
    j["equal"] = k == h;
    emit(out, j);
    return kExitOk;
}

inline int cmd_irs_subgroups(const RunConfig& c, std::ostream& out) {
    auto g = group_of(c);
    auto subs = all_subgroups(g);
    std::size_t transitive = 0;
    for (const auto& h : subs) transitive += normalizer_transitive_on_fixed_points(g, h);
    auto j = header("irs subgroups");
    j["group"] = group_json(g);
    j["count"] = subs.size();
    j["normalizer_transitive_on_fixed_points"] = transitive;
    emit(out, j);
    return transitive == subs.size() ? kExitOk : kExitCheckFailed;
}

// ---- dichotomy ----

inline int cmd_dichotomy(const RunConfig& c, std::ostream& out) {
    auto s = sampler_of(c);
    auto n = window_of(c, 200);
    auto trials = trials_of(c, 200);
    DichotomyThresholds th;
    th.search_budget = option_size(c, "budget", th.search_budget);
    auto r = classify(s, n, trials, seed_of(c), th, c.threads);
    auto j = sampler_header(c, "dichotomy", s, n);
    j["trials"] = trials;
    j["freeness_score"] = r.freeness_score;
    j["matching_score"] = r.matching_score;
    j["transitive_pass_rate"] = r.transitive_pass_rate;
    j["matched_bound"] = r.matched_bound;
    j["matching_method"] = s.labeled() ? "label-count coupling" : "back-and-forth partial map";
    j["budget_exhausted"] = r.budget_exhausted;
    j["verdict"] = to_string(r.verdict);
    emit(out, j);
    return kExitOk;
}

inline int cmd_probe(const RunConfig& c, std::ostream& out) {
    auto cat = catalog_of(c);
    auto n = window_of(c, 16);
    auto trials = trials_of(c, 100);
    auto r = transposition_probe(cat, n, trials, seed_of(c), c.threads);
    auto j = header("probe");
    j["catalog"] = cat.token();
    j["seed"] = seed_of(c);
    j["window"] = n;
    j["search_window"] = r.search_window;
    j["pairs"] = r.pairs;
    j["success_rate"] = r.success_rate;
    emit(out, j);
    return kExitOk;
}

}  // namespace detail

inline const std::vector<Command>& commands() {
    using namespace detail;
    static const std::vector<Command> table = {
        {"qftype", "qf-type of a tuple (--in, --tuple)", {"qf_type"}, false, cmd_qftype},
        {"act", "apply a permutation to a structure (--in, --perm)", {"act"}, false, cmd_act},
        {"induced", "induced substructure (--in, --subset)", {"induced"}, false, cmd_induced},
        {"generate", "window of a catalog limit (--catalog, --window, --mode)", {"extend_window"}, false, cmd_generate},
        {"age", "age membership (--catalog, --in)", {"age_member"}, false, cmd_age},
        {"witness", "least witness of a one-point extension (--catalog, --window, --A, --type)",
         {"witness_extension"}, false, cmd_witness},
        {"backforth", "isomorphism by back-and-forth (--left, --right)", {"build_isomorphism"}, false, cmd_backforth},
        {"extend", "one forth/back step (--left, --right, --pairs, --side, --x)", {"try_extend"}, false, cmd_extend},
        {"automorphism", "nontrivial automorphism search (--in, --require-moved)", {"automorphism_search"}, false,
         cmd_automorphism},
        {"orbits", "stabilizer orbits on k-tuples (--catalog, --window, --k, --A)", {"tuple_orbits"}, false,
         cmd_orbits},
        {"gagb", "join of stabilizers (--catalog, --A, --B, --k, --window)", {"gagb_check"}, false, cmd_gagb},
        {"acl", "algebraic closure probe (--catalog, --A, --max-window)", {"acl_probe"}, false, cmd_acl},
        {"separate", "separating tuple (--catalog or --in, --x, --y)", {"separating_tuple"}, false, cmd_separate},
        {"sample", "draw samples and tally window types (--sampler, --window, --trials)", {"sample"}, true,
         cmd_sample},
        {"invariance", "exchangeability test (--sampler, --k, --trials, --significance)", {"invariance_test"}, true,
         cmd_invariance},
        {"dissociation", "independence of disjoint windows (--sampler, --A, --B, --trials)", {"dissociation_test"},
         true, cmd_dissociation},
        {"definetti", "mixing-measure estimate (--sampler, --window, --trials)", {"definetti_decompose"}, true,
         cmd_definetti},
        {"fixedpoints", "persistent small fixed sets (--sampler, --window, --trials)", {"fixed_point_monitor"}, true,
         cmd_fixedpoints},
        {"irs stab", "stabilizer of a labeled point (--group, --labels, --in)", {"stabilizer"}, false, cmd_irs_stab},
        {"irs mgh", "orbit-equivalence structure and its automorphisms (--group, --H, --L)", {"mg_of_h"}, false,
         cmd_irs_mgh},
        {"irs realize", "realize the IRS on the conjugacy class of H (--group, --H, --trials, --law)",
         {"realize_irs"}, true, cmd_irs_realize},
        {"irs normalizer", "normalizer of H (--group, --H)", {"normalizer"}, false, cmd_irs_normalizer},
        {"irs conjugate", "conjugate of H by g (--group, --H, --g)", {"conjugate"}, false, cmd_irs_conjugate},
        {"irs subgroups", "subgroup count and fixed-point transitivity (--group)", {"all_subgroups"}, false,
         cmd_irs_subgroups},
        {"dichotomy", "freeness vs transitivity scores (--sampler, --catalog, --window, --trials)", {"classify"}, true,
         cmd_dichotomy},
        {"probe", "separating-tuple success rate (--catalog, --window, --trials)", {"transposition_probe"}, true,
         cmd_probe},
    };
    return table;
}

inline std::string usage() {
    std::ostringstream os;
    os << "usage: homlab <command> [flags]\n\ncommands:\n";
    for (const auto& c : commands()) os << "  " << c.name << (c.needs_seed ? " (needs --seed)" : "") << "\n      "
                                        << c.help << "\n";
    os << "\ncommon flags: --catalog --sampler --window --trials --seed --significance --out --threads --per-trial\n";
    os << "exit status: 0 success, 1 a check or test failed, 2 input error\n";
    return os.str();
}

inline const Command* find_command(const std::vector<std::string>& words) {
    std::string name;
    for (const auto& w : words) name += (name.empty() ? "" : " ") + w;
    for (const auto& c : commands())
        if (c.name == name) return &c;
    return nullptr;
}

inline int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const Command* cmd = find_command(config.command);
    if (!cmd) {
        std::string name;
        for (const auto& w : config.command) name += (name.empty() ? "" : " ") + w;
        err << "unknown command '" << name << "'\n" << usage();
        return kExitInputError;
    }
    std::ofstream file;
    std::ostream* sink = &out;
    if (!config.output.empty()) {
        file.open(config.output);
        if (!file) {
            err << "cannot open output file " << config.output << "\n";
            return kExitInputError;
        }
        sink = &file;
    }
    std::ostringstream buffer;
    try {
        if (cmd->needs_seed && !config.seed) throw InputError("--seed is required for '" + cmd->name + "'");
        if (!(config.significance > 0 && config.significance < 1))
            throw InputError("--significance must lie in (0,1)");
        for (const auto& [k, _] : config.options) {
            const auto& flags = option_flags();
            if (std::none_of(flags.begin(), flags.end(), [&](const auto& f) { return f.first == k; }))
                throw InputError("unknown flag --" + k);
        }
        int status = cmd->handler(config, buffer);
        *sink << buffer.str();
        return status;
    } catch (const std::exception& e) {
        *sink << buffer.str();
        detail::emit(*sink, Json{{"command", cmd->name}, {"error", e.what()}});
        err << "error: " << e.what() << "\n" << usage();
        return kExitInputError;
    }
}

inline int run(const RunConfig& config, std::ostream& out) { return run(config, out, std::cerr); }

}  // namespace homlab::cli
