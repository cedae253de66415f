#pragma once

// Relational languages, finite structures on a window {0,...,n-1}, finite
// permutations with the logic action, and quantifier-free types.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace homlab {

// Raised for malformed caller input: out-of-window indices, language
// mismatches, unparsable files. Maps to CLI exit status 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Element = std::uint32_t;
using Tuple = std::vector<Element>;

namespace detail {

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

// n^r, or nullopt on overflow of 64 bits.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t n, unsigned r) {
    std::uint64_t p = 1;
    for (unsigned i = 0; i < r; ++i) {
        if (n != 0 && p > std::numeric_limits<std::uint64_t>::max() / n) return std::nullopt;
        p *= n;
    }
    return p;
}

inline std::uint64_t encode(std::span<const Element> t, std::uint64_t n) {
    std::uint64_t code = 0;
    for (Element e : t) code = code * n + e;
    return code;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline unsigned long long parse_uint(std::string_view s, std::string_view what) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw InputError("expected a non-negative integer for " + std::string(what) + ", got '" +
                         std::string(s) + "'");
    try {
        return std::stoull(std::string(s));
    } catch (const std::out_of_range&) {
        throw InputError("integer out of range for " + std::string(what));
    }
}

}  // namespace detail

// Calls fn(tuple) for every tuple in {0..n-1}^r in lexicographic order.
template <typename Fn>
void for_each_tuple(std::size_t n, unsigned r, Fn&& fn) {
    Tuple t(r, 0);
    if (r == 0) {
        fn(std::as_const(t));
        return;
    }
    if (n == 0) return;
    while (true) {
        fn(std::as_const(t));
        int i = static_cast<int>(r) - 1;
        while (i >= 0 && t[static_cast<std::size_t>(i)] + 1 == n) {
            t[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) return;
        ++t[static_cast<std::size_t>(i)];
    }
}

struct Symbol {
    std::string name;
    unsigned arity = 1;

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

class Language {
public:
    Language() : name_("empty") {}

    Language(std::string name, std::vector<Symbol> symbols)
        : name_(std::move(name)), symbols_(std::move(symbols)) {
        if (!detail::is_identifier(name_)) throw InputError("invalid language name '" + name_ + "'");
        for (std::size_t i = 0; i < symbols_.size(); ++i) {
            const auto& s = symbols_[i];
            if (!detail::is_identifier(s.name)) throw InputError("invalid symbol name '" + s.name + "'");
            if (s.arity < 1) throw InputError("symbol '" + s.name + "' must have arity >= 1");
            for (std::size_t j = 0; j < i; ++j)
                if (symbols_[j].name == s.name) throw InputError("duplicate symbol '" + s.name + "'");
        }
    }

    const std::string& name() const noexcept { return name_; }
    std::span<const Symbol> symbols() const noexcept { return symbols_; }
    std::size_t size() const noexcept { return symbols_.size(); }
    const Symbol& operator[](std::size_t i) const { return symbols_.at(i); }

    std::optional<std::size_t> find(std::string_view symbol) const {
        for (std::size_t i = 0; i < symbols_.size(); ++i)
            if (symbols_[i].name == symbol) return i;
        return std::nullopt;
    }

    std::size_t index_of(std::string_view symbol) const {
        if (auto i = find(symbol)) return *i;
        throw InputError("unknown symbol '" + std::string(symbol) + "' in language " + name_);
    }

    unsigned max_arity() const noexcept {
        unsigned m = 0;
        for (const auto& s : symbols_) m = std::max(m, s.arity);
        return m;
    }

    // New language whose first symbols are exactly this language's.
    Language expand(std::string name, std::vector<Symbol> extra) const {
        std::vector<Symbol> all = symbols_;
        all.insert(all.end(), extra.begin(), extra.end());
        return Language(std::move(name), std::move(all));
    }

    bool is_expansion_of(const Language& base) const {
        if (base.size() > size()) return false;
        return std::equal(base.symbols_.begin(), base.symbols_.end(), symbols_.begin());
    }

    bool same_symbols(const Language& other) const { return symbols_ == other.symbols_; }

    friend bool operator==(const Language&, const Language&) = default;

private:
    std::string name_;
    std::vector<Symbol> symbols_;
};

class FinStructure {
public:
    FinStructure() : FinStructure(Language(), 0, {}) {}

    // Validates entries and arities; tuples are sorted and deduplicated.
    FinStructure(Language language, std::size_t window, std::vector<std::vector<Tuple>> relations) {
        if (relations.size() < language.size()) relations.resize(language.size());
        if (relations.size() != language.size())
            throw InputError("relation count does not match language " + language.name());
        auto data = std::make_shared<Data>();
        data->window = window;
        data->rels.resize(language.size());
        for (std::size_t s = 0; s < language.size(); ++s) {
            auto& rel = data->rels[s];
            rel.arity = language[s].arity;
            rel.tuples = std::move(relations[s]);
            for (const auto& t : rel.tuples) {
                if (t.size() != rel.arity)
                    throw InputError("tuple of wrong arity for symbol '" + language[s].name + "'");
                for (Element e : t)
                    if (e >= window)
                        throw InputError("element " + std::to_string(e) + " outside window of size " +
                                         std::to_string(window));
            }
            std::sort(rel.tuples.begin(), rel.tuples.end());
            rel.tuples.erase(std::unique(rel.tuples.begin(), rel.tuples.end()), rel.tuples.end());
            rel.build_index(window);
        }
        data->language = std::move(language);
        d_ = std::move(data);
    }

    class Builder {
    public:
        Builder(Language language, std::size_t window)
            : language_(std::move(language)), window_(window), rels_(language_.size()) {}

        Builder& add(std::size_t symbol, Tuple t) {
            rels_.at(symbol).push_back(std::move(t));
            return *this;
        }
        Builder& add(std::string_view symbol, Tuple t) { return add(language_.index_of(symbol), std::move(t)); }

        // Adds every ordering of a set of distinct elements (symmetric relations).
        Builder& add_symmetric(std::size_t symbol, Tuple t) {
            std::sort(t.begin(), t.end());
            do rels_.at(symbol).push_back(t);
            while (std::next_permutation(t.begin(), t.end()));
            return *this;
        }

        const Language& language() const noexcept { return language_; }
        std::size_t window() const noexcept { return window_; }

        FinStructure build() && { return FinStructure(std::move(language_), window_, std::move(rels_)); }
        FinStructure build() const& { return FinStructure(language_, window_, rels_); }

    private:
        Language language_;
        std::size_t window_;
        std::vector<std::vector<Tuple>> rels_;
    };

    const Language& language() const noexcept { return d_->language; }
    std::size_t window() const noexcept { return d_->window; }
    std::size_t symbol_count() const noexcept { return d_->rels.size(); }
    std::span<const Tuple> relation(std::size_t symbol) const { return d_->rels.at(symbol).tuples; }

    bool holds(std::size_t symbol, std::span<const Element> t) const {
        const auto& rel = d_->rels[symbol];
        if (t.size() != rel.arity) return false;
        for (Element e : t)
            if (e >= d_->window) return false;
        return rel.contains(t, d_->window);
    }

    std::size_t tuple_count() const noexcept {
        std::size_t c = 0;
        for (const auto& r : d_->rels) c += r.tuples.size();
        return c;
    }

    friend bool operator==(const FinStructure& a, const FinStructure& b) {
        if (a.d_ == b.d_) return true;
        if (a.window() != b.window() || !(a.language() == b.language())) return false;
        for (std::size_t s = 0; s < a.d_->rels.size(); ++s)
            if (a.d_->rels[s].tuples != b.d_->rels[s].tuples) return false;
        return true;
    }

private:
    struct Relation {
        enum class Index { Dense, Hashed, Sorted };
        unsigned arity = 1;
        std::vector<Tuple> tuples;
        Index index = Index::Sorted;
        std::vector<std::uint64_t> bits;
        std::unordered_set<std::uint64_t> codes;

        void build_index(std::size_t window) {
            auto space = detail::checked_pow(window, arity);
            if (space && *space <= (std::uint64_t{1} << 24)) {
                index = Index::Dense;
                bits.assign((*space + 63) / 64, 0);
                for (const auto& t : tuples) {
                    auto c = detail::encode(t, window);
                    bits[c / 64] |= std::uint64_t{1} << (c % 64);
                }
            } else if (space) {
                index = Index::Hashed;
                codes.reserve(tuples.size());
                for (const auto& t : tuples) codes.insert(detail::encode(t, window));
            }
        }

        bool contains(std::span<const Element> t, std::size_t window) const {
            switch (index) {
                case Index::Dense: {
                    auto c = detail::encode(t, window);
                    return (bits[c / 64] >> (c % 64)) & 1U;
                }
                case Index::Hashed:
                    return codes.count(detail::encode(t, window)) != 0;
                case Index::Sorted:
                    break;
            }
            return std::binary_search(tuples.begin(), tuples.end(), t,
                                      [](const auto& x, const auto& y) {
                                          return std::lexicographical_compare(x.begin(), x.end(), y.begin(),
                                                                              y.end());
                                      });
        }
    };

    struct Data {
        Language language;
        std::size_t window = 0;
        std::vector<Relation> rels;
    };

    std::shared_ptr<const Data> d_;
};

// A structure together with one real label in [0,1] per window point.
// An empty label vector means "unlabeled".
struct RealExpansion {
    FinStructure structure;
    std::vector<double> labels;

    RealExpansion() = default;
    RealExpansion(FinStructure s) : structure(std::move(s)) {}  // NOLINT(google-explicit-constructor)
    RealExpansion(FinStructure s, std::vector<double> l) : structure(std::move(s)), labels(std::move(l)) {
        if (!labels.empty() && labels.size() != structure.window())
            throw InputError("label count does not match window size");
        for (double x : labels)
            if (!std::isfinite(x) || x < 0.0 || x > 1.0) throw InputError("labels must lie in [0,1]");
    }

    bool labeled() const noexcept { return !labels.empty(); }
    std::size_t window() const noexcept { return structure.window(); }

    friend bool operator==(const RealExpansion&, const RealExpansion&) = default;
};

class FinPermutation {
public:
    FinPermutation() = default;

    explicit FinPermutation(std::vector<Element> images) : images_(std::move(images)) {
        std::vector<bool> seen(images_.size(), false);
        for (Element e : images_) {
            if (e >= images_.size() || seen[e]) throw InputError("permutation images are not a bijection");
            seen[e] = true;
        }
    }

    static FinPermutation identity(std::size_t n) {
        std::vector<Element> im(n);
        std::iota(im.begin(), im.end(), Element{0});
        return FinPermutation(std::move(im));
    }

    // Cycle notation, e.g. "(0 1)(2 3)", "(01)(23)" or "(0,1,2)". Without
    // separators each digit is one point, so that form needs n <= 10.
    static FinPermutation from_cycles(std::size_t n, std::string_view text) {
        std::vector<Element> im(n);
        std::iota(im.begin(), im.end(), Element{0});
        std::vector<bool> used(n, false);
        std::size_t i = 0;
        auto skip_ws = [&] {
            while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        };
        skip_ws();
        if (i < text.size() && (text.substr(i) == "id" || text.substr(i) == "()")) return FinPermutation(im);
        while (i < text.size()) {
            if (text[i] != '(') throw InputError("cycle notation: expected '(' in '" + std::string(text) + "'");
            auto close = text.find(')', i);
            if (close == std::string_view::npos) throw InputError("cycle notation: missing ')'");
            std::string body(text.substr(i + 1, close - i - 1));
            std::vector<Element> cycle;
            bool separated = body.find_first_of(" ,") != std::string::npos;
            if (separated) {
                for (char& c : body)
                    if (c == ',') c = ' ';
                for (const auto& tok : detail::tokens(body))
                    cycle.push_back(static_cast<Element>(detail::parse_uint(tok, "cycle entry")));
            } else {
                for (char c : body) {
                    if (c < '0' || c > '9') throw InputError("cycle notation: bad character in '" + body + "'");
                    cycle.push_back(static_cast<Element>(c - '0'));
                }
            }
            for (Element e : cycle) {
                if (e >= n) throw InputError("cycle entry " + std::to_string(e) + " outside degree " + std::to_string(n));
                if (used[e]) throw InputError("cycle notation: point " + std::to_string(e) + " repeated");
                used[e] = true;
            }
            for (std::size_t j = 0; j < cycle.size(); ++j) im[cycle[j]] = cycle[(j + 1) % cycle.size()];
            i = close + 1;
            skip_ws();
        }
        return FinPermutation(std::move(im));
    }

    std::size_t size() const noexcept { return images_.size(); }
    Element operator()(Element x) const { return images_.at(x); }
    std::span<const Element> images() const noexcept { return images_; }

    bool is_identity() const noexcept {
        for (std::size_t i = 0; i < images_.size(); ++i)
            if (images_[i] != i) return false;
        return true;
    }

    FinPermutation inverse() const {
        std::vector<Element> inv(images_.size());
        for (std::size_t i = 0; i < images_.size(); ++i) inv[images_[i]] = static_cast<Element>(i);
        return FinPermutation(std::move(inv));
    }

    Tuple apply(std::span<const Element> t) const {
        Tuple out(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) out[i] = images_.at(t[i]);
        return out;
    }

    // (g * h)(x) = g(h(x))
    friend FinPermutation operator*(const FinPermutation& g, const FinPermutation& h) {
        if (g.size() != h.size()) throw InputError("composing permutations of different degree");
        std::vector<Element> im(h.size());
        for (std::size_t i = 0; i < im.size(); ++i) im[i] = g.images_[h.images_[i]];
        return FinPermutation(std::move(im));
    }

    std::string to_cycles() const {
        std::string out;
        std::vector<bool> seen(images_.size(), false);
        for (Element start = 0; start < images_.size(); ++start) {
            if (seen[start] || images_[start] == start) continue;
            out += '(';
            Element x = start;
            bool first = true;
            do {
                if (!first) out += ' ';
                out += std::to_string(x);
                first = false;
                seen[x] = true;
                x = images_[x];
            } while (x != start);
            out += ')';
        }
        return out.empty() ? "()" : out;
    }

    friend bool operator==(const FinPermutation&, const FinPermutation&) = default;
    friend auto operator<=>(const FinPermutation&, const FinPermutation&) = default;

private:
    std::vector<Element> images_;
};

// Equality pattern plus the atomic diagram of a tuple. Equality of two types
// is equality of their canonical key:
//   k=<arity>|eq=<restricted growth string, '.'-separated>|<sym>=<bits>|...
// where the bits of a symbol of arity r list R(c_1..c_r) over all r-tuples of
// equality classes in lexicographic order.
class QfType {
public:
    std::size_t arity() const noexcept { return pattern_.size(); }
    std::span<const unsigned> equality_pattern() const noexcept { return pattern_; }
    std::size_t classes() const noexcept { return classes_; }
    const std::string& key() const noexcept { return key_; }

    bool atom(std::size_t symbol, std::span<const unsigned> class_tuple) const {
        std::uint64_t code = 0;
        for (unsigned c : class_tuple) code = code * classes_ + c;
        return atoms_.at(symbol).at(code);
    }

    // The structure on the equality classes described by this type.
    FinStructure realize(const Language& language) const {
        if (language.size() != atoms_.size()) throw InputError("type does not match language");
        FinStructure::Builder b(language, classes_);
        for (std::size_t s = 0; s < language.size(); ++s) {
            std::size_t idx = 0;
            for_each_tuple(classes_, language[s].arity, [&](const Tuple& t) {
                if (atoms_[s][idx++]) b.add(s, t);
            });
        }
        return std::move(b).build();
    }

    static QfType of(const FinStructure& m, std::span<const Element> t) {
        for (Element e : t)
            if (e >= m.window())
                throw InputError("tuple entry " + std::to_string(e) + " outside window of size " +
                                 std::to_string(m.window()));
        QfType q;
        q.pattern_.resize(t.size());
        std::vector<Element> reps;
        for (std::size_t i = 0; i < t.size(); ++i) {
            auto it = std::find(reps.begin(), reps.end(), t[i]);
            if (it == reps.end()) {
                q.pattern_[i] = static_cast<unsigned>(reps.size());
                reps.push_back(t[i]);
            } else {
                q.pattern_[i] = static_cast<unsigned>(it - reps.begin());
            }
        }
        q.classes_ = reps.size();
        const auto& lang = m.language();
        q.atoms_.resize(lang.size());
        Tuple image;
        for (std::size_t s = 0; s < lang.size(); ++s) {
            auto& bits = q.atoms_[s];
            for_each_tuple(q.classes_, lang[s].arity, [&](const Tuple& ct) {
                image.resize(ct.size());
                for (std::size_t i = 0; i < ct.size(); ++i) image[i] = reps[ct[i]];
                bits.push_back(m.holds(s, image));
            });
        }
        q.make_key(lang);
        return q;
    }

    static QfType from_key(const Language& lang, std::string_view key) {
        auto parts = detail::split(key, '|');
        if (parts.size() != 2 + lang.size() || parts[0].rfind("k=", 0) != 0 || parts[1].rfind("eq=", 0) != 0)
            throw InputError("malformed type key '" + std::string(key) + "'");
        QfType q;
        auto k = detail::parse_uint(std::string_view(parts[0]).substr(2), "type arity");
        std::string_view eq = std::string_view(parts[1]).substr(3);
        if (k > 0) {
            for (const auto& tok : detail::split(eq, '.'))
                q.pattern_.push_back(static_cast<unsigned>(detail::parse_uint(tok, "equality class")));
        } else if (!eq.empty()) {
            throw InputError("malformed equality pattern in type key");
        }
        if (q.pattern_.size() != k) throw InputError("type key arity does not match its equality pattern");
        unsigned next = 0;
        for (unsigned c : q.pattern_) {
            if (c > next) throw InputError("equality pattern is not a restricted growth string");
            if (c == next) ++next;
        }
        q.classes_ = next;
        q.atoms_.resize(lang.size());
        for (std::size_t s = 0; s < lang.size(); ++s) {
            const std::string& part = parts[2 + s];
            auto eqpos = part.find('=');
            if (eqpos == std::string::npos || part.substr(0, eqpos) != lang[s].name)
                throw InputError("type key symbol mismatch at '" + part + "'");
            auto expected = detail::checked_pow(q.classes_, lang[s].arity).value_or(0);
            std::string_view bits = std::string_view(part).substr(eqpos + 1);
            if (bits.size() != expected) throw InputError("type key has wrong atom count for " + lang[s].name);
            for (char c : bits) {
                if (c != '0' && c != '1') throw InputError("type key atoms must be 0/1");
                q.atoms_[s].push_back(c == '1');
            }
        }
        q.make_key(lang);
        return q;
    }

    friend bool operator==(const QfType& a, const QfType& b) { return a.key_ == b.key_; }
    friend auto operator<=>(const QfType& a, const QfType& b) { return a.key_ <=> b.key_; }

private:
    void make_key(const Language& lang) {
        key_ = "k=" + std::to_string(pattern_.size()) + "|eq=";
        for (std::size_t i = 0; i < pattern_.size(); ++i) {
            if (i) key_ += '.';
            key_ += std::to_string(pattern_[i]);
        }
        for (std::size_t s = 0; s < lang.size(); ++s) {
            key_ += '|';
            key_ += lang[s].name;
            key_ += '=';
            for (bool b : atoms_[s]) key_ += b ? '1' : '0';
        }
    }

    std::vector<unsigned> pattern_;
    std::size_t classes_ = 0;
    std::vector<std::vector<bool>> atoms_;
    std::string key_;
};

inline QfType qf_type(const FinStructure& m, std::span<const Element> t) { return QfType::of(m, t); }

// Logic action: R^{g.M}(x) <=> R^M(g^{-1} x), i.e. every tuple t of M becomes g(t).
inline FinStructure act(const FinPermutation& g, const FinStructure& m) {
    if (g.size() != m.window())
        throw InputError("permutation degree " + std::to_string(g.size()) + " does not match window " +
                         std::to_string(m.window()));
    std::vector<std::vector<Tuple>> rels(m.symbol_count());
    for (std::size_t s = 0; s < m.symbol_count(); ++s) {
        rels[s].reserve(m.relation(s).size());
        for (const auto& t : m.relation(s)) rels[s].push_back(g.apply(t));
    }
    return FinStructure(m.language(), m.window(), std::move(rels));
}

// Substructure on `subset`, relabeled order-preservingly onto {0..|subset|-1}.
inline FinStructure induced(const FinStructure& m, std::span<const Element> subset) {
    std::vector<Element> s(subset.begin(), subset.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (Element e : s)
        if (e >= m.window()) throw InputError("subset element " + std::to_string(e) + " outside window");
    std::vector<std::int64_t> relabel(m.window(), -1);
    for (std::size_t i = 0; i < s.size(); ++i) relabel[s[i]] = static_cast<std::int64_t>(i);
    std::vector<std::vector<Tuple>> rels(m.symbol_count());
    for (std::size_t sym = 0; sym < m.symbol_count(); ++sym) {
        for (const auto& t : m.relation(sym)) {
            Tuple u(t.size());
            bool inside = true;
            for (std::size_t i = 0; i < t.size() && inside; ++i) {
                if (relabel[t[i]] < 0) inside = false;
                else u[i] = static_cast<Element>(relabel[t[i]]);
            }
            if (inside) rels[sym].push_back(std::move(u));
        }
    }
    return FinStructure(m.language(), s.size(), std::move(rels));
}

inline FinStructure prefix(const FinStructure& m, std::size_t n) {
    std::vector<Element> s(std::min(n, m.window()));
    std::iota(s.begin(), s.end(), Element{0});
    return induced(m, s);
}

// Plain-text structure format:
//   lang <name> <symbol:arity>...
//   window <n>
//   <symbol> i1 ... ir        (one line per held tuple)
// Tuples are written symbol by symbol in lexicographic order, so
// to_text(parse_structure(s)) == s for every text produced by to_text.
inline std::string to_text(const FinStructure& m) {
    std::string out = "lang " + m.language().name();
    for (const auto& s : m.language().symbols()) out += " " + s.name + ":" + std::to_string(s.arity);
    out += "\nwindow " + std::to_string(m.window()) + "\n";
    for (std::size_t s = 0; s < m.symbol_count(); ++s) {
        for (const auto& t : m.relation(s)) {
            out += m.language()[s].name;
            for (Element e : t) out += " " + std::to_string(e);
            out += '\n';
        }
    }
    return out;
}

inline FinStructure parse_structure(std::string_view text) {
    auto lines = detail::split(text, '\n');
    std::size_t li = 0;
    auto next_line = [&]() -> std::optional<std::vector<std::string>> {
        while (li < lines.size()) {
            auto toks = detail::tokens(lines[li++]);
            if (!toks.empty()) return toks;
        }
        return std::nullopt;
    };
    auto header = next_line();
    if (!header || (*header)[0] != "lang" || header->size() < 2)
        throw InputError("structure text must start with 'lang <name> ...'");
    std::vector<Symbol> symbols;
    for (std::size_t i = 2; i < header->size(); ++i) {
        const auto& tok = (*header)[i];
        auto colon = tok.rfind(':');
        if (colon == std::string::npos) throw InputError("symbol declaration '" + tok + "' needs name:arity");
        symbols.push_back({tok.substr(0, colon),
                           static_cast<unsigned>(detail::parse_uint(tok.substr(colon + 1), "arity"))});
    }
    Language lang((*header)[1], std::move(symbols));
    auto wline = next_line();
    if (!wline || (*wline)[0] != "window" || wline->size() != 2)
        throw InputError("second line must be 'window <n>'");
    auto n = static_cast<std::size_t>(detail::parse_uint((*wline)[1], "window"));
    FinStructure::Builder b(lang, n);
    while (auto line = next_line()) {
        auto sym = lang.index_of((*line)[0]);
        if (line->size() != lang[sym].arity + 1)
            throw InputError("tuple line for '" + (*line)[0] + "' has wrong arity");
        Tuple t;
        for (std::size_t i = 1; i < line->size(); ++i)
            t.push_back(static_cast<Element>(detail::parse_uint((*line)[i], "tuple entry")));
        b.add(sym, std::move(t));
    }
    return std::move(b).build();
}

inline FinStructure read_structure_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open structure file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_structure(ss.str());
}

}  // namespace homlab
