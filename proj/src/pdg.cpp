/**
 * @file pdg.cpp
 */
#include "cephforge/pdg.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cephforge/errors.hpp"
#include "cephforge/rng.hpp"

#include <nlohmann/json.hpp>

namespace cephforge {

using nlohmann::json;

namespace {

constexpr int kMaxAttributeBits = 64;  // conflict masks are uint64
constexpr int kMaxDrawAttempts = 1 << 20;

/// Phrase-indexed view of the lexicon with per-attribute conflict masks.
struct LexIndex {
    // group of each phrase: 0 = style, 1 = character, 2 = attribute
    std::unordered_map<std::string, std::pair<int, int>> where;  // phrase -> (group, idx)
    // pairwise forbidden flags
    std::vector<std::vector<char>> style_char;   // [style][char]
    std::vector<std::vector<char>> style_attr;   // [style][attr]
    std::vector<std::vector<char>> char_attr;    // [char][attr]
    std::vector<std::uint64_t> attr_conflicts;   // [attr] -> bitmask of conflicting attrs

    explicit LexIndex(const PromptLexicon& lex) {
        const auto ns = lex.image_style.size();
        const auto nc = lex.character.size();
        const auto na = lex.attribute.size();
        for (std::size_t i = 0; i < ns; ++i) where[lex.image_style[i]] = {0, static_cast<int>(i)};
        for (std::size_t i = 0; i < nc; ++i) where[lex.character[i]] = {1, static_cast<int>(i)};
        for (std::size_t i = 0; i < na; ++i) where[lex.attribute[i]] = {2, static_cast<int>(i)};

        style_char.assign(ns, std::vector<char>(nc, 0));
        style_attr.assign(ns, std::vector<char>(na, 0));
        char_attr.assign(nc, std::vector<char>(na, 0));
        attr_conflicts.assign(na, 0);

        for (const auto& [a, b] : lex.rules) {
            auto [ga, ia] = where.at(a);
            auto [gb, ib] = where.at(b);
            mark(ga, ia, gb, ib);
            mark(gb, ib, ga, ia);
        }
    }

    void mark(int ga, int ia, int gb, int ib) {
        const auto ua = static_cast<std::size_t>(ia);
        const auto ub = static_cast<std::size_t>(ib);
        if (ga == 0 && gb == 1) style_char[ua][ub] = 1;
        if (ga == 0 && gb == 2) style_attr[ua][ub] = 1;
        if (ga == 1 && gb == 2) char_attr[ua][ub] = 1;
        if (ga == 2 && gb == 2 && ia != ib) attr_conflicts[ua] |= 1ull << ub;
    }
};

/// Counts size-k independent subsets of `allowed` attributes under the
/// conflict masks, one recursion branch per kept attribute.
std::uint64_t count_subsets(const std::vector<int>& allowed,
                            const std::vector<std::uint64_t>& conflicts, std::size_t from,
                            int k_left, std::uint64_t chosen_mask) {
    if (k_left == 0) return 1;
    if (allowed.size() - from < static_cast<std::size_t>(k_left)) return 0;
    std::uint64_t total = 0;
    for (std::size_t i = from; i < allowed.size(); ++i) {
        const int a = allowed[i];
        if (chosen_mask & (1ull << a)) continue;  // conflicts with a chosen one
        total += count_subsets(allowed, conflicts, i + 1, k_left - 1,
                               chosen_mask | conflicts[static_cast<std::size_t>(a)]);
    }
    return total;
}

}  // namespace

void check_lexicon(const PromptLexicon& lex) {
    if (lex.image_style.empty() || lex.character.empty())
        throw ValidationError("lexicon: image_style and character groups must be non-empty");

    std::set<std::string> seen;
    auto check_group = [&](const std::vector<std::string>& group, const char* name) {
        for (const auto& phrase : group) {
            if (phrase.empty())
                throw ValidationError(std::string("lexicon: empty phrase in ") + name);
            if (phrase.find(',') != std::string::npos)
                throw ValidationError("lexicon: phrase '" + phrase +
                                      "' contains a comma (reserved separator)");
            if (!seen.insert(phrase).second)
                throw ValidationError("lexicon: phrase '" + phrase +
                                      "' appears in more than one group");
        }
    };
    check_group(lex.image_style, "image_style");
    check_group(lex.character, "character");
    check_group(lex.attribute, "attribute");

    for (const auto& [a, b] : lex.rules) {
        if (!seen.count(a) || !seen.count(b))
            throw ValidationError("lexicon: rule (" + a + ", " + b +
                                  ") references a phrase not in any group");
        if (a == b)
            throw ValidationError("lexicon: rule (" + a + ", " + b +
                                  ") pairs a phrase with itself");
    }

    if (lex.pick_min < 0 || lex.pick_min > lex.pick_max ||
        lex.pick_max > static_cast<int>(lex.attribute.size()))
        throw ValidationError("lexicon: need 0 <= attribute_pick.min <= attribute_pick.max <= " +
                              std::to_string(lex.attribute.size()));
    if (static_cast<int>(lex.attribute.size()) > kMaxAttributeBits)
        throw ValidationError("lexicon: at most 64 attribute phrases supported");
}

PromptLexicon parse_lexicon(const json& doc) {
    if (!doc.is_object()) throw ParseError("lexicon: top level must be an object");
    PromptLexicon lex;
    auto read_group = [&](const char* key) {
        std::vector<std::string> group;
        auto it = doc.find(key);
        if (it == doc.end()) throw ParseError(std::string("lexicon: missing field '") + key + "'");
        for (const auto& p : *it) group.push_back(p.get<std::string>());
        return group;
    };
    lex.image_style = read_group("image_style");
    lex.character = read_group("character");
    lex.attribute = read_group("attribute");
    if (doc.contains("rules"))
        for (const auto& r : doc.at("rules")) {
            if (!r.is_array() || r.size() != 2)
                throw ParseError("lexicon: each rule must be a pair [a,b]");
            lex.rules.emplace_back(r[0].get<std::string>(), r[1].get<std::string>());
        }
    if (doc.contains("attribute_pick")) {
        const auto& pick = doc.at("attribute_pick");
        if (!pick.is_array() || pick.size() != 2)
            throw ParseError("lexicon: attribute_pick must be [min,max]");
        lex.pick_min = pick[0].get<int>();
        lex.pick_max = pick[1].get<int>();
    }
    check_lexicon(lex);
    return lex;
}

PromptLexicon parse_lexicon_text(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("lexicon: not valid JSON");
    return parse_lexicon(doc);
}

PromptLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_lexicon_text(buf.str());
    } catch (ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string Prompt::text() const {
    std::string out = style + ", " + character;
    for (const auto& a : attributes) out += ", " + a;
    return out;
}

Prompt Prompt::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        std::string piece = (comma == std::string::npos) ? text.substr(start)
                                                         : text.substr(start, comma - start);
        const auto first = piece.find_first_not_of(" \t");
        const auto last = piece.find_last_not_of(" \t");
        parts.push_back(first == std::string::npos ? std::string()
                                                   : piece.substr(first, last - first + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (parts.size() < 2 || parts[0].empty() || parts[1].empty())
        throw ParseError("prompt: expected at least 'style, character'");
    Prompt p;
    p.style = parts[0];
    p.character = parts[1];
    p.attributes.assign(parts.begin() + 2, parts.end());
    return p;
}

std::vector<std::pair<std::string, std::string>> validate_prompt(const Prompt& p,
                                                                 const PromptLexicon& lex) {
    std::vector<std::string> phrases;
    phrases.push_back(p.style);
    phrases.push_back(p.character);
    for (const auto& a : p.attributes) phrases.push_back(a);

    std::vector<std::pair<std::string, std::string>> violations;
    for (const auto& [a, b] : lex.rules) {
        const bool has_a = std::find(phrases.begin(), phrases.end(), a) != phrases.end();
        const bool has_b = std::find(phrases.begin(), phrases.end(), b) != phrases.end();
        if (has_a && has_b) violations.emplace_back(a, b);
    }
    return violations;
}

std::uint64_t enumerate_valid(const PromptLexicon& lex) {
    check_lexicon(lex);
    const LexIndex index(lex);
    const int na = static_cast<int>(lex.attribute.size());

    std::uint64_t total = 0;
    for (std::size_t s = 0; s < lex.image_style.size(); ++s) {
        for (std::size_t c = 0; c < lex.character.size(); ++c) {
            if (index.style_char[s][c]) continue;

            std::vector<int> allowed;
            for (int a = 0; a < na; ++a)
                if (!index.style_attr[s][static_cast<std::size_t>(a)] &&
                    !index.char_attr[c][static_cast<std::size_t>(a)])
                    allowed.push_back(a);

            for (int k = lex.pick_min; k <= lex.pick_max; ++k)
                total += count_subsets(allowed, index.attr_conflicts, 0, k, 0);
        }
    }
    return total;
}

std::vector<Prompt> generate_prompts(const PromptLexicon& lex, std::int64_t count,
                                     std::uint64_t seed, bool distinct) {
    if (count < 1) throw ConfigError("generate_prompts: count must be >= 1");
    check_lexicon(lex);

    const std::uint64_t feasible = enumerate_valid(lex);
    if (feasible == 0)
        throw ValidationError("generate_prompts: lexicon admits no rule-satisfying prompt");
    if (distinct && static_cast<std::uint64_t>(count) > feasible)
        throw ConfigError("generate_prompts: --distinct requested " + std::to_string(count) +
                          " prompts but only " + std::to_string(feasible) + " exist");

    const LexIndex index(lex);
    const int na = static_cast<int>(lex.attribute.size());

    auto draw_one = [&](Rng& rng) -> Prompt {
        for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
            const auto s = static_cast<std::size_t>(rng.next_below(lex.image_style.size()));
            const auto c = static_cast<std::size_t>(rng.next_below(lex.character.size()));
            const int k = rng.uniform_int(lex.pick_min, lex.pick_max);

            // k distinct attribute indices via partial Fisher-Yates
            std::vector<int> order(static_cast<std::size_t>(na));
            std::iota(order.begin(), order.end(), 0);
            for (int j = 0; j < k; ++j) {
                const int pick =
                    j + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(na - j)));
                std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(pick)]);
            }
            std::vector<int> attrs(order.begin(), order.begin() + k);
            std::sort(attrs.begin(), attrs.end());  // lexicon order in the rendered text

            bool ok = !index.style_char[s][c];
            std::uint64_t mask = 0;
            for (int a : attrs) {
                const auto ua = static_cast<std::size_t>(a);
                if (!ok) break;
                if (index.style_attr[s][ua] || index.char_attr[c][ua] ||
                    (mask & index.attr_conflicts[ua]) || (mask & (1ull << a))) {
                    ok = false;
                    break;
                }
                mask |= 1ull << a;
            }
            if (!ok) continue;

            Prompt p;
            p.style = lex.image_style[s];
            p.character = lex.character[c];
            for (int a : attrs) p.attributes.push_back(lex.attribute[static_cast<std::size_t>(a)]);
            return p;
        }
        throw ValidationError("generate_prompts: rejection budget exhausted");
    };

    std::vector<Prompt> prompts;
    prompts.reserve(static_cast<std::size_t>(count));

    if (!distinct) {
        // slot-indexed streams keep generation order-independent
        for (std::int64_t i = 0; i < count; ++i) {
            Rng rng = slot_rng(seed, static_cast<std::uint64_t>(i));
            prompts.push_back(draw_one(rng));
        }
        return prompts;
    }

    // without replacement: inherently sequential
    std::unordered_set<std::string> seen;
    Rng rng(derive_stream(seed, 0));
    while (prompts.size() < static_cast<std::size_t>(count)) {
        for (int attempt = 0;; ++attempt) {
            if (attempt >= kMaxDrawAttempts)
                throw ValidationError("generate_prompts: rejection budget exhausted (distinct)");
            Prompt p = draw_one(rng);
            if (seen.insert(p.text()).second) {
                prompts.push_back(std::move(p));
                break;
            }
        }
    }
    return prompts;
}

}  // namespace cephforge
