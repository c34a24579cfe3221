/**
 * @file pdg.hpp
 * @brief Rule-constrained combinatorial prompt generation.
 *
 * A prompt is one image-style phrase, one character phrase, and a bounded
 * number of attribute phrases, subject to forbidden co-occurrence rules.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cephforge {

struct PromptLexicon {
    std::vector<std::string> image_style;
    std::vector<std::string> character;
    std::vector<std::string> attribute;
    std::vector<std::pair<std::string, std::string>> rules;  // forbidden pairs
    int pick_min = 0;  // attributes per prompt, inclusive bounds
    int pick_max = 0;

    int total_phrases() const {
        return static_cast<int>(image_style.size() + character.size() + attribute.size());
    }
};

PromptLexicon parse_lexicon(const nlohmann::json& doc);
PromptLexicon parse_lexicon_text(const std::string& text);
PromptLexicon load_lexicon(const std::filesystem::path& path);
void check_lexicon(const PromptLexicon& lex);

struct Prompt {
    std::string style;
    std::string character;
    std::vector<std::string> attributes;  // lexicon order

    /// Comma-plus-space join: style, character, attributes.
    std::string text() const;

    /// Positional parse of a serialized prompt (style, character, rest).
    static Prompt parse(const std::string& text);
};

/// Samples `count` rule-clean prompts. Deterministic per (seed, slot);
/// rejection resampling enforces the rules. With `distinct`, prompts are
/// drawn without replacement (count must not exceed enumerate_valid).
/// Throws ValidationError when the lexicon admits no valid prompt at all.
std::vector<Prompt> generate_prompts(const PromptLexicon& lex, std::int64_t count,
                                     std::uint64_t seed, bool distinct = false);

/// Exact number of distinct valid prompts: style x character x attribute
/// subsets within pick bounds, minus rule violations.
std::uint64_t enumerate_valid(const PromptLexicon& lex);

/// Forbidden pairs present in the prompt; empty means valid.
std::vector<std::pair<std::string, std::string>> validate_prompt(const Prompt& p,
                                                                 const PromptLexicon& lex);

}  // namespace cephforge
