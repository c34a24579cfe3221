/**
 * @file defaults.hpp
 * @brief Built-in copies of the shipped configuration files.
 *
 * The JSON under data/ is the editable source of truth; the build embeds it
 * so the library and CLI work without an install step. Parsing happens per
 * call, so callers own independent mutable copies.
 */
#pragma once

#include <string>

namespace cephforge {

struct AnatomySchema;
struct LandmarkSet;
struct PromptLexicon;

const std::string& default_schema_json();
const std::string& default_lexicon_json();
const std::string& example_annotation_json();

AnatomySchema default_schema();
PromptLexicon default_lexicon();
LandmarkSet example_annotation();

}  // namespace cephforge
