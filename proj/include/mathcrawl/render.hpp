#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mathcrawl::render {

struct RenderConfig {
    int line_width = 120;    // >= 20
    int list_indent = 3;
    bool preserve_verbatim = true;
    bool math_passthrough = true;
};

enum class MathForm {
    mathml,
    script_tex,
    dollar_inline,
    dollar_display,
    shortcode,
    image_alt,
    unicode_math,
};

std::string_view math_form_name(MathForm f);
MathForm math_form_from_name(std::string_view name);

struct MathRegion {
    MathForm form = MathForm::dollar_inline;
    size_t begin = 0;  // byte offsets into the rendered text
    size_t end = 0;
    std::string payload;
    bool display = false;

    nlohmann::json to_json() const;
    static MathRegion from_json(const nlohmann::json& j);
};

struct RenderResult {
    std::string text;
    std::vector<MathRegion> regions;  // mathml / script_tex / image_alt sources
    std::set<std::string> warnings;
};

// Layout-faithful text rendering of (possibly malformed) HTML.
RenderResult render(std::string_view raw_html, const RenderConfig& config = {});

// Post-render detectors over plain text.
std::vector<MathRegion> extract_shortcode_math(std::string_view text);
std::vector<MathRegion> detect_dollar_math(std::string_view text);
std::vector<MathRegion> detect_unicode_math(std::string_view text);

// Merge detector outputs; earlier groups win on overlap. Result is
// sorted and non-overlapping.
std::vector<MathRegion> merge_regions(const std::vector<std::vector<MathRegion>>& groups);

// TeX-ish heuristic for image alt text.
bool looks_like_tex(std::string_view s);

// HTML entity decoding (named core set + numeric).
std::string decode_entities(std::string_view s);

}  // namespace mathcrawl::render
