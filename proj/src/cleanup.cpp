#include "mathcrawl/cleanup.hpp"

#include <array>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl::cleanup {

std::string build_cleanup_prompt(std::string_view text) {
    if (text.empty()) throw EmptyInput();
    constexpr std::string_view placeholder = "{text}";
    size_t pos = kPromptTemplate.find(placeholder);
    std::string out;
    out.reserve(kPromptTemplate.size() + text.size());
    out.append(kPromptTemplate.substr(0, pos));
    out.append(text);
    out.append(kPromptTemplate.substr(pos + placeholder.size()));
    return out;
}

bool is_sentinel(std::string_view response) {
    std::string t = text::trim(response);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"')
        t = t.substr(1, t.size() - 2);
    return t == kSentinel;
}

bool has_framing_phrase(std::string_view response) {
    std::string t = text::trim(response);
    return text::starts_with_ci(t, "here is") || text::starts_with_ci(t, "processed");
}

std::vector<std::string> chunk_paragraphs(std::string_view text, size_t max_chars) {
    if (text.size() <= max_chars) return {std::string(text)};
    std::vector<std::string> chunks;
    std::string cur;
    for (const auto& para : text::split_paragraphs(text)) {
        if (para.size() > max_chars) {
            if (!cur.empty()) {
                chunks.push_back(std::move(cur));
                cur.clear();
            }
            for (size_t off = 0; off < para.size(); off += max_chars)
                chunks.push_back(para.substr(off, max_chars));
            continue;
        }
        if (!cur.empty() && cur.size() + 2 + para.size() > max_chars) {
            chunks.push_back(std::move(cur));
            cur.clear();
        }
        if (!cur.empty()) cur += "\n\n";
        cur += para;
    }
    if (!cur.empty()) chunks.push_back(std::move(cur));
    return chunks;
}

CleanupResult clean_document(const Document& doc, ModelEndpoint& endpoint,
                             const CleanupOptions& options) {
    if (!doc.rendered_text)
        throw std::invalid_argument("clean_document: rendered_text missing for " + doc.doc_id);

    CleanupResult res;
    res.doc_id = doc.doc_id;
    res.model_id = endpoint.model_id();

    const std::string& input = *doc.rendered_text;
    if (text::trim(input).empty()) {
        res.no_useful_content = true;
        res.chunk_count = 1;
        return res;
    }

    auto chunks = chunk_paragraphs(input, options.max_input_chars);
    res.chunk_count = static_cast<int>(chunks.size());

    std::vector<std::string> cleaned;
    int sentinel_chunks = 0;
    for (const auto& chunk : chunks) {
        std::string prompt = build_cleanup_prompt(chunk);
        std::string response;
        bool got = false;
        try {
            response = endpoint.complete(prompt);
            if (has_framing_phrase(response) && !is_sentinel(response)) {
                response = endpoint.complete(prompt);  // one retry on framing drift
                if (has_framing_phrase(response) && !is_sentinel(response)) {
                    res.stage_incomplete = true;
                } else {
                    got = true;
                }
            } else {
                got = true;
            }
        } catch (const EndpointUnavailable&) {
            res.stage_incomplete = true;
        } catch (const MalformedResponse&) {
            res.stage_incomplete = true;
        }
        if (!got) continue;
        if (is_sentinel(response)) {
            ++sentinel_chunks;
            continue;
        }
        std::string body = text::trim(response);
        if (!body.empty()) cleaned.push_back(std::move(body));
    }

    if (sentinel_chunks == static_cast<int>(chunks.size())) {
        res.no_useful_content = true;
        return res;
    }
    for (size_t i = 0; i < cleaned.size(); ++i) {
        if (i) res.cleaned_text += "\n\n";
        res.cleaned_text += cleaned[i];
    }
    return res;
}

void apply_cleanup(Document& doc, const CleanupResult& result) {
    if (result.no_useful_content) {
        doc.cleaned_text = std::string{};
        doc.flags.insert(flags::kNoUsefulContent);
        return;
    }
    if (result.stage_incomplete) doc.flags.insert(flags::kStageIncomplete);
    doc.cleaned_text = result.cleaned_text;
}

namespace {

struct SymbolRule {
    std::string_view from;
    std::string_view to;
    bool macro;  // needs a separating space before an alnum
};

constexpr std::array<SymbolRule, 15> kSymbolTable = {{
    {"×", "\\times", true},
    {"÷", "\\div", true},
    {"≤", "\\leq", true},
    {"≥", "\\geq", true},
    {"−", "-", false},
    {"π", "\\pi", true},
    {"√", "\\sqrt", true},
    {"°", "^\\circ", true},
    {"±", "\\pm", true},
    {"≠", "\\neq", true},
    {"≈", "\\approx", true},
    {"∞", "\\infty", true},
    {"⋅", "\\cdot", true},
    {"²", "^2", false},
    {"³", "^3", false},
}};

}  // namespace

std::string tex_escape_unicode_math(std::string_view payload) {
    std::string out;
    out.reserve(payload.size());
    size_t i = 0;
    while (i < payload.size()) {
        bool matched = false;
        for (const auto& rule : kSymbolTable) {
            if (payload.substr(i).starts_with(rule.from)) {
                out.append(rule.to);
                i += rule.from.size();
                if (rule.macro && i < payload.size() &&
                    std::isalnum(static_cast<unsigned char>(payload[i])))
                    out.push_back(' ');
                matched = true;
                break;
            }
        }
        if (!matched) out.push_back(payload[i++]);
    }
    return out;
}

std::string fallback_normalize(std::string_view text,
                               const std::vector<render::MathRegion>& regions) {
    std::string out;
    out.reserve(text.size() + regions.size() * 8);
    size_t cursor = 0;
    for (const auto& r : regions) {
        if (r.begin < cursor || r.end > text.size() || r.begin > r.end) continue;
        out.append(text.substr(cursor, r.begin - cursor));
        bool rewrite = r.form == render::MathForm::shortcode ||
                       r.form == render::MathForm::script_tex ||
                       r.form == render::MathForm::mathml ||
                       r.form == render::MathForm::unicode_math;
        if (rewrite) {
            std::string payload = tex_escape_unicode_math(r.payload);
            if (r.display)
                out.append("\\[ ").append(payload).append(" \\]");
            else
                out.append("\\( ").append(payload).append(" \\)");
        } else {
            out.append(text.substr(r.begin, r.end - r.begin));
        }
        cursor = r.end;
    }
    out.append(text.substr(cursor));
    return out;
}

}  // namespace mathcrawl::cleanup
