#include "mathcrawl/scoring.hpp"

#include <cctype>

#include <httplib.h>
#include <json.hpp>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl::scoring {

namespace {

// count non-overlapping delimited spans; returns total bytes inside
int count_spans(std::string_view text, std::string_view open, std::string_view close,
                size_t* math_bytes) {
    int count = 0;
    size_t pos = 0;
    while (true) {
        size_t a = text.find(open, pos);
        if (a == std::string_view::npos) break;
        size_t b = text.find(close, a + open.size());
        if (b == std::string_view::npos) break;
        ++count;
        *math_bytes += b + close.size() - a;
        pos = b + close.size();
    }
    return count;
}

}  // namespace

MathStats math_stats(std::string_view text) {
    MathStats s;
    size_t math_bytes = 0;
    s.display_equations = count_spans(text, "\\[", "\\]", &math_bytes) +
                          count_spans(text, "$$", "$$", &math_bytes);
    s.inline_equations = count_spans(text, "\\(", "\\)", &math_bytes);

    // $...$ pairs, skipping $$ (already counted)
    size_t pos = 0;
    while (pos < text.size()) {
        size_t a = text.find('$', pos);
        if (a == std::string_view::npos) break;
        if (a + 1 < text.size() && text[a + 1] == '$') {
            pos = a + 2;
            continue;
        }
        size_t b = text.find('$', a + 1);
        if (b == std::string_view::npos) break;
        if (b > a + 1) {
            ++s.inline_equations;
            math_bytes += b + 1 - a;
        }
        pos = b + 1;
    }

    for (size_t i = 0; i + 1 < text.size(); ++i)
        if (text[i] == '\\' && std::isalpha(static_cast<unsigned char>(text[i + 1])))
            ++s.tex_commands;

    bool in_word = false;
    for (char c : text) {
        bool alnum = std::isalnum(static_cast<unsigned char>(c)) != 0;
        if (alnum && !in_word) ++s.words;
        in_word = alnum;
    }
    s.math_char_ratio = text.empty() ? 0.0 : static_cast<double>(math_bytes) / text.size();
    return s;
}

int HeuristicScorer::score(const std::string& cleaned_text) {
    MathStats s = math_stats(cleaned_text);
    int equations = s.display_equations + s.inline_equations;
    bool any_math = equations > 0 || s.tex_commands > 0;
    if (s.display_equations >= 10 && s.words >= 500 && s.math_char_ratio >= 0.05) return 5;
    if (s.display_equations >= 5 && s.words >= 300) return 4;
    if (equations >= 3 && s.words >= 150) return 3;
    if (any_math) return 2;
    return 1;
}

HttpScorer::HttpScorer(std::string base_url, std::string model, std::string api_key)
    : base_url_(std::move(base_url)), model_(std::move(model)), api_key_(std::move(api_key)) {}

int HttpScorer::score(const std::string& cleaned_text) {
    size_t scheme = base_url_.find("://");
    size_t path_start =
        scheme == std::string::npos ? base_url_.find('/') : base_url_.find('/', scheme + 3);
    std::string host = path_start == std::string::npos ? base_url_ : base_url_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : base_url_.substr(path_start);

    nlohmann::json req{{"model", model_}, {"input", cleaned_text}};
    httplib::Client client(host);
    client.set_read_timeout(60);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(path, headers, req.dump(), "application/json");
    if (!res || res->status < 200 || res->status >= 300)
        throw ScorerUnavailable(base_url_);
    try {
        int sc = nlohmann::json::parse(res->body).at("score").get<int>();
        if (sc < 1 || sc > 5) throw std::runtime_error("score out of range");
        return sc;
    } catch (const ScorerUnavailable&) {
        throw;
    } catch (const std::exception& e) {
        throw ScorerUnavailable(std::string("bad scorer response: ") + e.what());
    }
}

QualityScore score_document(const Document& doc, Scorer& scorer) {
    if (!doc.cleaned_text || text::trim(*doc.cleaned_text).empty() ||
        doc.has_flag(flags::kNoUsefulContent))
        throw std::invalid_argument("score_document: no usable cleaned_text for " + doc.doc_id);
    return QualityScore{doc.doc_id, scorer.score(*doc.cleaned_text), scorer.id()};
}

std::vector<Document> materialize_subset(const std::vector<Document>& corpus,
                                         const SubsetPolicy& policy) {
    std::vector<Document> out;
    for (const auto& doc : corpus) {
        if (!doc.quality_score) throw UnscoredDocument(doc.doc_id);
        if (*doc.quality_score >= policy.min_score) out.push_back(doc);
    }
    return out;
}

}  // namespace mathcrawl::scoring
