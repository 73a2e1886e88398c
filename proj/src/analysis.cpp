#include "mathcrawl/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <random>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/textutil.hpp"
#include "mathcrawl/url.hpp"

namespace mathcrawl::analysis {

DomainTable domain_table(const std::vector<Document>& docs) {
    std::map<std::string, DomainStat> agg;
    uint64_t total_docs = 0, total_chars = 0;
    for (const auto& d : docs) {
        std::string dom;
        try {
            dom = domain_of(d.url);
        } catch (const MalformedUrl&) {
            continue;
        }
        uint64_t chars = d.cleaned_text ? d.cleaned_text->size()
                         : d.rendered_text ? d.rendered_text->size()
                                           : d.raw_html.size();
        auto& st = agg[dom];
        st.domain = dom;
        st.doc_count += 1;
        st.char_count += chars;
        total_docs += 1;
        total_chars += chars;
    }
    DomainTable table;
    for (auto& [dom, st] : agg) {
        st.doc_pct = total_docs ? static_cast<double>(st.doc_count) / total_docs : 0.0;
        st.char_pct = total_chars ? static_cast<double>(st.char_count) / total_chars : 0.0;
        table.by_docs.push_back(st);
        table.by_chars.push_back(st);
    }
    std::sort(table.by_docs.begin(), table.by_docs.end(),
              [](const DomainStat& a, const DomainStat& b) {
                  if (a.doc_count != b.doc_count) return a.doc_count > b.doc_count;
                  return a.domain < b.domain;
              });
    std::sort(table.by_chars.begin(), table.by_chars.end(),
              [](const DomainStat& a, const DomainStat& b) {
                  if (a.char_count != b.char_count) return a.char_count > b.char_count;
                  return a.domain < b.domain;
              });
    return table;
}

double DomainTable::top_k_doc_share(size_t k) const {
    double acc = 0.0;
    for (size_t i = 0; i < std::min(k, by_docs.size()); ++i) acc += by_docs[i].doc_pct;
    return acc;
}

double DomainTable::top_k_char_share(size_t k) const {
    double acc = 0.0;
    for (size_t i = 0; i < std::min(k, by_chars.size()); ++i) acc += by_chars[i].char_pct;
    return acc;
}

std::string map_topic_label(std::string_view raw) {
    std::string first_line = text::trim(raw);
    size_t nl = first_line.find('\n');
    if (nl != std::string::npos) first_line = text::trim(first_line.substr(0, nl));
    std::string folded = text::to_lower(text::collapse_whitespace(first_line));
    // tolerate trailing punctuation like "Mathematics."
    while (!folded.empty() && (folded.back() == '.' || folded.back() == '!'))
        folded.pop_back();
    for (const auto& label : topic_taxonomy())
        if (folded == text::to_lower(label)) return label;
    return "Other";
}

std::string build_topic_prompt(std::string_view text, size_t max_chars) {
    std::string_view clipped = text.substr(0, max_chars);
    constexpr std::string_view placeholder = "{text}";
    size_t pos = kTopicPromptTemplate.find(placeholder);
    std::string out;
    out.reserve(kTopicPromptTemplate.size() + clipped.size());
    out.append(kTopicPromptTemplate.substr(0, pos));
    out.append(clipped);
    out.append(kTopicPromptTemplate.substr(pos + placeholder.size()));
    return out;
}

TopicLabel classify_topic(const Document& doc, ModelEndpoint& endpoint, size_t max_chars) {
    if (!doc.cleaned_text)
        throw std::invalid_argument("classify_topic: cleaned_text missing for " + doc.doc_id);
    TopicLabel label;
    label.doc_id = doc.doc_id;
    try {
        label.raw_label = endpoint.complete(build_topic_prompt(*doc.cleaned_text, max_chars));
        label.mapped_label = map_topic_label(label.raw_label);
    } catch (const EndpointUnavailable&) {
        label.mapped_label = std::string(kUnclassified);
    }
    return label;
}

bool has_code_fence(std::string_view text) {
    size_t fences = 0;
    size_t pos = 0;
    while ((pos = text.find("```", pos)) != std::string_view::npos) {
        ++fences;
        pos += 3;
    }
    return fences >= 2;
}

uint64_t count_code_docs(const std::vector<Document>& docs) {
    uint64_t n = 0;
    for (const auto& d : docs) {
        const std::string* body = d.cleaned_text ? &*d.cleaned_text
                                  : d.rendered_text ? &*d.rendered_text
                                                    : nullptr;
        if (body && has_code_fence(*body)) ++n;
    }
    return n;
}

uint64_t approx_token_count(std::string_view text) {
    uint64_t tokens = 0;
    bool in_word = false;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        bool word_char = std::isalnum(c) != 0;
        if (word_char) {
            if (!in_word) ++tokens;
        } else {
            if (std::ispunct(c)) ++tokens;  // each punctuation byte counts
        }
        in_word = word_char;
    }
    return tokens;
}

CorpusStats corpus_stats(const std::vector<Document>& docs) {
    CorpusStats s;
    s.token_counter = std::string(kTokenCounterId);
    for (const auto& d : docs) {
        const std::string* body = d.cleaned_text ? &*d.cleaned_text
                                  : d.rendered_text ? &*d.rendered_text
                                                    : nullptr;
        if (!body) continue;
        s.doc_count += 1;
        s.char_count += body->size();
        s.token_count += approx_token_count(*body);
        if (has_code_fence(*body)) s.code_doc_count += 1;
    }
    return s;
}

std::vector<size_t> sample_indices(size_t n, size_t k, uint64_t seed) {
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    if (k >= n) return idx;
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace mathcrawl::analysis
