#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mathcrawl/document.hpp"
#include "mathcrawl/endpoint.hpp"

namespace mathcrawl::analysis {

struct DomainStat {
    std::string domain;
    uint64_t doc_count = 0;
    uint64_t char_count = 0;
    double doc_pct = 0.0;   // fractions; each metric sums to 1
    double char_pct = 0.0;
};

struct DomainTable {
    std::vector<DomainStat> by_docs;   // doc_count desc, tie-break domain asc
    std::vector<DomainStat> by_chars;  // char_count desc, tie-break domain asc

    double top_k_doc_share(size_t k) const;
    double top_k_char_share(size_t k) const;
};

DomainTable domain_table(const std::vector<Document>& docs);

// Topic classification prompt; substituted at {text}.
inline constexpr std::string_view kTopicPromptTemplate =
    R"(You are a topic classification assistant.
Given the following document text, identify its main topic from this list only:
- Mathematics
- Computer Science
- Physics
- Statistics
- Chemistry
- Economics
- Other

Choose the single most relevant category from the list.
Document:
{text}

Your output should be only 1 word. Finish your response right after category and do not add any explanation.)";

inline const std::vector<std::string>& topic_taxonomy() {
    static const std::vector<std::string> t = {"Mathematics", "Computer Science", "Physics",
                                               "Statistics",  "Chemistry",        "Economics",
                                               "Other"};
    return t;
}

inline constexpr std::string_view kUnclassified = "Unclassified";

struct TopicLabel {
    std::string doc_id;
    std::string raw_label;
    std::string mapped_label;  // member of the taxonomy, or Unclassified on endpoint failure
};

// Trim, first line, case-fold, map into the taxonomy; out-of-taxonomy
// labels become Other.
std::string map_topic_label(std::string_view raw);

std::string build_topic_prompt(std::string_view text, size_t max_chars = 24000);

TopicLabel classify_topic(const Document& doc, ModelEndpoint& endpoint,
                          size_t max_chars = 24000);

// Balanced triple-backtick fence pair present?
bool has_code_fence(std::string_view text);
uint64_t count_code_docs(const std::vector<Document>& docs);

// Whitespace+punctuation approximate token counter.
uint64_t approx_token_count(std::string_view text);
inline constexpr std::string_view kTokenCounterId = "approx-ws-punct-v1";

struct CorpusStats {
    uint64_t doc_count = 0;
    uint64_t char_count = 0;
    uint64_t token_count = 0;
    uint64_t code_doc_count = 0;
    std::string token_counter;
};

CorpusStats corpus_stats(const std::vector<Document>& docs);

// Seeded uniform sample of k indices out of n (without replacement).
std::vector<size_t> sample_indices(size_t n, size_t k, uint64_t seed);

}  // namespace mathcrawl::analysis
