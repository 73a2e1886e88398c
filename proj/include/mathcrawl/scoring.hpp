#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mathcrawl/document.hpp"

namespace mathcrawl::scoring {

struct QualityScore {
    std::string doc_id;
    int score = 1;  // 1..5
    std::string scorer_id;
};

struct SubsetPolicy {
    std::string name;
    int min_score = 3;  // membership(doc) <=> score >= min_score
};

class Scorer {
public:
    virtual ~Scorer() = default;
    virtual int score(const std::string& cleaned_text) = 0;
    virtual std::string id() const = 0;
};

// Inputs to the reference rubric, also reused by analytics.
struct MathStats {
    int display_equations = 0;  // \[..\] and $$..$$ spans
    int inline_equations = 0;   // \(..\) and $..$ spans
    int tex_commands = 0;       // \word occurrences
    int words = 0;
    double math_char_ratio = 0.0;  // bytes inside math spans / total bytes
};

MathStats math_stats(std::string_view text);

// Offline reference scorer. Banded rubric over equation counts, word
// count, and math density:
//   5: >=10 display eq, >=500 words, ratio >= 0.05
//   4: >=5 display eq, >=300 words
//   3: >=3 equations (any kind), >=150 words
//   2: any math signal (equation or TeX command)
//   1: otherwise
class HeuristicScorer : public Scorer {
public:
    int score(const std::string& cleaned_text) override;
    std::string id() const override { return "heuristic-v1"; }
};

// Remote scorer: POST {model, input} -> {score}.
class HttpScorer : public Scorer {
public:
    HttpScorer(std::string base_url, std::string model, std::string api_key = {});
    int score(const std::string& cleaned_text) override;
    std::string id() const override { return "endpoint:" + model_; }

private:
    std::string base_url_;
    std::string model_;
    std::string api_key_;
};

// Precondition: cleaned_text present and not the sentinel.
QualityScore score_document(const Document& doc, Scorer& scorer);

// Exactly the docs with score >= min_score, order preserved. Throws
// UnscoredDocument when an input lacks a score.
std::vector<Document> materialize_subset(const std::vector<Document>& corpus,
                                         const SubsetPolicy& policy);

}  // namespace mathcrawl::scoring
