#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mathcrawl/document.hpp"
#include "mathcrawl/endpoint.hpp"

namespace mathcrawl::decontam {

struct EmbeddingVector {
    std::string source_id;
    std::vector<double> values;
    double norm = 0.0;

    static EmbeddingVector make(std::string source_id, std::vector<double> values);
};

struct BenchmarkItem {
    std::string set_name;
    std::string item_id;
    std::string role;  // "prompt" | "answer"
    std::string text;
};

struct DecontamConfig {
    double threshold = 0.9;  // strict: flag when similarity > threshold
    std::string embedder_id;
    size_t window_chars = 2000;
    size_t window_overlap = 200;
};

// dot(a,b)/(|a||b|); throws DimensionMismatch / ZeroNormVector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Overlapping windows used to embed long documents.
std::vector<std::string> window_text(std::string_view text, size_t window_chars,
                                     size_t window_overlap);

// JSONL {set_name, item_id, role, text}.
std::vector<BenchmarkItem> load_benchmarks(const std::string& path);
void write_benchmarks(const std::string& path, const std::vector<BenchmarkItem>& items);

// On-disk vector cache keyed by (embedder_id, content digest).
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::string path);
    const std::vector<double>* find(std::string_view embedder_id, std::string_view text) const;
    void put(std::string_view embedder_id, std::string_view text, std::vector<double> values);
    void save() const;

private:
    std::string path_;
    std::map<std::string, std::vector<double>> entries_;
    mutable bool dirty_ = false;
};

// doc flagged iff max over benchmark items of cosine(doc window, item)
// exceeds the threshold (strictly). Exact all-pairs scan.
std::set<std::string> flag_contaminated(const std::vector<Document>& docs,
                                        const std::vector<BenchmarkItem>& benchmarks,
                                        Embedder& embedder, const DecontamConfig& config,
                                        EmbeddingCache* cache = nullptr);

}  // namespace mathcrawl::decontam
