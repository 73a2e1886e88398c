#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace mathcrawl::dedup {

struct LshParams {
    int shingle_width = 24;
    int num_bands = 20;      // r
    int rows_per_band = 13;  // b
    double target_jaccard = 0.8;
    uint64_t hash_seed = 0;

    int total_hashes() const { return num_bands * rows_per_band; }
};

using ShingleSet = std::unordered_set<std::string>;

// Lowercase, whitespace runs collapsed to one space.
std::string normalize_for_shingling(std::string_view text);

// All width-char substrings of the normalized text; shorter texts yield
// a singleton set holding the whole (normalized) text.
ShingleSet shingle(std::string_view text, int width);

struct MinHashSignature {
    std::string doc_id;
    std::vector<uint64_t> values;  // band-major, length num_bands*rows_per_band
};

// Throws EmptyShingleSet.
MinHashSignature signature(const ShingleSet& shingles, const LshParams& params,
                           std::string doc_id = {});

// Fraction of equal positions.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

// |A ∩ B| / |A ∪ B|; empty-vs-empty is 1.
double exact_jaccard(const ShingleSet& a, const ShingleSet& b);

// P = 1 - (1 - S^b)^r.
double collision_probability(double s, const LshParams& params);

// Bucket key digest over one band's row values.
uint64_t band_bucket_key(const uint64_t* rows, int rows_per_band, int band_index,
                         uint64_t seed);

struct DuplicateCluster {
    std::vector<std::string> member_doc_ids;  // sorted
    std::string representative;               // lexicographically smallest member
};

using TextAccessor = std::function<std::optional<std::string>(const std::string& doc_id)>;

// LSH banding for candidates, exact-Jaccard verification, connected
// components over verified edges. Pairs whose text is missing at verify
// time are dropped with a warning.
std::vector<DuplicateCluster> find_duplicates(const std::vector<MinHashSignature>& signatures,
                                              const TextAccessor& text_of,
                                              const LshParams& params,
                                              std::vector<std::string>* warnings = nullptr);

}  // namespace mathcrawl::dedup
