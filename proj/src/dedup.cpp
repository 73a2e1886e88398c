#include "mathcrawl/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <unordered_map>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/hashing.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl::dedup {

std::string normalize_for_shingling(std::string_view text) {
    return text::to_lower(text::collapse_whitespace(text));
}

ShingleSet shingle(std::string_view text, int width) {
    if (width < 1) throw std::invalid_argument("shingle width must be >= 1");
    std::string norm = normalize_for_shingling(text);
    ShingleSet out;
    size_t w = static_cast<size_t>(width);
    if (norm.size() <= w) {
        out.insert(std::move(norm));
        return out;
    }
    out.reserve(norm.size() - w + 1);
    for (size_t i = 0; i + w <= norm.size(); ++i) out.insert(norm.substr(i, w));
    return out;
}

MinHashSignature signature(const ShingleSet& shingles, const LshParams& params,
                           std::string doc_id) {
    if (shingles.empty()) throw EmptyShingleSet();
    const int total = params.total_hashes();
    MinHashSignature sig;
    sig.doc_id = std::move(doc_id);
    sig.values.assign(static_cast<size_t>(total), UINT64_MAX);
    for (const auto& s : shingles) {
        uint64_t base = hashing::hash64(s, params.hash_seed);
        for (int i = 0; i < total; ++i) {
            uint64_t h = hashing::family_hash(base, static_cast<uint32_t>(i));
            if (h < sig.values[static_cast<size_t>(i)]) sig.values[static_cast<size_t>(i)] = h;
        }
    }
    return sig;
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.values.size() != b.values.size() || a.values.empty())
        throw std::invalid_argument("signature length mismatch");
    size_t equal = 0;
    for (size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] == b.values[i]) ++equal;
    return static_cast<double>(equal) / static_cast<double>(a.values.size());
}

double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    const ShingleSet& small = a.size() <= b.size() ? a : b;
    const ShingleSet& large = a.size() <= b.size() ? b : a;
    size_t inter = 0;
    for (const auto& s : small)
        if (large.count(s)) ++inter;
    size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double collision_probability(double s, const LshParams& params) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    double sb = std::pow(s, params.rows_per_band);
    return 1.0 - std::pow(1.0 - sb, params.num_bands);
}

uint64_t band_bucket_key(const uint64_t* rows, int rows_per_band, int band_index,
                         uint64_t seed) {
    uint64_t h = hashing::mix64(seed ^ (static_cast<uint64_t>(band_index) + 1) *
                                           hashing::kGolden);
    for (int i = 0; i < rows_per_band; ++i) h = hashing::mix64(h ^ rows[i]);
    return h;
}

namespace {

struct UnionFind {
    std::vector<uint32_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    uint32_t find(uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(uint32_t a, uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

std::vector<std::pair<uint32_t, uint32_t>> band_candidates(
    const std::vector<MinHashSignature>& sigs, const LshParams& params, int band) {
    std::unordered_map<uint64_t, std::vector<uint32_t>> buckets;
    const int b = params.rows_per_band;
    for (uint32_t i = 0; i < sigs.size(); ++i) {
        const uint64_t* rows = sigs[i].values.data() + static_cast<size_t>(band) * b;
        uint64_t key = band_bucket_key(rows, b, band, params.hash_seed);
        buckets[key].push_back(i);
    }
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    for (const auto& [key, members] : buckets) {
        if (members.size() < 2) continue;
        for (size_t x = 0; x < members.size(); ++x)
            for (size_t y = x + 1; y < members.size(); ++y)
                pairs.emplace_back(members[x], members[y]);
    }
    return pairs;
}

}  // namespace

std::vector<DuplicateCluster> find_duplicates(const std::vector<MinHashSignature>& signatures,
                                              const TextAccessor& text_of,
                                              const LshParams& params,
                                              std::vector<std::string>* warnings) {
    const size_t n = signatures.size();
    for (const auto& sig : signatures)
        if (static_cast<int>(sig.values.size()) != params.total_hashes())
            throw std::invalid_argument("signature length != bands*rows for " + sig.doc_id);

    // Band tables are independent; process them in concurrent groups of
    // five, one owner per band.
    std::vector<std::pair<uint32_t, uint32_t>> candidates;
    constexpr int kGroup = 5;
    for (int band0 = 0; band0 < params.num_bands; band0 += kGroup) {
        std::vector<std::future<std::vector<std::pair<uint32_t, uint32_t>>>> futs;
        int band_hi = std::min(band0 + kGroup, params.num_bands);
        for (int band = band0; band < band_hi; ++band)
            futs.push_back(std::async(std::launch::async, band_candidates,
                                      std::cref(signatures), params, band));
        for (auto& f : futs) {
            auto pairs = f.get();
            candidates.insert(candidates.end(), pairs.begin(), pairs.end());
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // Exact-Jaccard verification over the original shingle sets.
    std::unordered_map<uint32_t, ShingleSet> cache;
    auto shingles_of = [&](uint32_t idx) -> const ShingleSet* {
        auto it = cache.find(idx);
        if (it != cache.end()) return &it->second;
        auto text_opt = text_of(signatures[idx].doc_id);
        if (!text_opt) return nullptr;
        auto [ins, ok] = cache.emplace(idx, shingle(*text_opt, params.shingle_width));
        return &ins->second;
    };

    UnionFind uf(n);
    for (const auto& [i, j] : candidates) {
        const ShingleSet* a = shingles_of(i);
        const ShingleSet* b = shingles_of(j);
        if (!a || !b) {
            if (warnings)
                warnings->push_back("missing text for candidate pair (" + signatures[i].doc_id +
                                    ", " + signatures[j].doc_id + ")");
            continue;
        }
        if (exact_jaccard(*a, *b) >= params.target_jaccard) uf.unite(i, j);
    }

    std::map<uint32_t, std::vector<std::string>> comps;
    for (uint32_t i = 0; i < n; ++i) comps[uf.find(i)].push_back(signatures[i].doc_id);

    std::vector<DuplicateCluster> clusters;
    for (auto& [root, members] : comps) {
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end());
        DuplicateCluster c;
        c.representative = members.front();
        c.member_doc_ids = std::move(members);
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const DuplicateCluster& a, const DuplicateCluster& b) {
                  return a.representative < b.representative;
              });
    return clusters;
}

}  // namespace mathcrawl::dedup
