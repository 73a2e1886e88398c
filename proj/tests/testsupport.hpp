#pragma once

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mathcrawl/dedup.hpp"

namespace testsupport {

// Scoped temp directory under the system temp root.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("mathcrawl_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string random_words(std::mt19937_64& rng, size_t n_words) {
    static const char* kWords[] = {"integral", "matrix",   "proof",   "lemma",  "theorem",
                                   "vector",   "tensor",   "group",   "field",  "prime",
                                   "series",   "limit",    "bound",   "graph",  "metric",
                                   "measure",  "operator", "kernel",  "basis",  "norm"};
    std::uniform_int_distribution<size_t> pick(0, std::size(kWords) - 1);
    std::string out;
    for (size_t i = 0; i < n_words; ++i) {
        if (i) out += ' ';
        out += kWords[pick(rng)];
        out += std::to_string(rng() % 1000);
    }
    return out;
}

// Exact Jaccard over shingle sets, computed independently of the
// library implementation (ordered-set sweep).
inline double oracle_jaccard(const mathcrawl::dedup::ShingleSet& a,
                             const mathcrawl::dedup::ShingleSet& b) {
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    size_t inter = 0;
    auto ia = sa.begin();
    auto ib = sb.begin();
    while (ia != sa.end() && ib != sb.end()) {
        if (*ia == *ib) {
            ++inter;
            ++ia;
            ++ib;
        } else if (*ia < *ib) {
            ++ia;
        } else {
            ++ib;
        }
    }
    size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Brute-force all-pairs clustering at a Jaccard threshold: the O(n^2)
// oracle for dedup. Returns clusters (size >= 2) as sorted member lists.
inline std::vector<std::vector<std::string>> brute_force_clusters(
    const std::vector<std::pair<std::string, std::string>>& docs,  // (id, text)
    int shingle_width, double threshold) {
    const size_t n = docs.size();
    std::vector<mathcrawl::dedup::ShingleSet> sets;
    sets.reserve(n);
    for (const auto& [id, text] : docs)
        sets.push_back(mathcrawl::dedup::shingle(text, shingle_width));

    std::vector<size_t> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = i;
    std::function<size_t(size_t)> find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (oracle_jaccard(sets[i], sets[j]) >= threshold) {
                size_t a = find(i), b = find(j);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }

    std::map<size_t, std::vector<std::string>> comps;
    for (size_t i = 0; i < n; ++i) comps[find(i)].push_back(docs[i].first);
    std::vector<std::vector<std::string>> clusters;
    for (auto& [root, members] : comps) {
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end());
        clusters.push_back(std::move(members));
    }
    std::sort(clusters.begin(), clusters.end());
    return clusters;
}

// Synthetic corpus with planted near-duplicate families: (id, text)
// pairs. Families are single-character edits of a long base text, so
// intra-family similarity stays well above the dedup threshold.
struct SynthCorpus {
    std::vector<std::pair<std::string, std::string>> docs;
    size_t family_count = 0;
};

inline SynthCorpus planted_corpus(uint64_t seed, size_t n_docs, size_t n_families,
                                  size_t family_size, size_t base_chars = 4000) {
    std::mt19937_64 rng(seed);
    SynthCorpus corpus;
    corpus.family_count = n_families;
    size_t doc_idx = 0;
    auto next_id = [&doc_idx]() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "doc%05zu", doc_idx++);
        return std::string(buf);
    };

    for (size_t f = 0; f < n_families; ++f) {
        std::string base = random_words(rng, base_chars / 12);
        corpus.docs.emplace_back(next_id(), base);
        for (size_t v = 1; v < family_size; ++v) {
            std::string variant = base;
            std::uniform_int_distribution<size_t> pos(0, variant.size() - 1);
            variant[pos(rng)] = 'q';  // single-character mutation
            corpus.docs.emplace_back(next_id(), variant);
        }
    }
    // some sub-threshold relatives (heavily mutated): candidates that
    // verification must reject
    for (size_t k = 0; k < n_families / 2; ++k) {
        std::string base = random_words(rng, base_chars / 12);
        corpus.docs.emplace_back(next_id(), base);
        std::string far = base;
        std::uniform_int_distribution<size_t> pos(0, far.size() - 1);
        for (int e = 0; e < 40; ++e) far[pos(rng)] = 'z';
        corpus.docs.emplace_back(next_id(), far);
    }
    while (corpus.docs.size() < n_docs)
        corpus.docs.emplace_back(next_id(), random_words(rng, base_chars / 12));
    return corpus;
}

}  // namespace testsupport
