#include "mathcrawl/decontam.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/hashing.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl::decontam {

EmbeddingVector EmbeddingVector::make(std::string source_id, std::vector<double> values) {
    EmbeddingVector v;
    v.source_id = std::move(source_id);
    double norm2 = 0.0;
    for (double x : values) norm2 += x * x;
    v.values = std::move(values);
    v.norm = std::sqrt(norm2);
    return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.values.size() != b.values.size())
        throw DimensionMismatch(a.values.size(), b.values.size());
    if (a.norm <= 0.0) throw ZeroNormVector(a.source_id);
    if (b.norm <= 0.0) throw ZeroNormVector(b.source_id);
    double dot = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return dot / (a.norm * b.norm);
}

std::vector<std::string> window_text(std::string_view text, size_t window_chars,
                                     size_t window_overlap) {
    if (window_chars == 0 || text.size() <= window_chars) return {std::string(text)};
    size_t step = window_overlap >= window_chars ? 1 : window_chars - window_overlap;
    std::vector<std::string> out;
    for (size_t off = 0;; off += step) {
        out.emplace_back(text.substr(off, window_chars));
        if (off + window_chars >= text.size()) break;
    }
    return out;
}

std::vector<BenchmarkItem> load_benchmarks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open benchmarks " + path);
    std::vector<BenchmarkItem> items;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line);
        items.push_back(BenchmarkItem{j.at("set_name").get<std::string>(),
                                      j.at("item_id").get<std::string>(),
                                      j.at("role").get<std::string>(),
                                      j.at("text").get<std::string>()});
    }
    return items;
}

void write_benchmarks(const std::string& path, const std::vector<BenchmarkItem>& items) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write benchmarks " + path);
    for (const auto& it : items) {
        nlohmann::json j{{"set_name", it.set_name},
                         {"item_id", it.item_id},
                         {"role", it.role},
                         {"text", it.text}};
        out << j.dump() << '\n';
    }
}

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            entries_[j.at("key").get<std::string>()] =
                j.at("values").get<std::vector<double>>();
        } catch (...) {
            // tolerate a torn trailing line
        }
    }
}

namespace {
std::string cache_key(std::string_view embedder_id, std::string_view text) {
    return std::string(embedder_id) + ":" + hashing::digest_hex(text);
}
}  // namespace

const std::vector<double>* EmbeddingCache::find(std::string_view embedder_id,
                                                std::string_view text) const {
    auto it = entries_.find(cache_key(embedder_id, text));
    return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingCache::put(std::string_view embedder_id, std::string_view text,
                         std::vector<double> values) {
    entries_[cache_key(embedder_id, text)] = std::move(values);
    dirty_ = true;
}

void EmbeddingCache::save() const {
    if (!dirty_) return;
    std::ofstream out(path_, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write embedding cache " + path_);
    for (const auto& [key, values] : entries_) {
        nlohmann::json j{{"key", key}, {"values", values}};
        out << j.dump() << '\n';
    }
    dirty_ = false;
}

namespace {

std::vector<std::vector<double>> embed_cached(Embedder& embedder,
                                              const std::vector<std::string>& texts,
                                              EmbeddingCache* cache) {
    std::vector<std::vector<double>> out(texts.size());
    std::vector<size_t> missing;
    for (size_t i = 0; i < texts.size(); ++i) {
        if (cache) {
            if (const auto* hit = cache->find(embedder.id(), texts[i])) {
                out[i] = *hit;
                continue;
            }
        }
        missing.push_back(i);
    }
    if (!missing.empty()) {
        std::vector<std::string> batch;
        batch.reserve(missing.size());
        for (size_t i : missing) batch.push_back(texts[i]);
        auto vecs = embedder.embed(batch);
        if (vecs.size() != missing.size())
            throw MissingEmbedding("embedder returned wrong batch size");
        for (size_t k = 0; k < missing.size(); ++k) {
            out[missing[k]] = vecs[k];
            if (cache) cache->put(embedder.id(), texts[missing[k]], vecs[k]);
        }
    }
    return out;
}

}  // namespace

std::set<std::string> flag_contaminated(const std::vector<Document>& docs,
                                        const std::vector<BenchmarkItem>& benchmarks,
                                        Embedder& embedder, const DecontamConfig& config,
                                        EmbeddingCache* cache) {
    std::set<std::string> flagged;
    if (benchmarks.empty()) return flagged;

    std::vector<std::string> bench_texts;
    bench_texts.reserve(benchmarks.size());
    for (const auto& item : benchmarks) bench_texts.push_back(item.text);
    auto bench_raw = embed_cached(embedder, bench_texts, cache);
    std::vector<EmbeddingVector> bench_vecs;
    bench_vecs.reserve(bench_raw.size());
    for (size_t i = 0; i < bench_raw.size(); ++i) {
        if (bench_raw[i].empty()) throw MissingEmbedding(benchmarks[i].item_id);
        bench_vecs.push_back(EmbeddingVector::make(
            benchmarks[i].set_name + "/" + benchmarks[i].item_id, std::move(bench_raw[i])));
    }

    for (const auto& doc : docs) {
        const std::string& body = doc.cleaned_text ? *doc.cleaned_text
                                  : doc.rendered_text ? *doc.rendered_text
                                                      : doc.raw_html;
        auto windows = window_text(body, config.window_chars, config.window_overlap);
        auto win_raw = embed_cached(embedder, windows, cache);
        bool hit = false;
        for (size_t w = 0; w < win_raw.size() && !hit; ++w) {
            if (win_raw[w].empty()) throw MissingEmbedding(doc.doc_id);
            auto v = EmbeddingVector::make(doc.doc_id, std::move(win_raw[w]));
            for (const auto& bench : bench_vecs) {
                if (cosine(v, bench) > config.threshold) {
                    hit = true;
                    break;
                }
            }
        }
        if (hit) flagged.insert(doc.doc_id);
    }
    if (cache) cache->save();
    return flagged;
}

}  // namespace mathcrawl::decontam
