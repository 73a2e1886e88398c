#include "mathcrawl/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "mathcrawl/analysis.hpp"
#include "mathcrawl/cleanup.hpp"
#include "mathcrawl/errors.hpp"
#include "mathcrawl/hashing.hpp"
#include "mathcrawl/textutil.hpp"
#include "mathcrawl/warc.hpp"

namespace fs = std::filesystem;

namespace mathcrawl::pipeline {

namespace {

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return hashing::digest_hex(ss.str());
}

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StageFailure("io", "cannot write " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    fs::rename(tmp, path);
}

std::string shard_name(const std::string& input_path) {
    std::string stem = fs::path(input_path).filename().string();
    // strip .warc.gz / .warc / .jsonl
    for (std::string_view ext : {".gz", ".warc", ".jsonl"}) {
        if (stem.size() > ext.size() &&
            text::iequals(std::string_view(stem).substr(stem.size() - ext.size()), ext))
            stem.resize(stem.size() - ext.size());
    }
    return stem;
}

// Completed-shard marker: <path>.ok holds the config digest and output
// digest; a matching marker lets re-runs skip the work.
bool marker_valid(const std::string& path, const std::string& config_digest) {
    std::ifstream in(path + ".ok");
    if (!in) return false;
    try {
        nlohmann::json j = nlohmann::json::parse(in);
        return j.value("config_digest", "") == config_digest &&
               j.value("output_digest", "") == file_digest(path);
    } catch (...) {
        return false;
    }
}

void write_marker(const std::string& path, const std::string& config_digest) {
    nlohmann::json j{{"config_digest", config_digest}, {"output_digest", file_digest(path)}};
    atomic_write(path + ".ok", j.dump());
}

std::string docs_to_jsonl(const std::vector<Document>& docs) {
    std::string out;
    for (const auto& d : docs) {
        out += d.to_jsonl();
        out += '\n';
    }
    return out;
}

template <typename Fn>
void parallel_over(size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::future<void>> futs;
    size_t inflight_limit = static_cast<size_t>(workers);
    size_t next = 0;
    while (next < n || !futs.empty()) {
        while (next < n && futs.size() < inflight_limit)
            futs.push_back(std::async(std::launch::async, fn, next++));
        futs.front().get();
        futs.erase(futs.begin());
    }
}

}  // namespace

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["inputs"] = inputs;
    j["allow_list"] = allow_list_path;
    j["url_policy"] = url_policy == UrlPolicy::canonical ? "canonical" : "exact";
    j["output_root"] = output_root;
    j["seed"] = seed;
    j["workers"] = workers;
    j["stages"] = {{"render", stages.render},     {"clean", stages.clean},
                   {"score", stages.score},       {"dedup", stages.dedup},
                   {"decontam", stages.decontam}, {"analyze", stages.analyze}};
    j["render"] = {{"line_width", render_cfg.line_width},
                   {"list_indent", render_cfg.list_indent},
                   {"preserve_verbatim", render_cfg.preserve_verbatim},
                   {"math_passthrough", render_cfg.math_passthrough}};
    j["clean"] = {{"endpoint", clean.endpoint_url},
                  {"model", clean.model},
                  {"offline_fallback", clean.offline_fallback},
                  {"max_inflight", clean.max_inflight},
                  {"max_input_chars", clean.max_input_chars},
                  {"api_key_env", clean.api_key_env}};
    nlohmann::json subsets = nlohmann::json::array();
    for (const auto& s : score.subsets)
        subsets.push_back({{"name", s.name}, {"min_score", s.min_score}});
    j["score"] = {{"scorer", score.scorer}, {"subsets", subsets}};
    j["dedup"] = {{"shingle_width", lsh.shingle_width},
                  {"num_bands", lsh.num_bands},
                  {"rows_per_band", lsh.rows_per_band},
                  {"target_jaccard", lsh.target_jaccard}};
    j["decontam"] = {{"threshold", decontam.threshold},
                     {"benchmarks", decontam.benchmarks_path},
                     {"embedder", decontam.embedder},
                     {"window_chars", decontam.window_chars},
                     {"window_overlap", decontam.window_overlap}};
    j["analyze"] = {{"topic_endpoint", analyze.topic_endpoint_url},
                    {"topic_sample", analyze.topic_sample}};
    return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.inputs = j.value("inputs", std::vector<std::string>{});
    c.allow_list_path = j.value("allow_list", "");
    c.url_policy =
        j.value("url_policy", "canonical") == "exact" ? UrlPolicy::exact : UrlPolicy::canonical;
    c.output_root = j.value("output_root", "");
    c.seed = j.value("seed", uint64_t{0});
    c.workers = j.value("workers", 1);
    if (j.contains("stages")) {
        const auto& s = j["stages"];
        c.stages.render = s.value("render", true);
        c.stages.clean = s.value("clean", true);
        c.stages.score = s.value("score", true);
        c.stages.dedup = s.value("dedup", true);
        c.stages.decontam = s.value("decontam", true);
        c.stages.analyze = s.value("analyze", true);
    }
    if (j.contains("render")) {
        const auto& r = j["render"];
        c.render_cfg.line_width = r.value("line_width", 120);
        c.render_cfg.list_indent = r.value("list_indent", 3);
        c.render_cfg.preserve_verbatim = r.value("preserve_verbatim", true);
        c.render_cfg.math_passthrough = r.value("math_passthrough", true);
    }
    if (j.contains("clean")) {
        const auto& cl = j["clean"];
        c.clean.endpoint_url = cl.value("endpoint", "");
        c.clean.model = cl.value("model", "cleanup-model");
        c.clean.offline_fallback = cl.value("offline_fallback", true);
        c.clean.max_inflight = cl.value("max_inflight", 4);
        c.clean.max_input_chars = cl.value("max_input_chars", size_t{24000});
        c.clean.api_key_env = cl.value("api_key_env", "");
    }
    if (j.contains("score")) {
        const auto& sc = j["score"];
        c.score.scorer = sc.value("scorer", "heuristic");
        if (sc.contains("subsets")) {
            c.score.subsets.clear();
            for (const auto& s : sc["subsets"])
                c.score.subsets.push_back(
                    {s.value("name", ""), s.value("min_score", 3)});
        }
    }
    if (j.contains("dedup")) {
        const auto& d = j["dedup"];
        c.lsh.shingle_width = d.value("shingle_width", 24);
        c.lsh.num_bands = d.value("num_bands", 20);
        c.lsh.rows_per_band = d.value("rows_per_band", 13);
        c.lsh.target_jaccard = d.value("target_jaccard", 0.8);
    }
    if (j.contains("decontam")) {
        const auto& d = j["decontam"];
        c.decontam.threshold = d.value("threshold", 0.9);
        c.decontam.benchmarks_path = d.value("benchmarks", "");
        c.decontam.embedder = d.value("embedder", "mock");
        c.decontam.window_chars = d.value("window_chars", size_t{2000});
        c.decontam.window_overlap = d.value("window_overlap", size_t{200});
    }
    if (j.contains("analyze")) {
        const auto& a = j["analyze"];
        c.analyze.topic_endpoint_url = a.value("topic_endpoint", "");
        c.analyze.topic_sample = a.value("topic_sample", size_t{0});
    }
    return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config " + path);
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigInvalid(std::string("parse error: ") + e.what());
    }
}

std::string PipelineConfig::digest() const { return hashing::digest_hex(to_json().dump()); }

std::vector<Finding> validate_config(const PipelineConfig& c) {
    std::vector<Finding> findings;
    auto error = [&](std::string field, std::string msg) {
        findings.push_back({Finding::Severity::error, std::move(field), std::move(msg)});
    };
    auto warn = [&](std::string field, std::string msg) {
        findings.push_back({Finding::Severity::warning, std::move(field), std::move(msg)});
    };

    if (c.inputs.empty()) error("inputs", "no input archives configured");
    for (const auto& p : c.inputs)
        if (!fs::exists(p)) error("inputs", "missing input: " + p);
    if (c.allow_list_path.empty())
        error("allow_list", "allow-list path not set");
    else if (!fs::exists(c.allow_list_path))
        error("allow_list", "missing allow-list: " + c.allow_list_path);
    if (c.output_root.empty()) error("output_root", "output root not set");
    if (c.workers < 1) error("workers", "workers must be >= 1");

    if (c.render_cfg.line_width < 20)
        error("RenderConfig.line_width", "line_width must be >= 20");
    if (c.render_cfg.list_indent < 0)
        error("RenderConfig.list_indent", "list_indent must be >= 0");

    if (c.lsh.num_bands < 1) error("LshParams.num_bands", "num_bands must be >= 1");
    if (c.lsh.rows_per_band < 1)
        error("LshParams.rows_per_band", "rows_per_band must be >= 1");
    if (c.lsh.shingle_width < 1)
        error("LshParams.shingle_width", "shingle_width must be >= 1");
    if (c.lsh.target_jaccard < 0.0 || c.lsh.target_jaccard > 1.0)
        error("LshParams.target_jaccard", "target_jaccard must be in [0,1]");

    if (c.decontam.threshold <= 0.0 || c.decontam.threshold > 1.0)
        error("DecontamConfig.threshold", "threshold must be in (0,1]");
    if (c.stages.decontam && !c.decontam.benchmarks_path.empty() &&
        !fs::exists(c.decontam.benchmarks_path))
        error("DecontamConfig.benchmarks", "missing benchmarks: " + c.decontam.benchmarks_path);
    if (c.stages.decontam && c.decontam.benchmarks_path.empty())
        warn("DecontamConfig.benchmarks", "decontam enabled with no benchmark sets");

    for (const auto& s : c.score.subsets)
        if (s.min_score < 1 || s.min_score > 5)
            error("SubsetPolicy." + s.name, "min_score must be in 1..5");
    if (c.stages.score && !c.stages.clean)
        warn("stages.score", "scoring without the clean stage scores rendered text");

    if (c.stages.clean && c.clean.endpoint_url.empty() && !c.clean.offline_fallback)
        warn("clean", "no endpoint configured and offline fallback disabled");
    return findings;
}

nlohmann::json PipelineManifest::to_json() const {
    nlohmann::json j;
    j["run_id"] = run_id;
    j["config_digest"] = config_digest;
    j["seed"] = seed;
    j["shards"] = shards;
    nlohmann::json st;
    for (const auto& [name, counts] : stages)
        st[name] = {{"input", counts.input},
                    {"output", counts.output},
                    {"flagged", counts.flagged},
                    {"digest", counts.output_digest}};
    j["stages"] = st;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    return j;
}

PipelineManifest PipelineManifest::from_json(const nlohmann::json& j) {
    PipelineManifest m;
    m.run_id = j.value("run_id", "");
    m.config_digest = j.value("config_digest", "");
    m.seed = j.value("seed", uint64_t{0});
    m.shards = j.value("shards", std::vector<std::string>{});
    if (j.contains("stages")) {
        for (auto it = j["stages"].begin(); it != j["stages"].end(); ++it) {
            StageCounts c;
            c.input = it.value().value("input", uint64_t{0});
            c.output = it.value().value("output", uint64_t{0});
            c.flagged = it.value().value("flagged", uint64_t{0});
            c.output_digest = it.value().value("digest", "");
            m.stages[it.key()] = c;
        }
    }
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    return m;
}

namespace {

struct StageIo {
    fs::path dir;
    std::vector<std::string> shards;

    std::string shard_file(const std::string& shard) const {
        return (dir / (shard + ".jsonl")).string();
    }
    std::string flagged_file(const std::string& shard) const {
        return (dir / (shard + ".flagged.jsonl")).string();
    }
};

struct Runner {
    const PipelineConfig& cfg;
    const RunHooks& hooks;
    std::string config_digest;
    PipelineManifest manifest;
    fs::path root;

    // Built lazily from config when hooks don't inject one.
    std::unique_ptr<ModelEndpoint> owned_cleanup_endpoint;
    std::unique_ptr<ModelEndpoint> owned_topic_endpoint;
    std::unique_ptr<Embedder> owned_embedder;
    std::unique_ptr<scoring::Scorer> owned_scorer;

    explicit Runner(const PipelineConfig& cfg, const RunHooks& hooks)
        : cfg(cfg), hooks(hooks), config_digest(cfg.digest()), root(cfg.output_root) {}

    std::string api_key(const std::string& env_name) const {
        if (env_name.empty()) return {};
        const char* v = std::getenv(env_name.c_str());
        return v ? v : std::string{};
    }

    ModelEndpoint* cleanup_endpoint() {
        if (hooks.cleanup_endpoint) return hooks.cleanup_endpoint;
        if (cfg.clean.endpoint_url.empty()) return nullptr;
        if (!owned_cleanup_endpoint)
            owned_cleanup_endpoint = std::make_unique<HttpChatEndpoint>(
                cfg.clean.endpoint_url, cfg.clean.model, 0.0, api_key(cfg.clean.api_key_env));
        return owned_cleanup_endpoint.get();
    }

    ModelEndpoint* topic_endpoint() {
        if (hooks.topic_endpoint) return hooks.topic_endpoint;
        if (cfg.analyze.topic_endpoint_url.empty()) return nullptr;
        if (!owned_topic_endpoint)
            owned_topic_endpoint = std::make_unique<HttpChatEndpoint>(
                cfg.analyze.topic_endpoint_url, "topic-model", 0.0, std::string{});
        return owned_topic_endpoint.get();
    }

    Embedder* embedder() {
        if (hooks.embedder) return hooks.embedder;
        if (!owned_embedder) {
            if (cfg.decontam.embedder.rfind("endpoint:", 0) == 0)
                owned_embedder = std::make_unique<HttpEmbedder>(
                    cfg.decontam.embedder.substr(9), "embedding-model");
            else
                owned_embedder = std::make_unique<HashEmbedder>(256, cfg.seed);
        }
        return owned_embedder.get();
    }

    scoring::Scorer* scorer() {
        if (hooks.scorer) return hooks.scorer;
        if (!owned_scorer) {
            if (cfg.score.scorer.rfind("endpoint:", 0) == 0)
                owned_scorer = std::make_unique<scoring::HttpScorer>(cfg.score.scorer.substr(9),
                                                                     "quality-scorer");
            else
                owned_scorer = std::make_unique<scoring::HeuristicScorer>();
        }
        return owned_scorer.get();
    }

    void record_stage(const std::string& name, const StageIo& io, uint64_t input,
                      uint64_t output, uint64_t flagged) {
        StageCounts counts;
        counts.input = input;
        counts.output = output;
        counts.flagged = flagged;
        std::string all;
        for (const auto& shard : io.shards) all += file_digest(io.shard_file(shard));
        counts.output_digest = hashing::digest_hex(all);
        manifest.stages[name] = counts;
    }

    // ---------------------------------------------------------------- ingest

    StageIo stage_ingest() {
        StageIo io{root / "ingest", {}};
        fs::create_directories(io.dir);
        UrlAllowList allow = UrlAllowList::load(cfg.allow_list_path, cfg.url_policy);

        std::vector<std::string> shards;
        shards.reserve(cfg.inputs.size());
        for (const auto& input : cfg.inputs) shards.push_back(shard_name(input));
        io.shards = shards;

        std::vector<uint64_t> inputs(cfg.inputs.size()), outputs(cfg.inputs.size());
        parallel_over(cfg.inputs.size(), cfg.workers, [&](size_t i) {
            std::string out_path = io.shard_file(shards[i]);
            if (marker_valid(out_path, config_digest)) {
                auto docs = read_document_jsonl(out_path);
                // recover counts from the sidecar
                std::ifstream meta(out_path + ".counts");
                uint64_t in_count = docs.size();
                if (meta) meta >> in_count;
                inputs[i] = in_count;
                outputs[i] = docs.size();
                return;
            }
            std::vector<std::string> warnings;
            auto refs = warc::scan_archive(cfg.inputs[i], allow, &warnings);
            uint64_t matched = refs.size();
            auto docs = warc::scan_and_load(cfg.inputs[i], allow, &warnings);
            atomic_write(out_path, docs_to_jsonl(docs));
            atomic_write(out_path + ".counts", std::to_string(matched));
            write_marker(out_path, config_digest);
            inputs[i] = matched;
            outputs[i] = docs.size();
        });
        uint64_t in_total = 0, out_total = 0;
        for (size_t i = 0; i < cfg.inputs.size(); ++i) {
            in_total += inputs[i];
            out_total += outputs[i];
        }
        record_stage("ingest", io, in_total, out_total, in_total - out_total);
        return io;
    }

    // ---------------------------------------------------------------- render

    StageIo stage_render(const StageIo& prev) {
        StageIo io{root / "render", prev.shards};
        fs::create_directories(io.dir);
        std::vector<uint64_t> counts(prev.shards.size());
        parallel_over(prev.shards.size(), cfg.workers, [&](size_t i) {
            const std::string& shard = prev.shards[i];
            std::string out_path = io.shard_file(shard);
            std::string regions_path = (io.dir / (shard + ".regions.jsonl")).string();
            if (marker_valid(out_path, config_digest)) {
                counts[i] = read_document_jsonl(out_path).size();
                return;
            }
            auto docs = read_document_jsonl(prev.shard_file(shard));
            std::string regions_out;
            for (auto& doc : docs) {
                auto rr = render::render(doc.raw_html, cfg.render_cfg);
                auto shortcodes = render::extract_shortcode_math(rr.text);
                auto dollars = render::detect_dollar_math(rr.text);
                auto unicode = render::detect_unicode_math(rr.text);
                auto merged = render::merge_regions({rr.regions, shortcodes, dollars, unicode});
                doc.rendered_text = rr.text;
                if (rr.warnings.count("depth_truncated"))
                    doc.flags.insert(flags::kRenderTruncated);
                nlohmann::json regions_json = nlohmann::json::array();
                for (const auto& r : merged) regions_json.push_back(r.to_json());
                nlohmann::json line{{"doc_id", doc.doc_id}, {"regions", regions_json}};
                regions_out += line.dump();
                regions_out += '\n';
            }
            atomic_write(out_path, docs_to_jsonl(docs));
            atomic_write(regions_path, regions_out);
            write_marker(out_path, config_digest);
            counts[i] = docs.size();
        });
        uint64_t total = 0;
        for (uint64_t c : counts) total += c;
        record_stage("render", io, total, total, 0);
        return io;
    }

    // ----------------------------------------------------------------- clean

    StageIo stage_clean(const StageIo& prev) {
        StageIo io{root / "clean", prev.shards};
        fs::create_directories(io.dir);
        ModelEndpoint* endpoint = cleanup_endpoint();
        cleanup::CleanupOptions opts;
        opts.max_input_chars = cfg.clean.max_input_chars;

        std::vector<uint64_t> ins(prev.shards.size()), outs(prev.shards.size()),
            flaggeds(prev.shards.size());
        parallel_over(prev.shards.size(), cfg.workers, [&](size_t i) {
            const std::string& shard = prev.shards[i];
            std::string out_path = io.shard_file(shard);
            std::string flagged_path = io.flagged_file(shard);
            if (marker_valid(out_path, config_digest)) {
                ins[i] = read_document_jsonl(prev.shard_file(shard)).size();
                outs[i] = read_document_jsonl(out_path).size();
                flaggeds[i] = ins[i] - outs[i];
                return;
            }
            auto docs = read_document_jsonl(prev.shard_file(shard));

            // regions sidecar from the render stage
            std::map<std::string, std::vector<render::MathRegion>> regions_by_doc;
            std::ifstream rin((prev.dir / (shard + ".regions.jsonl")).string());
            if (rin) {
                std::string line;
                while (std::getline(rin, line)) {
                    if (text::trim(line).empty()) continue;
                    auto j = nlohmann::json::parse(line);
                    auto& vec = regions_by_doc[j.at("doc_id").get<std::string>()];
                    for (const auto& rj : j.at("regions"))
                        vec.push_back(render::MathRegion::from_json(rj));
                }
            }

            std::vector<Document> kept, flagged;
            for (auto& doc : docs) {
                if (!doc.rendered_text) doc.rendered_text = std::string{};
                bool use_endpoint = endpoint != nullptr;
                if (use_endpoint) {
                    auto result = cleanup::clean_document(doc, *endpoint, opts);
                    cleanup::apply_cleanup(doc, result);
                } else if (cfg.clean.offline_fallback) {
                    if (text::trim(*doc.rendered_text).empty()) {
                        doc.cleaned_text = std::string{};
                        doc.flags.insert(flags::kNoUsefulContent);
                    } else {
                        auto it = regions_by_doc.find(doc.doc_id);
                        static const std::vector<render::MathRegion> kNone;
                        const auto& regions = it == regions_by_doc.end() ? kNone : it->second;
                        doc.cleaned_text =
                            cleanup::fallback_normalize(*doc.rendered_text, regions);
                    }
                } else {
                    doc.flags.insert(flags::kStageIncomplete);
                }
                if (doc.has_flag(flags::kNoUsefulContent) ||
                    doc.has_flag(flags::kStageIncomplete))
                    flagged.push_back(std::move(doc));
                else
                    kept.push_back(std::move(doc));
            }
            atomic_write(out_path, docs_to_jsonl(kept));
            atomic_write(flagged_path, docs_to_jsonl(flagged));
            write_marker(out_path, config_digest);
            ins[i] = docs.size();
            outs[i] = kept.size();
            flaggeds[i] = flagged.size();
        });
        uint64_t in_total = 0, out_total = 0, flag_total = 0;
        for (size_t i = 0; i < prev.shards.size(); ++i) {
            in_total += ins[i];
            out_total += outs[i];
            flag_total += flaggeds[i];
        }
        record_stage("clean", io, in_total, out_total, flag_total);
        return io;
    }

    // ----------------------------------------------------------------- score

    StageIo stage_score(const StageIo& prev) {
        StageIo io{root / "score", prev.shards};
        fs::create_directories(io.dir);
        scoring::Scorer* sc = scorer();
        std::vector<uint64_t> ins(prev.shards.size()), outs(prev.shards.size()),
            flaggeds(prev.shards.size());
        parallel_over(prev.shards.size(), cfg.workers, [&](size_t i) {
            const std::string& shard = prev.shards[i];
            std::string out_path = io.shard_file(shard);
            if (marker_valid(out_path, config_digest)) {
                ins[i] = read_document_jsonl(prev.shard_file(shard)).size();
                outs[i] = read_document_jsonl(out_path).size();
                flaggeds[i] = ins[i] - outs[i];
                return;
            }
            auto docs = read_document_jsonl(prev.shard_file(shard));
            std::vector<Document> kept, flagged;
            for (auto& doc : docs) {
                try {
                    auto qs = scoring::score_document(doc, *sc);
                    doc.quality_score = qs.score;
                    kept.push_back(std::move(doc));
                } catch (const ScorerUnavailable&) {
                    doc.flags.insert(flags::kStageIncomplete);
                    flagged.push_back(std::move(doc));
                }
            }
            atomic_write(out_path, docs_to_jsonl(kept));
            atomic_write(io.flagged_file(shard), docs_to_jsonl(flagged));
            write_marker(out_path, config_digest);
            ins[i] = docs.size();
            outs[i] = kept.size();
            flaggeds[i] = flagged.size();
        });
        uint64_t in_total = 0, out_total = 0, flag_total = 0;
        for (size_t i = 0; i < prev.shards.size(); ++i) {
            in_total += ins[i];
            out_total += outs[i];
            flag_total += flaggeds[i];
        }
        record_stage("score", io, in_total, out_total, flag_total);
        return io;
    }

    // ----------------------------------------------------------------- dedup

    StageIo stage_dedup(const StageIo& prev) {
        StageIo io{root / "dedup", prev.shards};
        fs::create_directories(io.dir);

        // Global stage: candidates cross shard boundaries.
        std::vector<std::vector<Document>> shard_docs(prev.shards.size());
        bool all_markers = true;
        for (size_t i = 0; i < prev.shards.size(); ++i) {
            shard_docs[i] = read_document_jsonl(prev.shard_file(prev.shards[i]));
            if (!marker_valid(io.shard_file(prev.shards[i]), config_digest))
                all_markers = false;
        }
        uint64_t in_total = 0;
        for (const auto& docs : shard_docs) in_total += docs.size();

        if (all_markers && fs::exists((io.dir / "clusters.jsonl").string())) {
            uint64_t out_total = 0;
            for (const auto& shard : prev.shards)
                out_total += read_document_jsonl(io.shard_file(shard)).size();
            record_stage("dedup", io, in_total, out_total, in_total - out_total);
            return io;
        }

        dedup::LshParams params = cfg.lsh;
        params.hash_seed = cfg.seed;

        std::map<std::string, const Document*> by_id;
        std::vector<dedup::MinHashSignature> sigs;
        for (const auto& docs : shard_docs) {
            for (const auto& doc : docs) {
                const std::string& body = doc.cleaned_text ? *doc.cleaned_text
                                                           : doc.rendered_text.value_or("");
                by_id[doc.doc_id] = &doc;
                auto sh = dedup::shingle(body, params.shingle_width);
                sigs.push_back(dedup::signature(sh, params, doc.doc_id));
            }
        }
        auto text_of = [&](const std::string& id) -> std::optional<std::string> {
            auto it = by_id.find(id);
            if (it == by_id.end()) return std::nullopt;
            const Document* d = it->second;
            return d->cleaned_text ? *d->cleaned_text : d->rendered_text.value_or("");
        };
        std::vector<std::string> warnings;
        auto clusters = dedup::find_duplicates(sigs, text_of, params, &warnings);

        std::set<std::string> duplicates;
        std::string clusters_out;
        for (size_t ci = 0; ci < clusters.size(); ++ci) {
            nlohmann::json j{{"cluster_id", ci},
                             {"members", clusters[ci].member_doc_ids},
                             {"representative", clusters[ci].representative}};
            clusters_out += j.dump();
            clusters_out += '\n';
            for (const auto& m : clusters[ci].member_doc_ids)
                if (m != clusters[ci].representative) duplicates.insert(m);
        }
        atomic_write((io.dir / "clusters.jsonl").string(), clusters_out);

        uint64_t out_total = 0, flag_total = 0;
        for (size_t i = 0; i < prev.shards.size(); ++i) {
            std::vector<Document> kept, flagged;
            for (auto& doc : shard_docs[i]) {
                if (duplicates.count(doc.doc_id)) {
                    doc.flags.insert(flags::kDuplicate);
                    flagged.push_back(std::move(doc));
                } else {
                    kept.push_back(std::move(doc));
                }
            }
            atomic_write(io.shard_file(prev.shards[i]), docs_to_jsonl(kept));
            atomic_write(io.flagged_file(prev.shards[i]), docs_to_jsonl(flagged));
            write_marker(io.shard_file(prev.shards[i]), config_digest);
            out_total += kept.size();
            flag_total += flagged.size();
        }
        record_stage("dedup", io, in_total, out_total, flag_total);
        return io;
    }

    // -------------------------------------------------------------- decontam

    StageIo stage_decontam(const StageIo& prev) {
        StageIo io{root / "decontam", prev.shards};
        fs::create_directories(io.dir);

        std::vector<decontam::BenchmarkItem> benchmarks;
        if (!cfg.decontam.benchmarks_path.empty())
            benchmarks = decontam::load_benchmarks(cfg.decontam.benchmarks_path);

        decontam::DecontamConfig dc;
        dc.threshold = cfg.decontam.threshold;
        dc.embedder_id = embedder()->id();
        dc.window_chars = cfg.decontam.window_chars;
        dc.window_overlap = cfg.decontam.window_overlap;

        decontam::EmbeddingCache cache((io.dir / "embedding_cache.jsonl").string());

        uint64_t in_total = 0, out_total = 0, flag_total = 0;
        for (const auto& shard : prev.shards) {
            std::string out_path = io.shard_file(shard);
            auto docs = read_document_jsonl(prev.shard_file(shard));
            in_total += docs.size();
            if (marker_valid(out_path, config_digest)) {
                uint64_t out_count = read_document_jsonl(out_path).size();
                out_total += out_count;
                flag_total += docs.size() - out_count;
                continue;
            }
            auto flagged_ids = decontam::flag_contaminated(docs, benchmarks, *embedder(), dc,
                                                           &cache);
            std::vector<Document> kept, flagged;
            for (auto& doc : docs) {
                if (flagged_ids.count(doc.doc_id)) {
                    doc.flags.insert(flags::kContaminated);
                    flagged.push_back(std::move(doc));
                } else {
                    kept.push_back(std::move(doc));
                }
            }
            atomic_write(out_path, docs_to_jsonl(kept));
            atomic_write(io.flagged_file(shard), docs_to_jsonl(flagged));
            write_marker(out_path, config_digest);
            out_total += kept.size();
            flag_total += flagged.size();
        }
        record_stage("decontam", io, in_total, out_total, flag_total);
        return io;
    }

    // --------------------------------------------------------------- analyze

    void stage_analyze(const StageIo& prev) {
        fs::path dir = root / "analyze";
        fs::create_directories(dir);

        std::vector<Document> corpus;
        for (const auto& shard : prev.shards) {
            auto docs = read_document_jsonl(prev.shard_file(shard));
            corpus.insert(corpus.end(), std::make_move_iterator(docs.begin()),
                          std::make_move_iterator(docs.end()));
        }

        auto table = analysis::domain_table(corpus);
        std::string tsv = "metric\trank\tdomain\tcount\tpct\n";
        char buf[64];
        for (size_t i = 0; i < table.by_docs.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.6f", table.by_docs[i].doc_pct);
            tsv += "docs\t" + std::to_string(i + 1) + "\t" + table.by_docs[i].domain + "\t" +
                   std::to_string(table.by_docs[i].doc_count) + "\t" + buf + "\n";
        }
        for (size_t i = 0; i < table.by_chars.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.6f", table.by_chars[i].char_pct);
            tsv += "chars\t" + std::to_string(i + 1) + "\t" + table.by_chars[i].domain + "\t" +
                   std::to_string(table.by_chars[i].char_count) + "\t" + buf + "\n";
        }
        atomic_write((dir / "domains.tsv").string(), tsv);

        auto stats = analysis::corpus_stats(corpus);
        nlohmann::json sj{{"doc_count", stats.doc_count},
                          {"char_count", stats.char_count},
                          {"token_count", stats.token_count},
                          {"code_doc_count", stats.code_doc_count},
                          {"token_counter", stats.token_counter},
                          {"top100_doc_share", table.top_k_doc_share(100)},
                          {"top100_char_share", table.top_k_char_share(100)}};
        atomic_write((dir / "stats.json").string(), sj.dump(2));

        if (ModelEndpoint* te = topic_endpoint()) {
            std::vector<size_t> picked;
            if (cfg.analyze.topic_sample > 0 && cfg.analyze.topic_sample < corpus.size())
                picked = analysis::sample_indices(corpus.size(), cfg.analyze.topic_sample,
                                                  cfg.seed);
            else {
                picked.resize(corpus.size());
                for (size_t i = 0; i < corpus.size(); ++i) picked[i] = i;
            }
            std::map<std::string, uint64_t> tally;
            std::string topics_tsv = "doc_id\traw_label\tmapped_label\n";
            for (size_t idx : picked) {
                auto label = analysis::classify_topic(corpus[idx], *te);
                tally[label.mapped_label] += 1;
                topics_tsv += label.doc_id + "\t" + text::collapse_whitespace(label.raw_label) +
                              "\t" + label.mapped_label + "\n";
            }
            atomic_write((dir / "topics.tsv").string(), topics_tsv);
            nlohmann::json tj(tally);
            atomic_write((dir / "topic_distribution.json").string(), tj.dump(2));
        }

        // score subsets over the final corpus
        fs::path subsets_dir = root / "subsets";
        fs::create_directories(subsets_dir);
        for (const auto& policy : cfg.score.subsets) {
            auto subset = scoring::materialize_subset(corpus, policy);
            atomic_write((subsets_dir / (policy.name + ".jsonl")).string(),
                         docs_to_jsonl(subset));
        }

        StageIo io{dir, prev.shards};
        StageCounts counts;
        counts.input = corpus.size();
        counts.output = corpus.size();
        counts.flagged = 0;
        counts.output_digest = file_digest((dir / "stats.json").string());
        manifest.stages["analyze"] = counts;
    }

    PipelineManifest execute() {
        manifest.config_digest = config_digest;
        manifest.seed = cfg.seed;
        manifest.started_at = now_iso8601();
        fs::create_directories(root);

        std::string input_digests;
        for (const auto& p : cfg.inputs) input_digests += file_digest(p);
        manifest.run_id = hashing::digest_hex(config_digest + input_digests);

        StageIo io = stage_ingest();
        manifest.shards = io.shards;
        if (cfg.stages.render) io = stage_render(io);
        if (cfg.stages.clean) io = stage_clean(io);
        if (cfg.stages.score) io = stage_score(io);
        if (cfg.stages.dedup) io = stage_dedup(io);
        if (cfg.stages.decontam) io = stage_decontam(io);
        if (cfg.stages.analyze) stage_analyze(io);

        manifest.finished_at = now_iso8601();
        atomic_write((root / "manifest.json").string(), manifest.to_json().dump(2));
        return manifest;
    }
};

}  // namespace

PipelineManifest run(const PipelineConfig& config, const RunHooks& hooks) {
    auto findings = validate_config(config);
    for (const auto& f : findings)
        if (f.severity == Finding::Severity::error)
            throw ConfigInvalid(f.field + ": " + f.message);
    Runner runner(config, hooks);
    return runner.execute();
}

}  // namespace mathcrawl::pipeline
