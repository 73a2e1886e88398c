#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mathcrawl/analysis.hpp"
#include "mathcrawl/cleanup.hpp"
#include "mathcrawl/decontam.hpp"
#include "mathcrawl/dedup.hpp"
#include "mathcrawl/pipeline.hpp"
#include "mathcrawl/render.hpp"
#include "mathcrawl/scoring.hpp"
#include "mathcrawl/textutil.hpp"
#include "mathcrawl/warc.hpp"

namespace fs = std::filesystem;
using namespace mathcrawl;

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::map<std::string, std::vector<render::MathRegion>> load_regions(const std::string& path) {
    std::map<std::string, std::vector<render::MathRegion>> by_doc;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open regions " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        auto j = nlohmann::json::parse(line);
        auto& vec = by_doc[j.at("doc_id").get<std::string>()];
        for (const auto& rj : j.at("regions")) vec.push_back(render::MathRegion::from_json(rj));
    }
    return by_doc;
}

int cmd_ingest(const std::string& archive, const std::string& allow_path,
               const std::string& out_path, bool exact_policy) {
    auto allow = UrlAllowList::load(allow_path,
                                    exact_policy ? UrlPolicy::exact : UrlPolicy::canonical);
    std::vector<std::string> warnings;
    auto docs = warc::scan_and_load(archive, allow, &warnings);
    write_document_jsonl(out_path, docs);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << docs.size() << " documents -> " << out_path << "\n";
    return 0;
}

int cmd_render(const std::string& in_path, const std::string& out_path,
               const std::string& regions_path, const render::RenderConfig& cfg) {
    auto docs = read_document_jsonl(in_path);
    std::string regions_out;
    for (auto& doc : docs) {
        auto rr = render::render(doc.raw_html, cfg);
        auto merged = render::merge_regions({rr.regions,
                                             render::extract_shortcode_math(rr.text),
                                             render::detect_dollar_math(rr.text),
                                             render::detect_unicode_math(rr.text)});
        doc.rendered_text = rr.text;
        if (rr.warnings.count("depth_truncated")) doc.flags.insert(flags::kRenderTruncated);
        nlohmann::json regions_json = nlohmann::json::array();
        for (const auto& r : merged) regions_json.push_back(r.to_json());
        regions_out += nlohmann::json{{"doc_id", doc.doc_id}, {"regions", regions_json}}.dump();
        regions_out += '\n';
    }
    write_document_jsonl(out_path, docs);
    write_text(regions_path, regions_out);
    std::cout << docs.size() << " documents rendered -> " << out_path << "\n";
    return 0;
}

int cmd_clean(const std::string& in_path, const std::string& out_path,
              const std::string& endpoint_url, const std::string& model,
              bool offline_fallback, const std::string& regions_path, int /*max_inflight*/) {
    auto docs = read_document_jsonl(in_path);
    std::unique_ptr<ModelEndpoint> endpoint;
    if (!endpoint_url.empty()) {
        const char* key = std::getenv("MATHCRAWL_API_KEY");
        endpoint = std::make_unique<HttpChatEndpoint>(endpoint_url, model, 0.0,
                                                      key ? key : std::string{});
    }
    std::map<std::string, std::vector<render::MathRegion>> regions;
    if (!regions_path.empty()) regions = load_regions(regions_path);

    size_t flagged = 0;
    for (auto& doc : docs) {
        if (!doc.rendered_text) doc.rendered_text = std::string{};
        if (endpoint) {
            auto result = cleanup::clean_document(doc, *endpoint);
            cleanup::apply_cleanup(doc, result);
        } else if (offline_fallback) {
            if (text::trim(*doc.rendered_text).empty()) {
                doc.cleaned_text = std::string{};
                doc.flags.insert(flags::kNoUsefulContent);
            } else {
                auto it = regions.find(doc.doc_id);
                static const std::vector<render::MathRegion> kNone;
                doc.cleaned_text = cleanup::fallback_normalize(
                    *doc.rendered_text, it == regions.end() ? kNone : it->second);
            }
        } else {
            doc.flags.insert(flags::kStageIncomplete);
        }
        if (doc.has_flag(flags::kNoUsefulContent) || doc.has_flag(flags::kStageIncomplete))
            ++flagged;
    }
    write_document_jsonl(out_path, docs);
    std::cout << docs.size() << " documents cleaned (" << flagged << " flagged) -> "
              << out_path << "\n";
    return 0;
}

int cmd_score(const std::string& in_path, const std::string& out_path,
              const std::string& scorer_spec) {
    auto docs = read_document_jsonl(in_path);
    std::unique_ptr<scoring::Scorer> scorer;
    if (scorer_spec.rfind("endpoint:", 0) == 0)
        scorer = std::make_unique<scoring::HttpScorer>(scorer_spec.substr(9), "quality-scorer");
    else
        scorer = std::make_unique<scoring::HeuristicScorer>();
    size_t scored = 0;
    for (auto& doc : docs) {
        if (!doc.cleaned_text || doc.has_flag(flags::kNoUsefulContent)) continue;
        auto qs = scoring::score_document(doc, *scorer);
        doc.quality_score = qs.score;
        ++scored;
    }
    write_document_jsonl(out_path, docs);
    std::cout << scored << "/" << docs.size() << " documents scored -> " << out_path << "\n";
    return 0;
}

int cmd_dedup(const std::string& in_path, const std::string& out_path,
              const std::string& clusters_path, const dedup::LshParams& params) {
    auto docs = read_document_jsonl(in_path);
    std::vector<dedup::MinHashSignature> sigs;
    std::map<std::string, const Document*> by_id;
    for (const auto& doc : docs) {
        const std::string& body =
            doc.cleaned_text ? *doc.cleaned_text : doc.rendered_text.value_or("");
        by_id[doc.doc_id] = &doc;
        sigs.push_back(dedup::signature(dedup::shingle(body, params.shingle_width), params,
                                        doc.doc_id));
    }
    auto text_of = [&](const std::string& id) -> std::optional<std::string> {
        auto it = by_id.find(id);
        if (it == by_id.end()) return std::nullopt;
        return it->second->cleaned_text ? *it->second->cleaned_text
                                        : it->second->rendered_text.value_or("");
    };
    std::vector<std::string> warnings;
    auto clusters = dedup::find_duplicates(sigs, text_of, params, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    std::set<std::string> duplicates;
    std::string clusters_out;
    for (size_t ci = 0; ci < clusters.size(); ++ci) {
        clusters_out += nlohmann::json{{"cluster_id", ci},
                                       {"members", clusters[ci].member_doc_ids},
                                       {"representative", clusters[ci].representative}}
                            .dump();
        clusters_out += '\n';
        for (const auto& m : clusters[ci].member_doc_ids)
            if (m != clusters[ci].representative) duplicates.insert(m);
    }
    for (auto& doc : docs)
        if (duplicates.count(doc.doc_id)) doc.flags.insert(flags::kDuplicate);
    write_document_jsonl(out_path, docs);
    write_text(clusters_path, clusters_out);
    std::cout << clusters.size() << " clusters, " << duplicates.size()
              << " duplicates flagged -> " << out_path << "\n";
    return 0;
}

int cmd_decontam(const std::string& in_path, const std::string& out_path, double threshold,
                 const std::string& benchmarks_path, const std::string& embedder_spec) {
    auto docs = read_document_jsonl(in_path);
    auto benchmarks = decontam::load_benchmarks(benchmarks_path);
    std::unique_ptr<Embedder> embedder;
    if (embedder_spec.rfind("endpoint:", 0) == 0)
        embedder = std::make_unique<HttpEmbedder>(embedder_spec.substr(9), "embedding-model");
    else
        embedder = std::make_unique<HashEmbedder>();
    decontam::DecontamConfig config;
    config.threshold = threshold;
    config.embedder_id = embedder->id();
    auto flagged = decontam::flag_contaminated(docs, benchmarks, *embedder, config);
    for (auto& doc : docs)
        if (flagged.count(doc.doc_id)) doc.flags.insert(flags::kContaminated);
    write_document_jsonl(out_path, docs);
    std::cout << flagged.size() << " contaminated documents flagged -> " << out_path << "\n";
    return 0;
}

int cmd_analyze(const std::string& in_path, const std::string& out_dir) {
    auto docs = read_document_jsonl(in_path);
    fs::create_directories(out_dir);

    auto table = analysis::domain_table(docs);
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
    write_text((fs::path(out_dir) / "domains.tsv").string(), tsv);

    auto stats = analysis::corpus_stats(docs);
    nlohmann::json sj{{"doc_count", stats.doc_count},
                      {"char_count", stats.char_count},
                      {"token_count", stats.token_count},
                      {"code_doc_count", stats.code_doc_count},
                      {"token_counter", stats.token_counter},
                      {"top100_doc_share", table.top_k_doc_share(100)},
                      {"top100_char_share", table.top_k_char_share(100)}};
    write_text((fs::path(out_dir) / "stats.json").string(), sj.dump(2));
    std::cout << "analysis written to " << out_dir << "\n";
    return 0;
}

int cmd_validate(const std::string& config_path) {
    auto config = pipeline::PipelineConfig::load(config_path);
    auto findings = pipeline::validate_config(config);
    int errors = 0;
    for (const auto& f : findings) {
        bool err = f.severity == pipeline::Finding::Severity::error;
        if (err) ++errors;
        std::cout << (err ? "error" : "warning") << ": " << f.field << ": " << f.message
                  << "\n";
    }
    if (findings.empty()) std::cout << "config ok\n";
    return errors > 0 ? 1 : 0;
}

int cmd_run(const std::string& config_path, bool /*resume*/, int workers, int64_t seed) {
    auto config = pipeline::PipelineConfig::load(config_path);
    if (workers > 0) config.workers = workers;
    if (seed >= 0) config.seed = static_cast<uint64_t>(seed);
    auto manifest = pipeline::run(config);
    std::cout << "run " << manifest.run_id << " complete\n";
    for (const auto& [stage, counts] : manifest.stages)
        std::cout << "  " << stage << ": in=" << counts.input << " out=" << counts.output
                  << " flagged=" << counts.flagged << "\n";
    std::cout << "manifest: " << (fs::path(config.output_root) / "manifest.json").string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"math-rich web corpus curation pipeline"};
    app.require_subcommand(1);

    // ingest
    std::string archive, allow_path, in_path, out_path = "out.jsonl";
    bool exact_policy = false;
    auto* ingest = app.add_subcommand("ingest", "scan a web archive against an allow-list");
    ingest->add_option("archive", archive, "WARC file (plain or gzip)")->required();
    ingest->add_option("--allow-list", allow_path, "URL allow-list file")->required();
    ingest->add_option("-o,--output", out_path, "output Document JSONL");
    ingest->add_flag("--exact-urls", exact_policy, "match URLs exactly instead of canonically");

    // render
    render::RenderConfig rcfg;
    std::string regions_path = "regions.jsonl";
    auto* rnd = app.add_subcommand("render", "render raw html to layout text");
    rnd->add_option("input", in_path, "input Document JSONL")->required();
    rnd->add_option("-o,--output", out_path, "output Document JSONL");
    rnd->add_option("--regions", regions_path, "sidecar math regions JSONL");
    rnd->add_option("--line-width", rcfg.line_width, "wrap width (>= 20)");
    rnd->add_option("--list-indent", rcfg.list_indent, "list indent spaces");

    // clean
    std::string endpoint_url, model = "cleanup-model";
    bool offline_fallback = false;
    int max_inflight = 4;
    std::string clean_regions;
    auto* cln = app.add_subcommand("clean", "LLM cleanup pass (or offline fallback)");
    cln->add_option("input", in_path, "input Document JSONL")->required();
    cln->add_option("-o,--output", out_path, "output Document JSONL");
    cln->add_option("--endpoint", endpoint_url, "chat endpoint URL");
    cln->add_option("--model", model, "model name sent to the endpoint");
    cln->add_flag("--offline-fallback", offline_fallback,
                  "deterministic region rewrite instead of an endpoint");
    cln->add_option("--regions", clean_regions, "regions sidecar from render");
    cln->add_option("--max-inflight", max_inflight, "bounded endpoint parallelism");

    // score
    std::string scorer_spec = "heuristic";
    auto* sc = app.add_subcommand("score", "attach 5-point quality scores");
    sc->add_option("input", in_path, "input Document JSONL")->required();
    sc->add_option("-o,--output", out_path, "output Document JSONL");
    sc->add_option("--scorer", scorer_spec, "heuristic | endpoint:<url>");

    // dedup
    dedup::LshParams lsh;
    int64_t dedup_seed = 0;
    std::string clusters_path = "clusters.jsonl";
    auto* dd = app.add_subcommand("dedup", "MinHash-LSH fuzzy deduplication");
    dd->add_option("input", in_path, "input Document JSONL")->required();
    dd->add_option("-o,--output", out_path, "output Document JSONL");
    dd->add_option("--clusters", clusters_path, "clusters JSONL output");
    dd->add_option("--bands", lsh.num_bands, "number of LSH bands");
    dd->add_option("--rows", lsh.rows_per_band, "hash rows per band");
    dd->add_option("--shingle-width", lsh.shingle_width, "character shingle width");
    dd->add_option("--threshold", lsh.target_jaccard, "Jaccard threshold");
    dd->add_option("--seed", dedup_seed, "hash seed");

    // decontam
    double threshold = 0.9;
    std::string benchmarks_path, embedder_spec = "mock";
    auto* dc = app.add_subcommand("decontam", "flag benchmark-overlapping documents");
    dc->add_option("input", in_path, "input Document JSONL")->required();
    dc->add_option("-o,--output", out_path, "output Document JSONL");
    dc->add_option("--threshold", threshold, "cosine similarity threshold (strict >)");
    dc->add_option("--benchmarks", benchmarks_path, "benchmark items JSONL")->required();
    dc->add_option("--embedder", embedder_spec, "mock | endpoint:<url>");

    // analyze
    std::string out_dir = "analysis";
    auto* an = app.add_subcommand("analyze", "domain/table/token/code analytics");
    an->add_option("input", in_path, "input Document JSONL")->required();
    an->add_option("-o,--output-dir", out_dir, "output directory");

    // run / validate
    std::string config_path;
    bool resume = false;
    int workers = 0;
    int64_t seed = -1;
    auto* run_cmd = app.add_subcommand("run", "run all enabled stages per the config");
    run_cmd->add_option("--config", config_path, "pipeline config JSON")->required();
    run_cmd->add_flag("--resume", resume, "skip shards whose outputs are up to date");
    run_cmd->add_option("--workers", workers, "parallel shard workers");
    run_cmd->add_option("--seed", seed, "override run seed");

    auto* val = app.add_subcommand("validate", "validate a pipeline config");
    val->add_option("--config", config_path, "pipeline config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(archive, allow_path, out_path, exact_policy);
        if (rnd->parsed()) return cmd_render(in_path, out_path, regions_path, rcfg);
        if (cln->parsed())
            return cmd_clean(in_path, out_path, endpoint_url, model, offline_fallback,
                             clean_regions, max_inflight);
        if (sc->parsed()) return cmd_score(in_path, out_path, scorer_spec);
        if (dd->parsed()) {
            lsh.hash_seed = static_cast<uint64_t>(dedup_seed);
            return cmd_dedup(in_path, out_path, clusters_path, lsh);
        }
        if (dc->parsed())
            return cmd_decontam(in_path, out_path, threshold, benchmarks_path, embedder_spec);
        if (an->parsed()) return cmd_analyze(in_path, out_dir);
        if (run_cmd->parsed()) return cmd_run(config_path, resume, workers, seed);
        if (val->parsed()) return cmd_validate(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
