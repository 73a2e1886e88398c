#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mathcrawl/decontam.hpp"
#include "mathcrawl/dedup.hpp"
#include "mathcrawl/endpoint.hpp"
#include "mathcrawl/render.hpp"
#include "mathcrawl/scoring.hpp"
#include "mathcrawl/url.hpp"

namespace mathcrawl::pipeline {

struct StageToggles {
    bool render = true;
    bool clean = true;
    bool score = true;
    bool dedup = true;
    bool decontam = true;
    bool analyze = true;
};

struct CleanupStageConfig {
    std::string endpoint_url;   // empty: no remote endpoint
    std::string model = "cleanup-model";
    bool offline_fallback = true;
    int max_inflight = 4;
    size_t max_input_chars = 24000;
    std::string api_key_env;  // env var name holding the key
};

struct ScoreStageConfig {
    std::string scorer = "heuristic";  // "heuristic" | "endpoint:<url>"
    std::vector<scoring::SubsetPolicy> subsets = {{"3plus", 3}, {"4plus", 4}};
};

struct DecontamStageConfig {
    double threshold = 0.9;
    std::string benchmarks_path;
    std::string embedder = "mock";  // "mock" | "endpoint:<url>"
    size_t window_chars = 2000;
    size_t window_overlap = 200;
};

struct AnalyzeStageConfig {
    std::string topic_endpoint_url;  // empty: topics skipped
    size_t topic_sample = 0;         // 0: all docs
};

struct PipelineConfig {
    std::vector<std::string> inputs;  // archive paths
    std::string allow_list_path;
    UrlPolicy url_policy = UrlPolicy::canonical;
    std::string output_root;
    uint64_t seed = 0;
    int workers = 1;

    StageToggles stages;
    render::RenderConfig render_cfg;
    CleanupStageConfig clean;
    ScoreStageConfig score;
    dedup::LshParams lsh;
    DecontamStageConfig decontam;
    AnalyzeStageConfig analyze;

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::string& path);
    std::string digest() const;
};

struct Finding {
    enum class Severity { error, warning };
    Severity severity;
    std::string field;
    std::string message;
};

std::vector<Finding> validate_config(const PipelineConfig& config);

struct StageCounts {
    uint64_t input = 0;
    uint64_t output = 0;
    uint64_t flagged = 0;
    std::string output_digest;
};

struct PipelineManifest {
    std::string run_id;
    std::string config_digest;
    uint64_t seed = 0;
    std::vector<std::string> shards;
    std::map<std::string, StageCounts> stages;
    std::string started_at;
    std::string finished_at;

    nlohmann::json to_json() const;
    static PipelineManifest from_json(const nlohmann::json& j);
};

// Test seams: non-null members override endpoints built from config.
struct RunHooks {
    ModelEndpoint* cleanup_endpoint = nullptr;
    ModelEndpoint* topic_endpoint = nullptr;
    Embedder* embedder = nullptr;
    scoring::Scorer* scorer = nullptr;
};

// Executes enabled stages in order over all shards; outputs and the
// manifest are written atomically. Completed shards (matching config
// digest and output digest) are skipped on re-run.
PipelineManifest run(const PipelineConfig& config, const RunHooks& hooks = {});

}  // namespace mathcrawl::pipeline
