#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mathcrawl {

// Stage verdict flags carried on a Document.
namespace flags {
inline constexpr const char* kDuplicate = "duplicate";
inline constexpr const char* kContaminated = "contaminated";
inline constexpr const char* kNoUsefulContent = "no_useful_content";
inline constexpr const char* kStageIncomplete = "stage_incomplete";
inline constexpr const char* kRenderTruncated = "render_truncated";
}  // namespace flags

// One web page's lifecycle record across the pipeline stages.
struct Document {
    std::string doc_id;
    std::string url;
    std::string snapshot_id;
    std::string raw_html;  // bytes, charset-decoded to UTF-8
    std::optional<std::string> rendered_text;
    std::optional<std::string> cleaned_text;
    std::optional<int> quality_score;
    std::optional<std::string> topic;
    std::set<std::string> flags;
    std::string fetch_time;

    bool has_flag(std::string_view f) const { return flags.count(std::string(f)) > 0; }

    // doc_id = digest of (url, snapshot_id, digest of raw_html).
    static std::string make_doc_id(std::string_view url, std::string_view snapshot_id,
                                   std::string_view raw_html);

    nlohmann::json to_json() const;
    static Document from_json(const nlohmann::json& j);

    std::string to_jsonl() const;
    static Document from_jsonl(std::string_view line);
};

std::vector<Document> read_document_jsonl(const std::string& path);
void write_document_jsonl(const std::string& path, const std::vector<Document>& docs);

}  // namespace mathcrawl
