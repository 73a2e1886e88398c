#include "mathcrawl/document.hpp"

#include <fstream>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/hashing.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl {

std::string Document::make_doc_id(std::string_view url, std::string_view snapshot_id,
                                  std::string_view raw_html) {
    std::string key;
    key.reserve(url.size() + snapshot_id.size() + 34);
    key.append(url);
    key.push_back('\0');
    key.append(snapshot_id);
    key.push_back('\0');
    key.append(hashing::digest_hex(raw_html));
    return hashing::digest_hex(key);
}

nlohmann::json Document::to_json() const {
    nlohmann::json j;
    j["doc_id"] = doc_id;
    j["url"] = url;
    j["snapshot_id"] = snapshot_id;
    j["raw_html"] = text::base64_encode(raw_html);
    if (rendered_text) j["rendered_text"] = *rendered_text;
    if (cleaned_text) j["cleaned_text"] = *cleaned_text;
    if (quality_score) j["quality_score"] = *quality_score;
    if (topic) j["topic"] = *topic;
    if (!flags.empty()) j["flags"] = flags;
    if (!fetch_time.empty()) j["fetch_time"] = fetch_time;
    return j;
}

Document Document::from_json(const nlohmann::json& j) {
    Document d;
    d.doc_id = j.at("doc_id").get<std::string>();
    d.url = j.at("url").get<std::string>();
    d.snapshot_id = j.at("snapshot_id").get<std::string>();
    d.raw_html = text::base64_decode(j.at("raw_html").get<std::string>());
    if (j.contains("rendered_text")) d.rendered_text = j["rendered_text"].get<std::string>();
    if (j.contains("cleaned_text")) d.cleaned_text = j["cleaned_text"].get<std::string>();
    if (j.contains("quality_score")) d.quality_score = j["quality_score"].get<int>();
    if (j.contains("topic")) d.topic = j["topic"].get<std::string>();
    if (j.contains("flags"))
        for (const auto& f : j["flags"]) d.flags.insert(f.get<std::string>());
    if (j.contains("fetch_time")) d.fetch_time = j["fetch_time"].get<std::string>();
    return d;
}

std::string Document::to_jsonl() const { return to_json().dump(); }

Document Document::from_jsonl(std::string_view line) {
    return from_json(nlohmann::json::parse(line));
}

std::vector<Document> read_document_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<Document> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        docs.push_back(Document::from_jsonl(line));
    }
    return docs;
}

void write_document_jsonl(const std::string& path, const std::vector<Document>& docs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& d : docs) out << d.to_jsonl() << '\n';
}

}  // namespace mathcrawl
