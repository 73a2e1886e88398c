#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mathcrawl/allowlist.hpp"
#include "mathcrawl/document.hpp"

namespace mathcrawl::warc {

// Address of one record inside an archive. record_offset is a byte
// offset into the uncompressed record stream (identical to the file
// offset for plain archives).
struct WarcRecordRef {
    std::string archive_path;
    uint64_t record_offset = 0;
    std::string target_url;
    std::string snapshot_id;
    std::string fetch_time;
};

struct WarcRecord {
    uint64_t offset = 0;
    std::string version;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string payload;

    std::string header(std::string_view name) const;  // case-insensitive, "" if absent
    std::string type() const { return header("WARC-Type"); }
    std::string target_uri() const { return header("WARC-Target-URI"); }
};

// Whole-archive reader over plain or gzip (multi-member) files. Framing
// errors are resynced at the next "WARC/1." boundary when one exists;
// each recovery is recorded as a warning.
class WarcFile {
public:
    explicit WarcFile(const std::string& path);

    std::optional<WarcRecord> next();
    std::optional<WarcRecord> record_at(uint64_t offset);
    const std::string& snapshot_id() const { return snapshot_id_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    const std::string& path() const { return path_; }

private:
    std::optional<WarcRecord> parse_record(uint64_t offset, uint64_t* next_offset);

    std::string path_;
    std::string data_;  // uncompressed record stream
    uint64_t pos_ = 0;
    std::string snapshot_id_ = "unknown";
    std::vector<std::string> warnings_;
};

// Fixture/synthesis writer. Offsets returned match WarcFile offsets.
class WarcWriter {
public:
    WarcWriter(const std::string& path, bool gzip_members = true);
    ~WarcWriter();

    uint64_t write_warcinfo(std::string_view snapshot_id, std::string_view date = "2024-01-01T00:00:00Z");
    uint64_t write_response(std::string_view url, std::string_view http_payload,
                            std::string_view date = "2024-01-01T00:00:00Z");
    uint64_t write_request(std::string_view url, std::string_view http_payload,
                           std::string_view date = "2024-01-01T00:00:00Z");
    uint64_t write_metadata(std::string_view url, std::string_view payload,
                            std::string_view date = "2024-01-01T00:00:00Z");
    // Raw bytes escape hatch for corrupt-framing fixtures.
    void write_raw(std::string_view bytes);
    void close();

    // Assemble an HTTP response payload for write_response.
    static std::string http_response(std::string_view body,
                                     std::string_view content_type = "text/html; charset=utf-8",
                                     bool gzip_body = false);

private:
    uint64_t write_record(std::string_view type, std::string_view url,
                          std::string_view content_type, std::string_view payload,
                          std::string_view date);

    std::string path_;
    bool gzip_;
    std::string out_;        // file bytes
    uint64_t logical_ = 0;   // uncompressed stream offset
    bool closed_ = false;
};

// Response records whose normalized target URL is in the allow-list,
// in file order. Recoverable framing errors land in *warnings.
std::vector<WarcRecordRef> scan_archive(const std::string& archive_path,
                                        const UrlAllowList& allow_list,
                                        std::vector<std::string>* warnings = nullptr);

// Decoded payload body of the addressed response record; throws
// PayloadDecodeError on bad gzip/chunking, CorruptArchive on a bad ref.
Document load_document(const WarcRecordRef& ref);

// One-pass scan + load; ingest's main path. Decode failures are skipped
// and reported in *warnings.
std::vector<Document> scan_and_load(const std::string& archive_path,
                                    const UrlAllowList& allow_list,
                                    std::vector<std::string>* warnings = nullptr);

// Keep the latest fetch_time per (url, snapshot) pair.
std::vector<WarcRecordRef> dedupe_by_fetch_time(std::vector<WarcRecordRef> refs);

struct HttpResponse {
    int status = 0;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;  // transfer/content encodings removed

    std::string header(std::string_view name) const;
};

HttpResponse parse_http_response(std::string_view payload);

// Charset detection: HTTP header, then meta tag, then UTF-8 with lossy
// replacement. Returns UTF-8 bytes.
std::string decode_charset(std::string_view body, std::string_view content_type_header);

}  // namespace mathcrawl::warc
