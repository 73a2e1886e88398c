#include "mathcrawl/warc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/gzipio.hpp"
#include "mathcrawl/hashing.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl::warc {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open archive " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string snapshot_from_filename(const std::string& path) {
    static const std::regex re("CC-MAIN-\\d{4}-\\d{2}");
    std::smatch m;
    if (std::regex_search(path, m, re)) return m.str();
    return "unknown";
}

// "isPartOf: X" line inside a warcinfo payload.
std::string snapshot_from_warcinfo(const std::string& payload) {
    for (const auto& line : text::split_lines(payload)) {
        if (text::starts_with_ci(line, "isPartOf:"))
            return text::trim(line.substr(9));
    }
    return {};
}

std::string dechunk(std::string_view body) {
    std::string out;
    size_t pos = 0;
    while (pos < body.size()) {
        size_t eol = body.find("\r\n", pos);
        if (eol == std::string_view::npos) throw PayloadDecodeError("bad chunk header");
        std::string size_line(body.substr(pos, eol - pos));
        size_t semi = size_line.find(';');
        if (semi != std::string::npos) size_line.erase(semi);
        size_t chunk_size = 0;
        try {
            chunk_size = std::stoull(text::trim(size_line), nullptr, 16);
        } catch (...) {
            throw PayloadDecodeError("bad chunk size");
        }
        pos = eol + 2;
        if (chunk_size == 0) break;
        if (pos + chunk_size > body.size()) throw PayloadDecodeError("truncated chunk");
        out.append(body.substr(pos, chunk_size));
        pos += chunk_size + 2;  // chunk data + CRLF
    }
    return out;
}

// windows-1252 codepoints for 0x80..0x9F (0 = unmapped)
constexpr uint32_t kCp1252High[32] = {
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021,
    0x02C6, 0x2030, 0x0160, 0x2039, 0x0152, 0,      0x017D, 0,
    0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
    0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178};

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string latin1_to_utf8(std::string_view body, bool cp1252) {
    std::string out;
    out.reserve(body.size() + body.size() / 4);
    for (unsigned char c : body) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else if (cp1252 && c < 0xA0) {
            uint32_t cp = kCp1252High[c - 0x80];
            append_utf8(out, cp ? cp : 0xFFFD);
        } else {
            append_utf8(out, c);
        }
    }
    return out;
}

// Validate UTF-8, replacing invalid sequences with U+FFFD.
std::string utf8_lossy(std::string_view body) {
    std::string out;
    out.reserve(body.size());
    size_t i = 0;
    while (i < body.size()) {
        unsigned char c = body[i];
        size_t len = 0;
        uint32_t cp = 0;
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            append_utf8(out, 0xFFFD);
            ++i;
            continue;
        }
        if (i + len > body.size()) {
            append_utf8(out, 0xFFFD);
            ++i;
            continue;
        }
        bool ok = true;
        for (size_t k = 1; k < len; ++k) {
            unsigned char cc = body[i + k];
            if ((cc & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok || cp > 0x10FFFF || (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
            (len == 4 && cp < 0x10000)) {
            append_utf8(out, 0xFFFD);
            ++i;
            continue;
        }
        out.append(body.substr(i, len));
        i += len;
    }
    return out;
}

std::string charset_from(std::string_view s) {
    std::string lower = text::to_lower(s);
    size_t pos = lower.find("charset=");
    if (pos == std::string::npos) return {};
    pos += 8;
    size_t end = pos;
    while (end < lower.size() && lower[end] != ';' && lower[end] != '"' && lower[end] != '\'' &&
           !std::isspace(static_cast<unsigned char>(lower[end])) && lower[end] != '>')
        ++end;
    std::string cs = lower.substr(pos, end - pos);
    if (!cs.empty() && cs.front() == '"') cs.erase(0, 1);
    return cs;
}

// <meta charset=...> or <meta http-equiv=... content="...charset=...">
std::string charset_from_meta(std::string_view body) {
    std::string head = text::to_lower(body.substr(0, std::min<size_t>(body.size(), 4096)));
    size_t pos = 0;
    while ((pos = head.find("<meta", pos)) != std::string::npos) {
        size_t end = head.find('>', pos);
        if (end == std::string::npos) break;
        std::string tag = head.substr(pos, end - pos);
        std::string cs = charset_from(tag);
        if (!cs.empty()) return cs;
        pos = end;
    }
    return {};
}

}  // namespace

std::string WarcRecord::header(std::string_view name) const {
    for (const auto& [k, v] : headers)
        if (text::iequals(k, name)) return v;
    return {};
}

WarcFile::WarcFile(const std::string& path) : path_(path) {
    std::string raw = read_file(path);
    data_ = gzipio::looks_gzip(raw) ? gzipio::decompress(raw) : std::move(raw);
    snapshot_id_ = snapshot_from_filename(path);

    // Peek at a leading warcinfo record for the snapshot label.
    uint64_t next = 0;
    uint64_t save = pos_;
    if (auto rec = parse_record(0, &next)) {
        if (text::iequals(rec->type(), "warcinfo")) {
            std::string s = snapshot_from_warcinfo(rec->payload);
            if (!s.empty()) snapshot_id_ = s;
        }
    }
    pos_ = save;
    warnings_.clear();
}

std::optional<WarcRecord> WarcFile::parse_record(uint64_t offset, uint64_t* next_offset) {
    std::string_view data(data_);
    if (offset >= data.size()) return std::nullopt;
    std::string_view rest = data.substr(offset);

    auto resync = [&](const std::string& why) -> std::optional<WarcRecord> {
        warnings_.push_back(path_ + " @" + std::to_string(offset) + ": " + why);
        size_t sync = data.find("WARC/1.", offset + 1);
        if (sync == std::string_view::npos)
            throw CorruptArchive(path_, offset, why + " (no further record boundary)");
        return parse_record(sync, next_offset);
    };

    if (!rest.starts_with("WARC/1.")) return resync("record does not start with WARC/1.x");

    size_t hdr_end = rest.find("\r\n\r\n");
    if (hdr_end == std::string_view::npos)
        return resync("unterminated header block");

    WarcRecord rec;
    rec.offset = offset;
    auto lines = text::split_lines(std::string(rest.substr(0, hdr_end)));
    rec.version = text::trim(lines.empty() ? "" : lines[0]);
    size_t content_length = std::string::npos;
    for (size_t i = 1; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = text::trim(line.substr(0, colon));
        std::string value = text::trim(line.substr(colon + 1));
        rec.headers.emplace_back(key, value);
        if (text::iequals(key, "Content-Length")) {
            try {
                content_length = std::stoull(value);
            } catch (...) {
                content_length = std::string::npos;
            }
        }
    }
    if (content_length == std::string::npos)
        return resync("missing or invalid Content-Length");

    size_t payload_start = hdr_end + 4;
    if (payload_start + content_length > rest.size())
        return resync("payload extends past end of stream");
    rec.payload = std::string(rest.substr(payload_start, content_length));

    uint64_t after = offset + payload_start + content_length;
    // record separator CRLFCRLF (tolerate EOF right after payload)
    if (data.substr(after).starts_with("\r\n\r\n")) after += 4;
    *next_offset = after;
    return rec;
}

std::optional<WarcRecord> WarcFile::next() {
    uint64_t next = pos_;
    auto rec = parse_record(pos_, &next);
    if (rec) pos_ = next;
    return rec;
}

std::optional<WarcRecord> WarcFile::record_at(uint64_t offset) {
    uint64_t next = 0;
    return parse_record(offset, &next);
}

WarcWriter::WarcWriter(const std::string& path, bool gzip_members)
    : path_(path), gzip_(gzip_members) {}

WarcWriter::~WarcWriter() {
    try {
        close();
    } catch (...) {
    }
}

uint64_t WarcWriter::write_record(std::string_view type, std::string_view url,
                                  std::string_view content_type, std::string_view payload,
                                  std::string_view date) {
    std::string rec;
    rec.append("WARC/1.0\r\n");
    rec.append("WARC-Type: ").append(type).append("\r\n");
    // deterministic record id from content
    std::string id_key = std::string(type) + "|" + std::string(url) + "|" + std::string(payload);
    rec.append("WARC-Record-ID: <urn:uuid:").append(hashing::digest_hex(id_key)).append(">\r\n");
    rec.append("WARC-Date: ").append(date).append("\r\n");
    if (!url.empty()) rec.append("WARC-Target-URI: ").append(url).append("\r\n");
    if (!content_type.empty()) rec.append("Content-Type: ").append(content_type).append("\r\n");
    rec.append("Content-Length: ").append(std::to_string(payload.size())).append("\r\n");
    rec.append("\r\n");
    rec.append(payload);
    rec.append("\r\n\r\n");

    uint64_t record_offset = logical_;
    logical_ += rec.size();
    if (gzip_)
        out_.append(gzipio::compress(rec));
    else
        out_.append(rec);
    return record_offset;
}

uint64_t WarcWriter::write_warcinfo(std::string_view snapshot_id, std::string_view date) {
    std::string payload = "software: mathcrawl fixture writer\r\nisPartOf: " +
                          std::string(snapshot_id) + "\r\n";
    return write_record("warcinfo", "", "application/warc-fields", payload, date);
}

uint64_t WarcWriter::write_response(std::string_view url, std::string_view http_payload,
                                    std::string_view date) {
    return write_record("response", url, "application/http; msgtype=response", http_payload,
                        date);
}

uint64_t WarcWriter::write_request(std::string_view url, std::string_view http_payload,
                                   std::string_view date) {
    return write_record("request", url, "application/http; msgtype=request", http_payload, date);
}

uint64_t WarcWriter::write_metadata(std::string_view url, std::string_view payload,
                                    std::string_view date) {
    return write_record("metadata", url, "application/warc-fields", payload, date);
}

void WarcWriter::write_raw(std::string_view bytes) {
    logical_ += bytes.size();
    if (gzip_)
        out_.append(gzipio::compress(bytes));
    else
        out_.append(bytes);
}

void WarcWriter::close() {
    if (closed_) return;
    closed_ = true;
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write archive " + path_);
    f.write(out_.data(), static_cast<std::streamsize>(out_.size()));
}

std::string WarcWriter::http_response(std::string_view body, std::string_view content_type,
                                      bool gzip_body) {
    std::string payload_body =
        gzip_body ? gzipio::compress(body) : std::string(body);
    std::string p = "HTTP/1.1 200 OK\r\n";
    p.append("Content-Type: ").append(content_type).append("\r\n");
    if (gzip_body) p.append("Content-Encoding: gzip\r\n");
    p.append("Content-Length: ").append(std::to_string(payload_body.size())).append("\r\n");
    p.append("\r\n");
    p.append(payload_body);
    return p;
}

std::string HttpResponse::header(std::string_view name) const {
    for (const auto& [k, v] : headers)
        if (text::iequals(k, name)) return v;
    return {};
}

HttpResponse parse_http_response(std::string_view payload) {
    HttpResponse r;
    size_t hdr_end = payload.find("\r\n\r\n");
    if (hdr_end == std::string_view::npos || !payload.starts_with("HTTP/"))
        throw PayloadDecodeError("not an HTTP response payload");
    auto lines = text::split_lines(std::string(payload.substr(0, hdr_end)));
    {
        std::string status = lines[0];
        size_t sp = status.find(' ');
        if (sp != std::string::npos) {
            try {
                r.status = std::stoi(status.substr(sp + 1));
            } catch (...) {
                r.status = 0;
            }
        }
    }
    for (size_t i = 1; i < lines.size(); ++i) {
        std::string line = lines[i];
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t colon = line.find(':');
        if (colon == std::string::npos) continue;
        r.headers.emplace_back(text::trim(line.substr(0, colon)),
                               text::trim(line.substr(colon + 1)));
    }
    std::string body(payload.substr(hdr_end + 4));

    std::string te = text::to_lower(r.header("Transfer-Encoding"));
    if (te.find("chunked") != std::string::npos) body = dechunk(body);

    std::string ce = text::to_lower(r.header("Content-Encoding"));
    if (ce == "gzip" || ce == "x-gzip" || ce == "deflate") body = gzipio::decompress(body);

    r.body = std::move(body);
    return r;
}

std::string decode_charset(std::string_view body, std::string_view content_type_header) {
    std::string cs = charset_from(content_type_header);
    if (cs.empty()) cs = charset_from_meta(body);
    if (cs == "iso-8859-1" || cs == "latin-1" || cs == "latin1")
        return latin1_to_utf8(body, /*cp1252=*/false);
    if (cs == "windows-1252" || cs == "cp1252")
        return latin1_to_utf8(body, /*cp1252=*/true);
    // utf-8, us-ascii, unknown: UTF-8 with lossy replacement
    return utf8_lossy(body);
}

std::vector<WarcRecordRef> scan_archive(const std::string& archive_path,
                                        const UrlAllowList& allow_list,
                                        std::vector<std::string>* warnings) {
    WarcFile file(archive_path);
    std::vector<WarcRecordRef> refs;
    while (auto rec = file.next()) {
        if (!text::iequals(rec->type(), "response")) continue;
        std::string url = rec->target_uri();
        if (url.empty() || !allow_list.contains(url)) continue;
        refs.push_back(WarcRecordRef{archive_path, rec->offset, url, file.snapshot_id(),
                                     rec->header("WARC-Date")});
    }
    if (warnings)
        warnings->insert(warnings->end(), file.warnings().begin(), file.warnings().end());
    return refs;
}

Document load_document(const WarcRecordRef& ref) {
    WarcFile file(ref.archive_path);
    auto rec = file.record_at(ref.record_offset);
    if (!rec || !text::iequals(rec->type(), "response"))
        throw CorruptArchive(ref.archive_path, ref.record_offset,
                             "no response record at offset");
    HttpResponse http = parse_http_response(rec->payload);
    std::string html = decode_charset(http.body, http.header("Content-Type"));

    Document d;
    d.url = ref.target_url;
    d.snapshot_id = ref.snapshot_id;
    d.raw_html = std::move(html);
    d.fetch_time = ref.fetch_time;
    d.doc_id = Document::make_doc_id(d.url, d.snapshot_id, d.raw_html);
    return d;
}

std::vector<Document> scan_and_load(const std::string& archive_path,
                                    const UrlAllowList& allow_list,
                                    std::vector<std::string>* warnings) {
    auto refs = dedupe_by_fetch_time(scan_archive(archive_path, allow_list, warnings));
    std::vector<Document> docs;
    docs.reserve(refs.size());
    for (const auto& ref : refs) {
        try {
            docs.push_back(load_document(ref));
        } catch (const std::exception& e) {
            if (warnings)
                warnings->push_back("skipped " + ref.target_url + ": " + e.what());
        }
    }
    return docs;
}

std::vector<WarcRecordRef> dedupe_by_fetch_time(std::vector<WarcRecordRef> refs) {
    std::map<std::pair<std::string, std::string>, size_t> best;
    for (size_t i = 0; i < refs.size(); ++i) {
        auto key = std::make_pair(refs[i].target_url, refs[i].snapshot_id);
        auto it = best.find(key);
        // ISO-8601 timestamps compare lexicographically; ties keep the
        // later record in file order.
        if (it == best.end() || refs[i].fetch_time >= refs[it->second].fetch_time)
            best[key] = i;
    }
    std::vector<size_t> keep;
    keep.reserve(best.size());
    for (const auto& [k, idx] : best) keep.push_back(idx);
    std::sort(keep.begin(), keep.end());
    std::vector<WarcRecordRef> out;
    out.reserve(keep.size());
    for (size_t idx : keep) out.push_back(std::move(refs[idx]));
    return out;
}

}  // namespace mathcrawl::warc
