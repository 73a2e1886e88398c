#include <doctest.h>

#include <fstream>
#include <random>
#include <unordered_set>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/gzipio.hpp"
#include "mathcrawl/warc.hpp"
#include "testsupport.hpp"

using namespace mathcrawl;
using testsupport::TempDir;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// Five records (warcinfo, request, 3 responses), two responses allowed.
struct Fixture {
    std::string archive;
    uint64_t offset_a = 0, offset_b = 0, offset_c = 0;

    explicit Fixture(const TempDir& dir, bool gzip) {
        archive = dir.file(gzip ? "fx.warc.gz" : "fx.warc");
        warc::WarcWriter w(archive, gzip);
        w.write_warcinfo("CC-MAIN-2021-31");
        w.write_request("http://a.example.com/page",
                        "GET /page HTTP/1.1\r\nHost: a.example.com\r\n\r\n");
        offset_a = w.write_response("http://a.example.com/page",
                                    warc::WarcWriter::http_response("<html>alpha</html>"),
                                    "2021-07-01T00:00:00Z");
        offset_b = w.write_response("http://b.example.com/other",
                                    warc::WarcWriter::http_response("<html>beta</html>"),
                                    "2021-07-02T00:00:00Z");
        offset_c = w.write_response("http://c.example.com/skip",
                                    warc::WarcWriter::http_response("<html>gamma</html>"),
                                    "2021-07-03T00:00:00Z");
        w.close();
    }
};

}  // namespace

TEST_CASE("allow-list file loading with comments") {
    TempDir dir("allow");
    write_file(dir.file("urls.txt"),
               "# comment line\n"
               "http://a.example.com/page\n"
               "\n"
               "HTTP://B.example.com:80/other  # trailing comment\n");
    auto list = UrlAllowList::load(dir.file("urls.txt"));
    CHECK(list.size() == 2);
    CHECK(list.contains("http://a.example.com/page"));
    CHECK(list.contains("http://b.example.com/other#frag"));  // canonical match
    CHECK_FALSE(list.contains("http://c.example.com/skip"));
    CHECK_FALSE(list.contains("not a url"));
}

TEST_CASE("scan_archive finds exactly the allowed responses with writer offsets") {
    for (bool gzip : {false, true}) {
        CAPTURE(gzip);
        TempDir dir("scan");
        Fixture fx(dir, gzip);

        UrlAllowList allow;
        allow.add("http://a.example.com/page");
        allow.add("http://b.example.com/other");

        auto refs = warc::scan_archive(fx.archive, allow);
        REQUIRE(refs.size() == 2);
        CHECK(refs[0].record_offset == fx.offset_a);
        CHECK(refs[0].target_url == "http://a.example.com/page");
        CHECK(refs[0].snapshot_id == "CC-MAIN-2021-31");
        CHECK(refs[0].fetch_time == "2021-07-01T00:00:00Z");
        CHECK(refs[1].record_offset == fx.offset_b);
        CHECK(refs[1].target_url == "http://b.example.com/other");

        // determinism: re-scan yields an identical stream
        auto refs2 = warc::scan_archive(fx.archive, allow);
        REQUIRE(refs2.size() == refs.size());
        for (size_t i = 0; i < refs.size(); ++i) {
            CHECK(refs2[i].record_offset == refs[i].record_offset);
            CHECK(refs2[i].target_url == refs[i].target_url);
        }
    }
}

TEST_CASE("scan_archive with empty allow-list yields empty stream") {
    TempDir dir("scan0");
    Fixture fx(dir, true);
    UrlAllowList allow;
    CHECK(warc::scan_archive(fx.archive, allow).empty());
}

TEST_CASE("load_document decodes a gzip-encoded payload body") {
    TempDir dir("gzload");
    std::string body = "<html><body>compressed \xCF\x80 payload</body></html>";
    std::string archive = dir.file("gz.warc.gz");
    uint64_t offset;
    {
        warc::WarcWriter w(archive, true);
        w.write_warcinfo("CC-MAIN-2020-05");
        offset = w.write_response(
            "http://x.example.com/gz",
            warc::WarcWriter::http_response(body, "text/html; charset=utf-8",
                                            /*gzip_body=*/true),
            "2020-01-15T12:00:00Z");
        w.close();
    }
    warc::WarcRecordRef ref{archive, offset, "http://x.example.com/gz", "CC-MAIN-2020-05",
                            "2020-01-15T12:00:00Z"};
    Document doc = warc::load_document(ref);
    CHECK(doc.raw_html == body);
    CHECK(doc.url == "http://x.example.com/gz");
    CHECK(doc.snapshot_id == "CC-MAIN-2020-05");
    CHECK_FALSE(doc.doc_id.empty());

    // determinism of doc_id
    Document again = warc::load_document(ref);
    CHECK(again.doc_id == doc.doc_id);
}

TEST_CASE("load_document on an empty payload body") {
    TempDir dir("empty");
    std::string archive = dir.file("e.warc");
    uint64_t offset;
    {
        warc::WarcWriter w(archive, false);
        offset = w.write_response("http://e.example.com/",
                                  warc::WarcWriter::http_response(""));
        w.close();
    }
    warc::WarcRecordRef ref{archive, offset, "http://e.example.com/", "unknown", ""};
    Document doc = warc::load_document(ref);
    CHECK(doc.raw_html.empty());
}

TEST_CASE("chunked transfer encoding is decoded") {
    TempDir dir("chunked");
    std::string archive = dir.file("c.warc");
    std::string payload =
        "HTTP/1.1 200 OK\r\n"
        "Content-Type: text/html\r\n"
        "Transfer-Encoding: chunked\r\n"
        "\r\n"
        "5\r\nhello\r\n"
        "6\r\n world\r\n"
        "0\r\n\r\n";
    uint64_t offset;
    {
        warc::WarcWriter w(archive, false);
        offset = w.write_response("http://ch.example.com/", payload);
        w.close();
    }
    warc::WarcRecordRef ref{archive, offset, "http://ch.example.com/", "unknown", ""};
    CHECK(warc::load_document(ref).raw_html == "hello world");
}

TEST_CASE("charset detection: latin-1 from header, meta fallback") {
    std::string latin = "caf\xE9";  // 0xE9 = e-acute in latin-1
    CHECK(warc::decode_charset(latin, "text/html; charset=iso-8859-1") == "caf\xC3\xA9");
    std::string with_meta = "<meta charset=\"windows-1252\"><p>caf\xE9</p>";
    CHECK(warc::decode_charset(with_meta, "text/html").find("caf\xC3\xA9") !=
          std::string::npos);
    // invalid utf-8 bytes are replaced, not dropped
    std::string bad = "ok\xFF!";
    std::string decoded = warc::decode_charset(bad, "text/html; charset=utf-8");
    CHECK(decoded.find("ok") == 0);
    CHECK(decoded.find("\xEF\xBF\xBD") != std::string::npos);
    CHECK(decoded.find('!') != std::string::npos);
}

TEST_CASE("corrupt framing: scanner resyncs at the next record boundary") {
    TempDir dir("corrupt");
    std::string archive = dir.file("bad.warc");
    uint64_t good_offset;
    {
        warc::WarcWriter w(archive, false);
        w.write_raw("GARBAGE NOT A RECORD\r\n\r\n");
        good_offset = w.write_response("http://ok.example.com/",
                                       warc::WarcWriter::http_response("<html>ok</html>"));
        w.close();
    }
    UrlAllowList allow;
    allow.add("http://ok.example.com/");
    std::vector<std::string> warnings;
    auto refs = warc::scan_archive(archive, allow, &warnings);
    REQUIRE(refs.size() == 1);
    CHECK(refs[0].record_offset == good_offset);
    CHECK_FALSE(warnings.empty());
}

TEST_CASE("corrupt framing: unresyncable file aborts") {
    TempDir dir("abort");
    std::string archive = dir.file("junk.warc");
    write_file(archive, "WARC/1.0\r\nbroken header without terminator");
    UrlAllowList allow;
    allow.add("http://x.example.com/");
    CHECK_THROWS_AS(warc::scan_archive(archive, allow), CorruptArchive);
}

TEST_CASE("dedupe_by_fetch_time keeps the latest record per (url, snapshot)") {
    std::vector<warc::WarcRecordRef> refs = {
        {"a.warc", 0, "http://u.example.com/", "CC-MAIN-2021-31", "2021-07-01T00:00:00Z"},
        {"a.warc", 100, "http://u.example.com/", "CC-MAIN-2021-31", "2021-07-09T00:00:00Z"},
        {"a.warc", 200, "http://u.example.com/", "CC-MAIN-2020-05", "2020-01-01T00:00:00Z"},
        {"a.warc", 300, "http://v.example.com/", "CC-MAIN-2021-31", "2021-07-01T00:00:00Z"},
    };
    auto kept = warc::dedupe_by_fetch_time(refs);
    REQUIRE(kept.size() == 3);
    bool saw_late = false;
    for (const auto& r : kept)
        if (r.record_offset == 100) saw_late = true;
    CHECK(saw_late);
}

TEST_CASE("scan_and_load end to end") {
    TempDir dir("sal");
    Fixture fx(dir, true);
    UrlAllowList allow;
    allow.add("http://a.example.com/page");
    allow.add("http://b.example.com/other");
    auto docs = warc::scan_and_load(fx.archive, allow);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].raw_html == "<html>alpha</html>");
    CHECK(docs[1].raw_html == "<html>beta</html>");
    CHECK(docs[0].doc_id != docs[1].doc_id);
}

TEST_CASE("doc_id: distinct (url, snapshot, payload) triples stay distinct") {
    std::mt19937_64 rng(42);
    std::unordered_set<std::string> seen;
    const int n = 100000;
    seen.reserve(n * 2);
    for (int i = 0; i < n; ++i) {
        std::string url = "http://d" + std::to_string(i % 977) + ".example.com/p" +
                          std::to_string(i);
        std::string snapshot = "CC-MAIN-20" + std::to_string(14 + (i % 11)) + "-01";
        std::string payload = "payload-" + std::to_string(rng());
        auto [it, inserted] = seen.insert(Document::make_doc_id(url, snapshot, payload));
        REQUIRE(inserted);
    }
    CHECK(seen.size() == static_cast<size_t>(n));
}

TEST_CASE("document jsonl round trip") {
    Document d;
    d.url = "http://x.example.com/";
    d.snapshot_id = "CC-MAIN-2021-31";
    d.raw_html = std::string("\x00\x01<html>\xFF", 9);
    d.doc_id = Document::make_doc_id(d.url, d.snapshot_id, d.raw_html);
    d.rendered_text = "text";
    d.quality_score = 4;
    d.flags.insert(flags::kDuplicate);
    Document back = Document::from_jsonl(d.to_jsonl());
    CHECK(back.doc_id == d.doc_id);
    CHECK(back.raw_html == d.raw_html);
    CHECK(back.rendered_text == d.rendered_text);
    CHECK(back.quality_score == d.quality_score);
    CHECK(back.has_flag(flags::kDuplicate));
}
