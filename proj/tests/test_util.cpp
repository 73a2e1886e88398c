#include <doctest.h>

#include <random>
#include <set>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/hashing.hpp"
#include "mathcrawl/textutil.hpp"
#include "mathcrawl/url.hpp"

using namespace mathcrawl;

TEST_CASE("hash64 is deterministic and seed-sensitive") {
    CHECK(hashing::hash64("abc", 1) == hashing::hash64("abc", 1));
    CHECK(hashing::hash64("abc", 1) != hashing::hash64("abc", 2));
    CHECK(hashing::hash64("abc", 1) != hashing::hash64("abd", 1));
    CHECK(hashing::hash64("", 0) != hashing::hash64(std::string_view("\0", 1), 0));
}

TEST_CASE("digest128 hex form") {
    auto d = hashing::digest_hex("hello");
    CHECK(d.size() == 32);
    CHECK(d == hashing::digest_hex("hello"));
    CHECK(d != hashing::digest_hex("hello "));
}

TEST_CASE("base64 known vectors and round trip") {
    CHECK(text::base64_encode("") == "");
    CHECK(text::base64_encode("f") == "Zg==");
    CHECK(text::base64_encode("fo") == "Zm8=");
    CHECK(text::base64_encode("foo") == "Zm9v");
    CHECK(text::base64_decode("Zm9v") == "foo");

    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        std::string bytes;
        size_t len = rng() % 200;
        for (size_t i = 0; i < len; ++i) bytes.push_back(static_cast<char>(rng() & 0xFF));
        CHECK(text::base64_decode(text::base64_encode(bytes)) == bytes);
    }
}

TEST_CASE("string helpers") {
    CHECK(text::collapse_whitespace("a  b\t\nc") == "a b c");
    CHECK(text::collapse_whitespace("  x  ") == "x");
    CHECK(text::trim(" \n x \t") == "x");
    CHECK(text::to_lower("AbC") == "abc");
    CHECK(text::starts_with_ci("Here is", "here IS"));
    auto paras = text::split_paragraphs("a\n\nb\n\n\nc");
    REQUIRE(paras.size() == 3);
    CHECK(paras[0] == "a");
    CHECK(paras[2] == "c");
}

// hand-built canonicalization fixture table
TEST_CASE("normalize_url fixture table") {
    struct Row {
        const char* input;
        UrlPolicy policy;
        const char* expected;
    };
    const Row rows[] = {
        {"HTTP://Example.com:80/a#x", UrlPolicy::canonical, "http://example.com/a"},
        {"http://example.com/a", UrlPolicy::exact, "http://example.com/a"},
        {"http://example.com/a?b=1", UrlPolicy::canonical, "http://example.com/a?b=1"},
        {"https://WWW.Example.COM:443/path", UrlPolicy::canonical,
         "https://www.example.com/path"},
        {"http://example.com", UrlPolicy::canonical, "http://example.com/"},
        {"http://example.com?q=1", UrlPolicy::canonical, "http://example.com/?q=1"},
        {"http://example.com:8080/x", UrlPolicy::canonical, "http://example.com:8080/x"},
        {"https://example.com:80/x", UrlPolicy::canonical, "https://example.com:80/x"},
        {"http://user:pw@example.com/x", UrlPolicy::canonical, "http://example.com/x"},
        {"http://example.com/a#frag#two", UrlPolicy::canonical, "http://example.com/a"},
        {"HTTPS://MATH.STACKEXCHANGE.COM/q/1", UrlPolicy::canonical,
         "https://math.stackexchange.com/q/1"},
        {"http://example.com/A/B", UrlPolicy::canonical, "http://example.com/A/B"},
        {"http://example.com/a?", UrlPolicy::canonical, "http://example.com/a?"},
        {"http://example.com/a?b=1#c", UrlPolicy::canonical, "http://example.com/a?b=1"},
        {"ftp://files.example.com/f.txt", UrlPolicy::canonical,
         "ftp://files.example.com/f.txt"},
        {"http://[::1]:80/x", UrlPolicy::canonical, "http://[::1]/x"},
        {"HTTP://A.B.C.example.com/", UrlPolicy::canonical, "http://a.b.c.example.com/"},
        {"http://example.com/%7Euser", UrlPolicy::canonical, "http://example.com/%7Euser"},
        {"HtTp://MiXeD.example.com:80/Q?x=Y#z", UrlPolicy::canonical,
         "http://mixed.example.com/Q?x=Y"},
        {"weird://Example.com:80/a", UrlPolicy::canonical, "weird://example.com:80/a"},
    };
    for (const auto& row : rows) {
        CAPTURE(row.input);
        CHECK(normalize_url(row.input, row.policy) == row.expected);
    }
}

TEST_CASE("normalize_url rejects malformed input") {
    CHECK_THROWS_AS(normalize_url("notaurl", UrlPolicy::canonical), MalformedUrl);
    CHECK_THROWS_AS(normalize_url("http://", UrlPolicy::canonical), MalformedUrl);
    CHECK_THROWS_AS(normalize_url("://missing", UrlPolicy::canonical), MalformedUrl);
    CHECK_THROWS_AS(normalize_url("http://host:notaport/x", UrlPolicy::canonical),
                    MalformedUrl);
}

TEST_CASE("canonical normalization is idempotent") {
    const char* urls[] = {
        "HTTP://Example.com:80/a#x", "https://WWW.Example.COM:443/path?q=1",
        "http://example.com",        "http://user:pw@example.com/x?a=b#c",
        "ftp://Files.example.com/",
    };
    for (const char* u : urls) {
        std::string once = normalize_url(u, UrlPolicy::canonical);
        CHECK(normalize_url(once, UrlPolicy::canonical) == once);
    }
}

TEST_CASE("domain_of") {
    CHECK(domain_of("http://mathhelpforum.com/x") == "mathhelpforum.com");
    CHECK(domain_of("https://www.example.com/") == "example.com");
    CHECK(domain_of("http://math.stackexchange.com/q/1") == "math.stackexchange.com");
    CHECK(domain_of("http://Example.COM:8080/x") == "example.com");
    CHECK_THROWS_AS(domain_of("nope"), MalformedUrl);
}
