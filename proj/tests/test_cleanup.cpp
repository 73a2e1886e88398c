#include <doctest.h>

#include <random>

#include "mathcrawl/cleanup.hpp"
#include "mathcrawl/errors.hpp"
#include "mathcrawl/hashing.hpp"

using namespace mathcrawl;
using render::MathForm;
using render::MathRegion;

namespace {

Document doc_with_rendered(std::string text) {
    Document d;
    d.doc_id = "doc-test";
    d.url = "http://t.example.com/";
    d.snapshot_id = "CC-MAIN-2021-31";
    d.rendered_text = std::move(text);
    return d;
}

MathRegion region(MathForm form, size_t begin, size_t end, std::string payload,
                  bool display = false) {
    MathRegion r;
    r.form = form;
    r.begin = begin;
    r.end = end;
    r.payload = std::move(payload);
    r.display = display;
    return r;
}

// frozen digest of the checked-in prompt template
constexpr const char* kGoldenPromptDigest = "adb10bfaca3d0285b367415f0bc38480";

}  // namespace

TEST_CASE("prompt template digest matches the golden value") {
    CHECK(hashing::digest_hex(cleanup::kPromptTemplate) == kGoldenPromptDigest);
}

TEST_CASE("build_cleanup_prompt substitutes once") {
    std::string p = cleanup::build_cleanup_prompt("x");
    CHECK(p.find("Retain only the main content and its associated titles") !=
          std::string::npos);
    CHECK(p.find("NO USEFUL CONTENT") != std::string::npos);
    CHECK(p.find("\nx\n") != std::string::npos);
    CHECK(p.find("{text}") == std::string::npos);

    // structural bit-exactness: prefix + text + suffix
    size_t ph = cleanup::kPromptTemplate.find("{text}");
    std::string expected;
    expected.append(cleanup::kPromptTemplate.substr(0, ph));
    expected.append("x");
    expected.append(cleanup::kPromptTemplate.substr(ph + 6));
    CHECK(p == expected);
}

// single-pass substitution: braces in user text are not re-expanded
TEST_CASE("substitution is single-pass") {
    struct Row {
        const char* input;
        const char* must_contain;
    };
    const Row rows[] = {
        {"see {text} here", "see {text} here"},
        {"{text}", "\n{text}\n"},
        {"a{text}b", "a{text}b"},
        {"{a}{b}", "{a}{b}"},
        {"nested {{text}}", "nested {{text}}"},
    };
    for (const auto& row : rows) {
        CAPTURE(row.input);
        std::string p = cleanup::build_cleanup_prompt(row.input);
        CHECK(p.find(row.must_contain) != std::string::npos);
        // exactly one copy of the user text; the placeholder is gone
        size_t count = 0;
        for (size_t pos = 0; (pos = p.find(row.input, pos)) != std::string::npos; ++pos)
            ++count;
        CHECK(count == 1);
    }
    CHECK_THROWS_AS(cleanup::build_cleanup_prompt(""), EmptyInput);
}

TEST_CASE("sentinel detection") {
    CHECK(cleanup::is_sentinel("NO USEFUL CONTENT"));
    CHECK(cleanup::is_sentinel("  NO USEFUL CONTENT \n"));
    CHECK(cleanup::is_sentinel("\"NO USEFUL CONTENT\""));
    CHECK_FALSE(cleanup::is_sentinel("no useful content"));
    CHECK_FALSE(cleanup::is_sentinel("NO USEFUL CONTENT, mostly"));
}

TEST_CASE("framing phrase detection") {
    CHECK(cleanup::has_framing_phrase("Here is the cleaned content: x"));
    CHECK(cleanup::has_framing_phrase("  Processed output:"));
    CHECK_FALSE(cleanup::has_framing_phrase("The heat equation"));
}

TEST_CASE("paragraph chunking") {
    CHECK(cleanup::chunk_paragraphs("short", 100).size() == 1);

    std::string a(40, 'a'), b(40, 'b'), c(40, 'c');
    auto chunks = cleanup::chunk_paragraphs(a + "\n\n" + b + "\n\n" + c, 90);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0] == a + "\n\n" + b);
    CHECK(chunks[1] == c);

    // an oversized single paragraph is hard-split
    auto hard = cleanup::chunk_paragraphs(std::string(250, 'z'), 100);
    REQUIRE(hard.size() == 3);
    CHECK(hard[0].size() == 100);
    CHECK(hard[2].size() == 50);
}

TEST_CASE("clean_document with an echo endpoint") {
    // echoes back exactly the {text} slice of the prompt
    LambdaEndpoint echo("echo-model", [](const std::string& prompt) {
        size_t ph = cleanup::kPromptTemplate.find("{text}");
        std::string prefix(cleanup::kPromptTemplate.substr(0, ph));
        std::string suffix(cleanup::kPromptTemplate.substr(ph + 6));
        return prompt.substr(prefix.size(), prompt.size() - prefix.size() - suffix.size());
    });

    auto doc = doc_with_rendered("The quadratic formula solves ax^2+bx+c=0.");
    auto res = cleanup::clean_document(doc, echo);
    CHECK(res.cleaned_text == *doc.rendered_text);
    CHECK(res.chunk_count == 1);
    CHECK(res.model_id == "echo-model");
    CHECK_FALSE(res.no_useful_content);
    CHECK_FALSE(res.stage_incomplete);

    // multi-chunk documents re-join with double newlines
    std::string para1(30, 'p'), para2(30, 'q');
    cleanup::CleanupOptions small_opts;
    small_opts.max_input_chars = 40;
    auto doc2 = doc_with_rendered(para1 + "\n\n" + para2);
    auto res2 = cleanup::clean_document(doc2, echo, small_opts);
    CHECK(res2.chunk_count == 2);
    CHECK(res2.cleaned_text == para1 + "\n\n" + para2);

    // code fences survive byte-exact through the echo contract
    std::string fenced = "Intro\n\n```python\ndef f(x):\n    return x\n```\n\nOutro";
    auto doc3 = doc_with_rendered(fenced);
    auto res3 = cleanup::clean_document(doc3, echo);
    CHECK(res3.cleaned_text.find("```python\ndef f(x):\n    return x\n```") !=
          std::string::npos);
}

TEST_CASE("sentinel responses flag no_useful_content") {
    LambdaEndpoint nav_detector("mock", [](const std::string&) {
        return std::string("NO USEFUL CONTENT");
    });
    auto doc = doc_with_rendered("Home About Contact Privacy");
    auto res = cleanup::clean_document(doc, nav_detector);
    CHECK(res.no_useful_content);
    CHECK(res.cleaned_text.empty());

    Document d2 = doc;
    cleanup::apply_cleanup(d2, res);
    CHECK(d2.has_flag(flags::kNoUsefulContent));
    CHECK(d2.cleaned_text.has_value());
    CHECK(d2.cleaned_text->empty());
}

TEST_CASE("framing-phrase responses get one retry") {
    int calls = 0;
    LambdaEndpoint flaky("mock", [&calls](const std::string&) -> std::string {
        ++calls;
        return calls == 1 ? "Here is the cleaned content: GOOD" : "GOOD";
    });
    auto doc = doc_with_rendered("body text");
    auto res = cleanup::clean_document(doc, flaky);
    CHECK(calls == 2);
    CHECK(res.cleaned_text == "GOOD");
    CHECK_FALSE(res.stage_incomplete);

    LambdaEndpoint always_framing("mock", [](const std::string&) {
        return std::string("Processed output: X");
    });
    auto res2 = cleanup::clean_document(doc, always_framing);
    CHECK(res2.stage_incomplete);
}

TEST_CASE("endpoint failure flags stage_incomplete and continues") {
    LambdaEndpoint down("mock", [](const std::string&) -> std::string {
        throw EndpointUnavailable("connection refused");
    });
    auto doc = doc_with_rendered("body text");
    auto res = cleanup::clean_document(doc, down);
    CHECK(res.stage_incomplete);
    CHECK_FALSE(res.no_useful_content);
}

// conduction sample: lynx-style shortcodes come out as standard TeX
TEST_CASE("cleanup maps the conduction sample to standard TeX") {
    std::string rendered =
        "Determine which equations to use. The rate of heat transfer by conduction is\n\n"
        "[latex]\\frac{Q}{t} = \\frac{kA(T_2-T_1)}{d}[/latex]";
    std::string cleaned_golden =
        "Determine which equations to use. The rate of heat transfer by conduction is\n\n"
        "\\[\n\\frac{Q}{t} = \\frac{kA(T_2-T_1)}{d}.\n\\]";
    LambdaEndpoint cleaner("mock-phi", [&](const std::string& prompt) -> std::string {
        if (prompt.find("[latex]") != std::string::npos) return cleaned_golden;
        return "NO USEFUL CONTENT";
    });
    auto doc = doc_with_rendered(rendered);
    auto res = cleanup::clean_document(doc, cleaner);
    CHECK(res.cleaned_text.find("\\frac{kA(T_2-T_1)}{d}") != std::string::npos);
    CHECK(res.cleaned_text.find("[latex") == std::string::npos);
}

// symbol table authored first; outputs checked against it
TEST_CASE("unicode symbol table") {
    struct Row {
        const char* input;
        const char* expected;
    };
    const Row rows[] = {
        {"x \xC3\x97 y \xE2\x89\xA4 z", "x \\times y \\leq z"},
        {"3\xC3\x97"
         "4",
         "3\\times 4"},
        {"90\xC2\xB0", "90^\\circ"},
        {"\xCF\x80", "\\pi"},
        {"a\xE2\x88\x92"
         "b",
         "a-b"},
        {"\xE2\x88\x9A"
         "2",
         "\\sqrt 2"},
        {"p \xC2\xB1 q", "p \\pm q"},
        {"x\xC2\xB2 + y\xC2\xB3", "x^2 + y^3"},
        {"plain ascii", "plain ascii"},
    };
    for (const auto& row : rows) {
        CAPTURE(row.input);
        CHECK(cleanup::tex_escape_unicode_math(row.input) == row.expected);
    }
}

TEST_CASE("fallback_normalize rewrites regions in place") {
    // one shortcode region
    std::string text = "before [latex]\\boldsymbol{=}[/latex] after";
    auto regions = render::extract_shortcode_math(text);
    REQUIRE(regions.size() == 1);
    CHECK(cleanup::fallback_normalize(text, regions) ==
          "before \\( \\boldsymbol{=} \\) after");

    // display regions use \[ \]
    std::string text2 = "x";
    std::vector<MathRegion> regs2 = {region(MathForm::script_tex, 0, 1, "x", true)};
    CHECK(cleanup::fallback_normalize(text2, regs2) == "\\[ x \\]");

    // unicode symbols are mapped inside rewritten regions
    std::string text3 = "x \xC3\x97 y \xE2\x89\xA4 z";
    std::vector<MathRegion> regs3 = {
        region(MathForm::unicode_math, 0, text3.size(), text3)};
    CHECK(cleanup::fallback_normalize(text3, regs3) == "\\( x \\times y \\leq z \\)");

    // empty region list: identity
    CHECK(cleanup::fallback_normalize("unchanged", {}) == "unchanged");

    // dollar regions are left alone
    std::string text4 = "$x$";
    std::vector<MathRegion> regs4 = {region(MathForm::dollar_inline, 0, 3, "x")};
    CHECK(cleanup::fallback_normalize(text4, regs4) == "$x$");
}

TEST_CASE("fallback_normalize keeps bytes outside regions bit-identical") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t) {
        // random text with two marked regions
        std::string pre(rng() % 40, 'a');
        std::string mid(rng() % 40, 'b');
        std::string post(rng() % 40, 'c');
        std::string r1 = "R1", r2 = "R2";
        std::string text = pre + r1 + mid + r2 + post;
        std::vector<MathRegion> regions = {
            region(MathForm::shortcode, pre.size(), pre.size() + r1.size(), r1),
            region(MathForm::script_tex, pre.size() + r1.size() + mid.size(),
                   pre.size() + r1.size() + mid.size() + r2.size(), r2),
        };
        std::string out = cleanup::fallback_normalize(text, regions);
        CHECK(out == pre + "\\( R1 \\)" + mid + "\\( R2 \\)" + post);
    }
}
