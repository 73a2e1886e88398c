#include <doctest.h>

#include <random>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/scoring.hpp"

using namespace mathcrawl;

namespace {

Document scored_doc(const std::string& id, int score) {
    Document d;
    d.doc_id = id;
    d.url = "http://s.example.com/" + id;
    d.snapshot_id = "CC-MAIN-2021-31";
    d.cleaned_text = "text " + id;
    d.quality_score = score;
    return d;
}

// n display equations and enough prose to hit a word target
std::string synthetic_page(int display_eqs, int words) {
    std::string text;
    for (int i = 0; i < display_eqs; ++i)
        text += "\\[ x_" + std::to_string(i) + " = " + std::to_string(i) + " \\]\n\n";
    int remaining = words - display_eqs * 4;  // each equation contributes ~4 words
    for (int i = 0; i < remaining; ++i) text += "word" + std::to_string(i) + " ";
    return text;
}

}  // namespace

TEST_CASE("math_stats counts equations and words") {
    auto s = scoring::math_stats("intro \\[a\\] mid \\(b\\) $c$ tail");
    CHECK(s.display_equations == 1);
    CHECK(s.inline_equations == 2);
    CHECK(s.words >= 4);

    auto s2 = scoring::math_stats("$$E=mc^2$$");
    CHECK(s2.display_equations == 1);
}

// rubric fixture labels computed from the documented bands by hand
TEST_CASE("heuristic scorer rubric") {
    scoring::HeuristicScorer scorer;
    // >=5 display equations and >=300 words: band 4
    CHECK(scorer.score(synthetic_page(5, 320)) == 4);
    // band 5: >=10 display, >=500 words, >=5% math bytes
    CHECK(scorer.score(synthetic_page(12, 520)) == 5);
    // 3 equations, 160 words: band 3
    CHECK(scorer.score(synthetic_page(3, 160)) == 3);
    // some math, short: band 2
    CHECK(scorer.score("tiny $x$ note") == 2);
    // no math: band 1
    CHECK(scorer.score("just words here with no formulas at all") == 1);
}

TEST_CASE("spec example: five display equations and 300+ words score at least 4") {
    scoring::HeuristicScorer scorer;
    CHECK(scorer.score(synthetic_page(5, 340)) >= 4);
}

TEST_CASE("score_document preconditions and determinism") {
    scoring::HeuristicScorer scorer;
    Document d = scored_doc("a", 0);
    d.quality_score.reset();
    d.cleaned_text = synthetic_page(5, 320);
    auto q1 = scoring::score_document(d, scorer);
    auto q2 = scoring::score_document(d, scorer);
    CHECK(q1.score == q2.score);
    CHECK(q1.scorer_id == "heuristic-v1");

    Document empty = d;
    empty.cleaned_text = "";
    CHECK_THROWS_AS(scoring::score_document(empty, scorer), std::invalid_argument);

    Document sentinel = d;
    sentinel.flags.insert(flags::kNoUsefulContent);
    CHECK_THROWS_AS(scoring::score_document(sentinel, scorer), std::invalid_argument);
}

TEST_CASE("materialize_subset filter semantics") {
    std::vector<Document> corpus = {scored_doc("a", 1), scored_doc("b", 3),
                                    scored_doc("c", 4), scored_doc("d", 5)};
    auto four_plus = scoring::materialize_subset(corpus, {"4plus", 4});
    REQUIRE(four_plus.size() == 2);
    CHECK(four_plus[0].doc_id == "c");
    CHECK(four_plus[1].doc_id == "d");

    CHECK(scoring::materialize_subset(corpus, {"all", 1}).size() == corpus.size());

    std::vector<Document> threes = {scored_doc("x", 3), scored_doc("y", 3),
                                    scored_doc("z", 3)};
    CHECK(scoring::materialize_subset(threes, {"4plus", 4}).empty());

    std::vector<Document> unscored = {scored_doc("u", 3)};
    unscored[0].quality_score.reset();
    CHECK_THROWS_AS(scoring::materialize_subset(unscored, {"3plus", 3}), UnscoredDocument);
}

TEST_CASE("subset nesting and score partition") {
    std::mt19937_64 rng(3);
    std::vector<Document> corpus;
    for (int i = 0; i < 200; ++i)
        corpus.push_back(scored_doc("d" + std::to_string(i), 1 + static_cast<int>(rng() % 5)));

    auto three_plus = scoring::materialize_subset(corpus, {"3plus", 3});
    auto four_plus = scoring::materialize_subset(corpus, {"4plus", 4});

    std::set<std::string> three_ids;
    for (const auto& d : three_plus) three_ids.insert(d.doc_id);
    for (const auto& d : four_plus) CHECK(three_ids.count(d.doc_id) == 1);

    size_t band_counts[6] = {0, 0, 0, 0, 0, 0};
    for (const auto& d : corpus) band_counts[*d.quality_score] += 1;
    size_t total = 0;
    for (int s = 1; s <= 5; ++s) total += band_counts[s];
    CHECK(total == corpus.size());
    CHECK(three_plus.size() == band_counts[3] + band_counts[4] + band_counts[5]);
    CHECK(four_plus.size() == band_counts[4] + band_counts[5]);
}
