#include <doctest.h>

#include "ragtuner/text.hpp"

using namespace ragtuner;

TEST_CASE("whitespace tokens are maximal non-space runs") {
    auto tokens = text::whitespace_tokens("  the cat\tsat\n on  a mat ");
    CHECK(tokens == std::vector<std::string>{"the", "cat", "sat", "on", "a", "mat"});
    CHECK(text::whitespace_tokens("").empty());
    CHECK(text::whitespace_tokens("   \n\t").empty());
}

TEST_CASE("token spans preserve character offsets") {
    std::string s = "ab  cd";
    auto spans = text::token_spans(s);
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].begin == 0);
    CHECK(spans[0].end == 2);
    CHECK(spans[1].begin == 4);
    CHECK(spans[1].end == 6);
}

TEST_CASE("normalization lowercases and strips punctuation") {
    CHECK(text::normalize_token("Par-is!") == "paris");
    CHECK(text::normalized_tokens("The CAT, sat.") ==
          std::vector<std::string>{"the", "cat", "sat"});
    // articles removed only by the answer convention
    CHECK(text::answer_tokens("The CAT, sat.") == std::vector<std::string>{"cat", "sat"});
    CHECK(text::answer_tokens("a an the").empty());
}

TEST_CASE("sentence splitting") {
    auto got = text::split_sentences("One ends here. Two!  And three");
    REQUIRE(got.size() == 3);
    CHECK(got[0] == "One ends here.");
    CHECK(got[1] == "Two!");
    CHECK(got[2] == "And three");
    CHECK(text::split_sentences("").empty());
}

TEST_CASE("capitalized runs group adjacent capitalized words") {
    auto runs = text::capitalized_runs("Where is New York City compared to Boston?");
    REQUIRE(runs.size() == 3);
    CHECK(runs[0] == "Where");
    CHECK(runs[1] == "New York City");
    CHECK(runs[2] == "Boston");
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(text::fnv1a64("") == 14695981039346656037ULL);
    CHECK(text::fnv1a64("a") == text::fnv1a64("a"));
    CHECK(text::fnv1a64("a") != text::fnv1a64("b"));
}
