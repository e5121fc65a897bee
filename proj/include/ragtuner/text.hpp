#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ragtuner::text {

/// A whitespace-delimited token with its character span in the source text.
struct TokenSpan {
    std::size_t begin = 0;  // first char
    std::size_t end = 0;    // one past last char
};

/// Maximal runs of non-whitespace characters, in order.
std::vector<TokenSpan> token_spans(std::string_view s);

std::vector<std::string> whitespace_tokens(std::string_view s);

/// Lowercase and strip non-alphanumeric characters; "" when nothing survives.
std::string normalize_token(std::string_view token);

/// Lowercased, punctuation-stripped tokens; empty results dropped.
std::vector<std::string> normalized_tokens(std::string_view s);

/// normalized_tokens with the articles a/an/the removed (QA answer convention).
std::vector<std::string> answer_tokens(std::string_view s);

/// Split into sentences on '.', '!' or '?' boundaries; trimmed, empty dropped.
std::vector<std::string> split_sentences(std::string_view s);

/// Runs of capitalized words ("New York City" -> one run), used as entity
/// surface candidates when no structured pattern is present.
std::vector<std::string> capitalized_runs(std::string_view s);

// Deterministic 64-bit hashing (std::hash is implementation-defined).
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ragtuner::text
