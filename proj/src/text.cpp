#include "ragtuner/text.hpp"

#include <cctype>

namespace ragtuner::text {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_alnum(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

char to_lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool is_upper(char c) {
    return std::isupper(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::vector<TokenSpan> token_spans(std::string_view s) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        if (i >= s.size()) break;
        std::size_t begin = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        spans.push_back({begin, i});
    }
    return spans;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    for (const auto& span : token_spans(s)) {
        tokens.emplace_back(s.substr(span.begin, span.end - span.begin));
    }
    return tokens;
}

std::string normalize_token(std::string_view token) {
    std::string out;
    out.reserve(token.size());
    for (char c : token) {
        if (is_alnum(c)) out.push_back(to_lower(c));
    }
    return out;
}

std::vector<std::string> normalized_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    for (const auto& span : token_spans(s)) {
        std::string norm = normalize_token(s.substr(span.begin, span.end - span.begin));
        if (!norm.empty()) tokens.push_back(std::move(norm));
    }
    return tokens;
}

std::vector<std::string> answer_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    for (auto& tok : normalized_tokens(s)) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.' || c == '!' || c == '?') {
            std::size_t end = i + 1;
            std::size_t b = start;
            while (b < end && is_space(s[b])) ++b;
            if (b < end) sentences.emplace_back(s.substr(b, end - b));
            start = end;
        }
    }
    std::size_t b = start;
    while (b < s.size() && is_space(s[b])) ++b;
    std::size_t e = s.size();
    while (e > b && is_space(s[e - 1])) --e;
    if (e > b) sentences.emplace_back(s.substr(b, e - b));
    return sentences;
}

std::vector<std::string> capitalized_runs(std::string_view s) {
    std::vector<std::string> runs;
    std::string current;
    for (const auto& span : token_spans(s)) {
        std::string_view tok = s.substr(span.begin, span.end - span.begin);
        // Strip surrounding punctuation before testing the first letter.
        std::size_t lo = 0, hi = tok.size();
        while (lo < hi && !is_alnum(tok[lo])) ++lo;
        while (hi > lo && !is_alnum(tok[hi - 1])) --hi;
        std::string_view word = tok.substr(lo, hi - lo);
        bool capitalized = !word.empty() && is_upper(word.front());
        bool run_ends_here = hi != tok.size();  // trailing punctuation closes a run
        if (capitalized) {
            if (!current.empty()) current.push_back(' ');
            current.append(word);
            if (run_ends_here) {
                runs.push_back(std::move(current));
                current.clear();
            }
        } else if (!current.empty()) {
            runs.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) runs.push_back(std::move(current));
    return runs;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace ragtuner::text
