#include "ragtuner/components/chunker.hpp"

#include <cmath>
#include <stdexcept>

#include "ragtuner/text.hpp"

namespace ragtuner::components {

std::vector<ChunkSpan> chunk_spans(std::string_view text, std::size_t chunk_size,
                                   double overlap_ratio) {
    if (chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");
    if (overlap_ratio < 0.0 || overlap_ratio >= 1.0) {
        throw std::invalid_argument("overlap_ratio must be in [0, 1)");
    }
    auto tokens = text::token_spans(text);
    std::vector<ChunkSpan> out;
    if (tokens.empty()) return out;

    const std::size_t n = tokens.size();
    const auto stride = static_cast<std::size_t>(
        std::max(1.0, std::floor(static_cast<double>(chunk_size) * (1.0 - overlap_ratio))));
    for (std::size_t start = 0;; start += stride) {
        std::size_t end = std::min(start + chunk_size, n);
        out.push_back({start, end, tokens[start].begin, tokens[end - 1].end});
        if (end == n) break;
    }
    return out;
}

std::string chunk_text(std::string_view text, const ChunkSpan& span) {
    return std::string(text.substr(span.begin_char, span.end_char - span.begin_char));
}

}  // namespace ragtuner::components
