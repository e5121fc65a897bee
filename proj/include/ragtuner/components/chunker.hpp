#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ragtuner::components {

struct ChunkSpan {
    std::size_t start_token = 0;
    std::size_t end_token = 0;  // exclusive
    std::size_t begin_char = 0;
    std::size_t end_char = 0;
};

/// Sliding token windows: stride = max(1, floor(chunk_size * (1 - overlap_ratio))),
/// windows start at 0, stride, 2*stride, ... and generation stops with the
/// first window that reaches the final token. Empty text yields no spans.
std::vector<ChunkSpan> chunk_spans(std::string_view text, std::size_t chunk_size,
                                   double overlap_ratio);

std::string chunk_text(std::string_view text, const ChunkSpan& span);

}  // namespace ragtuner::components
