#pragma once

#include <random>
#include <span>
#include <vector>

#include "ragtuner/dsl/spec.hpp"

namespace ragtuner::tuner {

/// Mixed-type search space over the spec's tunables, encoded into the unit
/// cube: floats and ints affinely (ints round half-away-from-zero on
/// decode), categoricals as one-hot blocks (argmax on decode, ties to the
/// first choice). decode(encode(a)) == a for every valid assignment.
class SearchSpace {
public:
    explicit SearchSpace(std::vector<dsl::TunableDecl> dims);

    std::size_t encoded_dim() const { return encoded_dim_; }
    std::size_t num_dims() const { return dims_.size(); }
    const std::vector<dsl::TunableDecl>& dims() const { return dims_; }

    std::vector<double> encode(const dsl::Assignment& assignment) const;
    dsl::Assignment decode(std::span<const double> x) const;

    /// Uniform point in the encoded cube, decoded.
    dsl::Assignment sample(std::mt19937_64& rng) const;

    /// True when the assignment covers exactly these paths with in-bounds values.
    bool accepts(const dsl::Assignment& assignment) const;

private:
    std::vector<dsl::TunableDecl> dims_;
    std::vector<std::size_t> offsets_;  // block start per dim
    std::size_t encoded_dim_ = 0;
};

SearchSpace search_space_of(const dsl::PipelineSpec& spec);

}  // namespace ragtuner::tuner
