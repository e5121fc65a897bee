#include "ragtuner/tuner/search_space.hpp"

#include <algorithm>
#include <cmath>

#include "ragtuner/errors.hpp"

namespace ragtuner::tuner {

using dsl::TunableKind;

SearchSpace::SearchSpace(std::vector<dsl::TunableDecl> dims) : dims_(std::move(dims)) {
    for (const auto& dim : dims_) {
        offsets_.push_back(encoded_dim_);
        encoded_dim_ += dim.kind == TunableKind::Categorical ? dim.choices.size() : 1;
    }
}

std::vector<double> SearchSpace::encode(const dsl::Assignment& assignment) const {
    std::vector<double> x(encoded_dim_, 0.0);
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const auto& dim = dims_[d];
        auto it = assignment.find(dim.path);
        if (it == assignment.end()) {
            throw Error(ErrorCode::MissingAssignment, dim.path);
        }
        dsl::check_value(dim, it->second);
        if (dim.kind == TunableKind::Categorical) {
            auto pos = std::find(dim.choices.begin(), dim.choices.end(), it->second);
            x[offsets_[d] + static_cast<std::size_t>(pos - dim.choices.begin())] = 1.0;
        } else {
            x[offsets_[d]] = (it->second.get<double>() - dim.low) / (dim.high - dim.low);
        }
    }
    return x;
}

dsl::Assignment SearchSpace::decode(std::span<const double> x) const {
    dsl::Assignment out;
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const auto& dim = dims_[d];
        if (dim.kind == TunableKind::Categorical) {
            std::size_t best = 0;
            double best_value = x[offsets_[d]];
            for (std::size_t c = 1; c < dim.choices.size(); ++c) {
                if (x[offsets_[d] + c] > best_value) {
                    best_value = x[offsets_[d] + c];
                    best = c;
                }
            }
            out[dim.path] = dim.choices[best];
        } else {
            double v = std::clamp(x[offsets_[d]], 0.0, 1.0);
            double value = dim.low + v * (dim.high - dim.low);
            if (dim.kind == TunableKind::Int) {
                value = std::clamp(std::round(value), dim.low, dim.high);
                out[dim.path] = static_cast<std::int64_t>(value);
            } else {
                out[dim.path] = value;
            }
        }
    }
    return out;
}

dsl::Assignment SearchSpace::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> x(encoded_dim_);
    for (double& v : x) v = uniform(rng);
    return decode(x);
}

bool SearchSpace::accepts(const dsl::Assignment& assignment) const {
    if (assignment.size() != dims_.size()) return false;
    for (const auto& dim : dims_) {
        auto it = assignment.find(dim.path);
        if (it == assignment.end()) return false;
        try {
            dsl::check_value(dim, it->second);
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

SearchSpace search_space_of(const dsl::PipelineSpec& spec) {
    return SearchSpace(spec.tunables);
}

}  // namespace ragtuner::tuner
