#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ragtuner::dem {

/// Opaque element identity. Ids are allocated by a monotonic counter, so
/// ordering by value is creation order.
struct ElementId {
    std::uint64_t value = 0;

    auto operator<=>(const ElementId&) const = default;

    std::string to_string() const { return "e" + std::to_string(value); }
};

using DomainName = std::string;

using PropValue = std::variant<std::string, double, std::int64_t, bool>;
using PropMap = std::map<std::string, PropValue>;

struct Element {
    ElementId id;
    DomainName domain;
    double weight = 1.0;
    PropMap props;
    std::vector<ElementId> children;
    std::vector<ElementId> parents;
    std::optional<std::vector<double>> embedding;
};

}  // namespace ragtuner::dem
