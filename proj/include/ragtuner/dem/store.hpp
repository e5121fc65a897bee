#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ragtuner/dem/element.hpp"

namespace ragtuner::dem {

struct Domain {
    DomainName name;
    std::vector<ElementId> element_ids;  // creation order
    bool indexed = false;
    std::optional<std::size_t> embedding_dim;
    std::vector<ElementId> index_ids;  // embedded elements, creation order
};

struct Violation {
    std::string rule;     // e.g. "BidirectionalityViolation"
    std::string message;  // names the element ids involved
};

struct Neighbor {
    ElementId id;
    double similarity = 0.0;
};

/// Cosine similarity; 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// The Domain-Element Model store: elements partitioned into named domains,
/// connected by bidirectional parent/child pointers, with an exact cosine
/// index per indexed domain. One store instance per pipeline run; many
/// concurrent readers or one writer.
class DemStore {
public:
    DomainName create_domain(const std::string& name, bool indexed,
                             std::optional<std::size_t> embedding_dim = std::nullopt);

    ElementId create_element(const DomainName& domain, PropMap props, double weight = 1.0);

    /// Idempotent; child appended to parent.children and parent to
    /// child.parents iff absent.
    void link(ElementId parent, ElementId child);

    std::vector<ElementId> hyperedge_members(ElementId e) const;

    void set_embedding(ElementId e, std::vector<double> v);

    std::vector<Neighbor> nearest(const DomainName& domain, std::span<const double> query,
                                  std::size_t k) const;

    /// Full integrity sweep; empty iff every invariant holds.
    std::vector<Violation> validate() const;

    bool has_domain(const std::string& name) const { return domains_.count(name) > 0; }
    const Domain& domain(const DomainName& name) const;
    std::vector<DomainName> domain_names() const;

    bool has_element(ElementId e) const { return elements_.count(e) > 0; }
    const Element& element(ElementId e) const;
    const std::map<ElementId, Element>& elements() const { return elements_; }

    std::size_t size() const { return elements_.size(); }

    void save_snapshot(const std::string& path) const;
    static DemStore load_snapshot(const std::string& path);

    std::string snapshot_jsonl() const;
    static DemStore from_snapshot_jsonl(const std::string& text);

private:
    Element& mutable_element(ElementId e);

    std::map<DomainName, Domain> domains_;
    std::map<ElementId, Element> elements_;
    std::uint64_t next_id_ = 1;

    friend struct StoreTestAccess;  // integrity-sweep tests forge broken states
};

std::vector<Violation> validate_store(const DemStore& store);

}  // namespace ragtuner::dem
