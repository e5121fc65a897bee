#include "ragtuner/dem/store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ragtuner/errors.hpp"

namespace ragtuner::dem {

using nlohmann::json;

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

DomainName DemStore::create_domain(const std::string& name, bool indexed,
                                   std::optional<std::size_t> embedding_dim) {
    if (domains_.count(name) > 0) {
        throw Error(ErrorCode::DuplicateDomain, "domain '" + name + "' already exists");
    }
    if (indexed && !embedding_dim.has_value()) {
        throw Error(ErrorCode::MissingDimension,
                    "indexed domain '" + name + "' needs an embedding dimension");
    }
    Domain d;
    d.name = name;
    d.indexed = indexed;
    d.embedding_dim = embedding_dim;
    domains_.emplace(name, std::move(d));
    return name;
}

ElementId DemStore::create_element(const DomainName& domain, PropMap props, double weight) {
    auto it = domains_.find(domain);
    if (it == domains_.end()) {
        throw Error(ErrorCode::UnknownDomain, "no domain named '" + domain + "'");
    }
    ElementId id{next_id_++};
    Element e;
    e.id = id;
    e.domain = domain;
    e.weight = weight;
    e.props = std::move(props);
    it->second.element_ids.push_back(id);
    elements_.emplace(id, std::move(e));
    return id;
}

void DemStore::link(ElementId parent, ElementId child) {
    if (parent == child) {
        throw Error(ErrorCode::SelfLink, parent.to_string() + " cannot link to itself");
    }
    Element& p = mutable_element(parent);
    Element& c = mutable_element(child);
    if (std::find(p.children.begin(), p.children.end(), child) == p.children.end()) {
        p.children.push_back(child);
    }
    // Children keep insertion order; parents stay sorted by creation order so
    // that snapshots (which persist children only) reconstruct identically.
    auto pos = std::lower_bound(c.parents.begin(), c.parents.end(), parent);
    if (pos == c.parents.end() || *pos != parent) {
        c.parents.insert(pos, parent);
    }
}

std::vector<ElementId> DemStore::hyperedge_members(ElementId e) const {
    return element(e).children;
}

void DemStore::set_embedding(ElementId e, std::vector<double> v) {
    Element& el = mutable_element(e);
    Domain& dom = domains_.at(el.domain);
    if (!dom.indexed) {
        throw Error(ErrorCode::UnindexedDomain, "domain '" + dom.name + "' is not indexed");
    }
    if (v.size() != *dom.embedding_dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "vector of size " + std::to_string(v.size()) + " into domain '" + dom.name +
                        "' of dimension " + std::to_string(*dom.embedding_dim));
    }
    bool had = el.embedding.has_value();
    el.embedding = std::move(v);
    if (!had) {
        dom.index_ids.push_back(e);  // ids stay in creation order
    }
}

std::vector<Neighbor> DemStore::nearest(const DomainName& domain, std::span<const double> query,
                                        std::size_t k) const {
    const Domain& dom = this->domain(domain);
    if (!dom.indexed) {
        throw Error(ErrorCode::UnindexedDomain, "domain '" + domain + "' is not indexed");
    }
    if (query.size() != *dom.embedding_dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "query of size " + std::to_string(query.size()) + " against dimension " +
                        std::to_string(*dom.embedding_dim));
    }
    std::vector<Neighbor> all;
    all.reserve(dom.index_ids.size());
    for (ElementId id : dom.index_ids) {
        const Element& e = elements_.at(id);
        all.push_back({id, cosine_similarity(query, *e.embedding)});
    }
    // Descending similarity, ties by creation order.
    std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.id < b.id;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

const Domain& DemStore::domain(const DomainName& name) const {
    auto it = domains_.find(name);
    if (it == domains_.end()) {
        throw Error(ErrorCode::UnknownDomain, "no domain named '" + name + "'");
    }
    return it->second;
}

std::vector<DomainName> DemStore::domain_names() const {
    std::vector<DomainName> names;
    names.reserve(domains_.size());
    for (const auto& [name, _] : domains_) names.push_back(name);
    return names;
}

const Element& DemStore::element(ElementId e) const {
    auto it = elements_.find(e);
    if (it == elements_.end()) {
        throw Error(ErrorCode::UnknownElement, "no element " + e.to_string());
    }
    return it->second;
}

Element& DemStore::mutable_element(ElementId e) {
    auto it = elements_.find(e);
    if (it == elements_.end()) {
        throw Error(ErrorCode::UnknownElement, "no element " + e.to_string());
    }
    return it->second;
}

std::vector<Violation> DemStore::validate() const {
    std::vector<Violation> out;
    auto contains = [](const std::vector<ElementId>& ids, ElementId id) {
        return std::find(ids.begin(), ids.end(), id) != ids.end();
    };

    for (const auto& [name, dom] : domains_) {
        if (dom.indexed && !dom.embedding_dim.has_value()) {
            out.push_back({"MissingDimensionViolation", "indexed domain '" + name + "' has no dim"});
        }
        std::set<ElementId> embedded;
        for (ElementId id : dom.element_ids) {
            auto it = elements_.find(id);
            if (it == elements_.end()) {
                out.push_back({"UnknownReferenceViolation",
                               "domain '" + name + "' lists missing element " + id.to_string()});
                continue;
            }
            if (it->second.domain != name) {
                out.push_back({"DomainMembershipViolation",
                               "element " + id.to_string() + " listed in domain '" + name +
                                   "' but claims '" + it->second.domain + "'"});
            }
            if (it->second.embedding.has_value()) {
                embedded.insert(id);
                if (dom.embedding_dim && it->second.embedding->size() != *dom.embedding_dim) {
                    out.push_back({"DimensionViolation",
                                   "element " + id.to_string() + " embedding size " +
                                       std::to_string(it->second.embedding->size()) +
                                       " != domain dim " + std::to_string(*dom.embedding_dim)});
                }
            }
        }
        std::set<ElementId> indexed_set(dom.index_ids.begin(), dom.index_ids.end());
        if (indexed_set.size() != dom.index_ids.size()) {
            out.push_back({"IndexViolation", "domain '" + name + "' index holds duplicate ids"});
        }
        if (indexed_set != embedded) {
            out.push_back({"IndexViolation",
                           "domain '" + name + "' index does not match its embedded elements"});
        }
    }

    for (const auto& [id, e] : elements_) {
        auto dit = domains_.find(e.domain);
        if (dit == domains_.end()) {
            out.push_back({"DomainMembershipViolation",
                           "element " + id.to_string() + " claims unknown domain '" + e.domain + "'"});
        } else if (!contains(dit->second.element_ids, id)) {
            out.push_back({"DomainMembershipViolation",
                           "element " + id.to_string() + " missing from domain '" + e.domain + "'"});
        }
        std::set<ElementId> child_set(e.children.begin(), e.children.end());
        if (child_set.size() != e.children.size()) {
            out.push_back({"DuplicateLinkViolation", id.to_string() + " has duplicate children"});
        }
        std::set<ElementId> parent_set(e.parents.begin(), e.parents.end());
        if (parent_set.size() != e.parents.size()) {
            out.push_back({"DuplicateLinkViolation", id.to_string() + " has duplicate parents"});
        }
        if (child_set.count(id) > 0 || parent_set.count(id) > 0) {
            out.push_back({"SelfLinkViolation", id.to_string() + " links to itself"});
        }
        for (ElementId c : e.children) {
            auto cit = elements_.find(c);
            if (cit == elements_.end()) {
                out.push_back({"UnknownReferenceViolation",
                               id.to_string() + " has missing child " + c.to_string()});
            } else if (!contains(cit->second.parents, id)) {
                out.push_back({"BidirectionalityViolation",
                               c.to_string() + " is a child of " + id.to_string() +
                                   " but lacks the parent pointer"});
            }
        }
        for (ElementId p : e.parents) {
            auto pit = elements_.find(p);
            if (pit == elements_.end()) {
                out.push_back({"UnknownReferenceViolation",
                               id.to_string() + " has missing parent " + p.to_string()});
            } else if (!contains(pit->second.children, id)) {
                out.push_back({"BidirectionalityViolation",
                               p.to_string() + " is a parent of " + id.to_string() +
                                   " but lacks the child pointer"});
            }
        }
    }
    return out;
}

std::vector<Violation> validate_store(const DemStore& store) {
    return store.validate();
}

namespace {

json prop_value_to_json(const PropValue& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

PropValue prop_value_from_json(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    throw Error(ErrorCode::ParseError, "unsupported property value: " + j.dump());
}

}  // namespace

std::string DemStore::snapshot_jsonl() const {
    std::ostringstream out;
    for (const auto& [name, dom] : domains_) {
        json rec;
        rec["kind"] = "domain";
        rec["name"] = name;
        rec["indexed"] = dom.indexed;
        rec["dim"] = dom.embedding_dim ? json(*dom.embedding_dim) : json(nullptr);
        out << rec.dump() << '\n';
    }
    for (const auto& [id, e] : elements_) {
        json rec;
        rec["kind"] = "element";
        rec["id"] = id.value;
        rec["domain"] = e.domain;
        rec["weight"] = e.weight;
        json props = json::object();
        for (const auto& [k, v] : e.props) props[k] = prop_value_to_json(v);
        rec["props"] = std::move(props);
        json children = json::array();
        for (ElementId c : e.children) children.push_back(c.value);
        rec["children"] = std::move(children);
        rec["embedding"] = e.embedding ? json(*e.embedding) : json(nullptr);
        out << rec.dump() << '\n';
    }
    return out.str();
}

DemStore DemStore::from_snapshot_jsonl(const std::string& text) {
    DemStore store;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    // id -> ordered children, applied once all elements exist
    std::vector<std::pair<ElementId, std::vector<ElementId>>> pending_links;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& ex) {
            throw Error(ErrorCode::ParseError,
                        "snapshot line " + std::to_string(line_no) + ": " + ex.what());
        }
        const std::string kind = rec.value("kind", "");
        if (kind == "domain") {
            std::optional<std::size_t> dim;
            if (rec.contains("dim") && !rec["dim"].is_null()) dim = rec["dim"].get<std::size_t>();
            store.create_domain(rec.at("name").get<std::string>(), rec.value("indexed", false), dim);
        } else if (kind == "element") {
            ElementId id{rec.at("id").get<std::uint64_t>()};
            const std::string domain = rec.at("domain").get<std::string>();
            auto dit = store.domains_.find(domain);
            if (dit == store.domains_.end()) {
                throw Error(ErrorCode::ParseError, "snapshot line " + std::to_string(line_no) +
                                                       ": unknown domain '" + domain + "'");
            }
            Element e;
            e.id = id;
            e.domain = domain;
            e.weight = rec.value("weight", 1.0);
            for (const auto& [k, v] : rec.at("props").items()) {
                e.props.emplace(k, prop_value_from_json(v));
            }
            std::vector<ElementId> children;
            for (const auto& c : rec.at("children")) children.push_back({c.get<std::uint64_t>()});
            if (rec.contains("embedding") && !rec["embedding"].is_null()) {
                e.embedding = rec["embedding"].get<std::vector<double>>();
                dit->second.index_ids.push_back(id);
            }
            dit->second.element_ids.push_back(id);
            if (store.elements_.count(id) > 0) {
                throw Error(ErrorCode::ParseError, "snapshot line " + std::to_string(line_no) +
                                                       ": duplicate element id " + id.to_string());
            }
            store.elements_.emplace(id, std::move(e));
            store.next_id_ = std::max(store.next_id_, id.value + 1);
            if (!children.empty()) pending_links.emplace_back(id, std::move(children));
        } else {
            throw Error(ErrorCode::ParseError, "snapshot line " + std::to_string(line_no) +
                                                   ": unknown record kind '" + kind + "'");
        }
    }
    // Parents are reconstructed from children.
    for (const auto& [parent, children] : pending_links) {
        Element& p = store.mutable_element(parent);
        for (ElementId c : children) {
            Element& ce = store.mutable_element(c);
            p.children.push_back(c);
            ce.parents.push_back(parent);
        }
    }
    for (auto& [_, e] : store.elements_) {
        std::sort(e.parents.begin(), e.parents.end());
    }
    return store;
}

void DemStore::save_snapshot(const std::string& path) const {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << snapshot_jsonl();
    }
    fs::rename(tmp, target);
}

DemStore DemStore::load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_snapshot_jsonl(buf.str());
}

}  // namespace ragtuner::dem
