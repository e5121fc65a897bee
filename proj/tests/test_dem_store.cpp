#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "ragtuner/dem/store.hpp"
#include "ragtuner/errors.hpp"

using namespace ragtuner;
using dem::DemStore;
using dem::ElementId;

namespace ragtuner::dem {

// Forges broken states that the public surface cannot produce, so the
// integrity sweep has something to find.
struct StoreTestAccess {
    static void drop_parent_pointer(DemStore& store, ElementId parent, ElementId child) {
        auto& parents = store.elements_.at(child).parents;
        parents.erase(std::remove(parents.begin(), parents.end(), parent), parents.end());
    }
    static void reassign_domain_label(DemStore& store, ElementId e, const std::string& domain) {
        store.elements_.at(e).domain = domain;
    }
    static void corrupt_index(DemStore& store, const std::string& domain, ElementId e) {
        store.domains_.at(domain).index_ids.push_back(e);
    }
};

}  // namespace ragtuner::dem

namespace {

std::vector<double> basis_vector(std::size_t dim, std::size_t axis, double value = 1.0) {
    std::vector<double> v(dim, 0.0);
    v[axis] = value;
    return v;
}

}  // namespace

TEST_CASE("domain creation rules") {
    DemStore store;
    store.create_domain("chunks", true, 64);
    CHECK(store.domain("chunks").indexed);
    CHECK(store.domain("chunks").element_ids.empty());

    store.create_domain("entities", false);
    CHECK_FALSE(store.domain("entities").indexed);

    CHECK_THROWS_WITH_AS(store.create_domain("chunks", false), doctest::Contains("chunks"),
                         Error);
    CHECK_THROWS_AS(store.create_domain("bad", true), Error);  // MissingDimension
}

TEST_CASE("element creation is positional identity") {
    DemStore store;
    store.create_domain("chunks", false);
    auto a = store.create_element("chunks", {{"text", dem::PropValue(std::string("hello world"))}});
    auto b = store.create_element("chunks", {{"text", dem::PropValue(std::string("hello world"))}});
    CHECK(a != b);
    CHECK(store.size() == 2);
    CHECK(store.element(a).children.empty());
    CHECK(store.element(a).parents.empty());
    CHECK_THROWS_AS(store.create_element("nope", {}), Error);
}

TEST_CASE("linking is bidirectional and idempotent") {
    DemStore store;
    store.create_domain("d", false);
    auto e1 = store.create_element("d", {});
    auto e2 = store.create_element("d", {});

    store.link(e1, e2);
    CHECK(store.element(e1).children == std::vector<ElementId>{e2});
    CHECK(store.element(e2).parents == std::vector<ElementId>{e1});

    store.link(e1, e2);
    CHECK(store.element(e1).children.size() == 1);
    CHECK(store.element(e2).parents.size() == 1);

    CHECK_THROWS_AS(store.link(e1, e1), Error);
    CHECK_THROWS_AS(store.link(e1, ElementId{999}), Error);
}

TEST_CASE("hyperedge members read back children in order") {
    DemStore store;
    store.create_domain("entities", false);
    store.create_domain("triples", false);
    auto subj = store.create_element("entities", {});
    auto obj_a = store.create_element("entities", {});
    auto obj_b = store.create_element("entities", {});
    auto edge = store.create_element("triples", {});
    store.link(edge, subj);
    store.link(edge, obj_a);
    store.link(edge, obj_b);
    CHECK(store.hyperedge_members(edge) == std::vector<ElementId>{subj, obj_a, obj_b});
    CHECK(store.hyperedge_members(subj).empty());
    CHECK_THROWS_AS(store.hyperedge_members(ElementId{12345}), Error);
}

TEST_CASE("embeddings respect dimension and index membership") {
    DemStore store;
    store.create_domain("chunks", true, 64);
    store.create_domain("plain", false);
    auto e = store.create_element("chunks", {});

    CHECK_THROWS_AS(store.set_embedding(e, std::vector<double>(32, 1.0)), Error);

    store.set_embedding(e, basis_vector(64, 0));
    auto hits = store.nearest("chunks", basis_vector(64, 0), 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == e);
    CHECK(hits[0].similarity == doctest::Approx(1.0).epsilon(1e-9));

    // overwrite keeps exactly one index entry
    store.set_embedding(e, basis_vector(64, 1));
    std::size_t count = 0;
    for (const auto& hit : store.nearest("chunks", basis_vector(64, 1), 100)) {
        if (hit.id == e) ++count;
    }
    CHECK(count == 1);

    auto p = store.create_element("plain", {});
    CHECK_THROWS_AS(store.set_embedding(p, basis_vector(64, 0)), Error);
    CHECK_THROWS_AS(store.nearest("plain", basis_vector(64, 0), 1), Error);
}

TEST_CASE("nearest: orthogonal query has similarity zero") {
    DemStore store;
    store.create_domain("chunks", true, 8);
    auto e = store.create_element("chunks", {});
    store.set_embedding(e, basis_vector(8, 0));
    auto hits = store.nearest("chunks", basis_vector(8, 1), 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].similarity == doctest::Approx(0.0));
}

TEST_CASE("nearest matches an exhaustive cosine scan") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    DemStore store;
    const std::size_t dim = 16;
    store.create_domain("v", true, dim);

    std::vector<std::pair<ElementId, std::vector<double>>> rows;
    for (int i = 0; i < 5; ++i) {
        std::vector<double> v(dim);
        for (double& x : v) x = gauss(rng);
        auto id = store.create_element("v", {});
        store.set_embedding(id, v);
        rows.emplace_back(id, v);
    }
    std::vector<double> query(dim);
    for (double& x : query) x = gauss(rng);

    auto got = store.nearest("v", query, 3);

    // independent oracle: sort all pairwise cosines
    std::vector<std::pair<ElementId, double>> oracle;
    for (const auto& [id, v] : rows) {
        oracle.emplace_back(id, dem::cosine_similarity(query, v));
    }
    std::stable_sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    REQUIRE(got.size() == 3);
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].id == oracle[i].first);
        CHECK(got[i].similarity == doctest::Approx(oracle[i].second).epsilon(1e-12));
    }
}

TEST_CASE("validate_store flags forged inconsistencies") {
    DemStore store;
    store.create_domain("a", false);
    store.create_domain("b", false);
    auto e1 = store.create_element("a", {});
    auto e2 = store.create_element("a", {});
    store.link(e1, e2);
    CHECK(store.validate().empty());

    SUBCASE("one-directional link") {
        dem::StoreTestAccess::drop_parent_pointer(store, e1, e2);
        auto violations = store.validate();
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].rule == "BidirectionalityViolation");
    }
    SUBCASE("wrong domain membership") {
        dem::StoreTestAccess::reassign_domain_label(store, e2, "b");
        auto violations = store.validate();
        REQUIRE(!violations.empty());
        bool found = false;
        for (const auto& v : violations) {
            if (v.rule == "DomainMembershipViolation") found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("randomized create/link sequences keep the store consistent") {
    std::mt19937_64 rng(1234);
    DemStore store;
    store.create_domain("x", false);
    store.create_domain("y", false);
    std::vector<ElementId> ids;
    for (int op = 0; op < 1000; ++op) {
        if (ids.size() < 2 || rng() % 3 == 0) {
            ids.push_back(store.create_element(rng() % 2 == 0 ? "x" : "y", {}));
        } else {
            auto a = ids[rng() % ids.size()];
            auto b = ids[rng() % ids.size()];
            if (a == b) continue;
            store.link(a, b);
            if (rng() % 4 == 0) store.link(a, b);  // idempotence under repeats
        }
    }
    CHECK(store.validate().empty());
}

TEST_CASE("snapshot round-trip is lossless") {
    DemStore store;
    store.create_domain("chunks", true, 8);
    store.create_domain("entities", false);
    auto c1 = store.create_element("chunks", {{"text", dem::PropValue(std::string("alpha"))},
                                              {"start", dem::PropValue(std::int64_t{0})}});
    auto c2 = store.create_element("chunks", {{"w", dem::PropValue(2.5)}}, 0.5);
    auto e1 = store.create_element("entities", {{"flag", dem::PropValue(true)}});
    store.link(c2, e1);  // later parent first,
    store.link(c1, e1);  // earlier parent second: exercises parent ordering
    store.set_embedding(c1, std::vector<double>{1, 0, 0, 0, 0, 0, 0, 0});

    auto text = store.snapshot_jsonl();
    auto loaded = DemStore::from_snapshot_jsonl(text);
    CHECK(loaded.validate().empty());
    REQUIRE(loaded.size() == store.size());
    for (const auto& [id, original] : store.elements()) {
        const auto& copy = loaded.element(id);
        CHECK(copy.domain == original.domain);
        CHECK(copy.weight == original.weight);
        CHECK(copy.props == original.props);
        CHECK(copy.children == original.children);
        CHECK(copy.parents == original.parents);
        CHECK(copy.embedding == original.embedding);
    }
    CHECK(loaded.snapshot_jsonl() == text);

    // ids allocated after a load do not collide
    auto fresh = loaded.create_element("entities", {});
    CHECK(fresh.value > e1.value);
}

TEST_CASE("snapshot files save and load") {
    namespace fs = std::filesystem;
    DemStore store;
    store.create_domain("d", false);
    store.create_element("d", {});
    auto path = (fs::temp_directory_path() / "ragtuner_snapshot_test.jsonl").string();
    store.save_snapshot(path);
    auto loaded = DemStore::load_snapshot(path);
    CHECK(loaded.size() == 1);
    fs::remove(path);
}
