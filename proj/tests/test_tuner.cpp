#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "ragtuner/errors.hpp"
#include "ragtuner/tuner/gp.hpp"
#include "ragtuner/tuner/tuner.hpp"

using namespace ragtuner;
using dsl::TunableDecl;
using dsl::TunableKind;
using tuner::SearchSpace;
using tuner::SuggestConfig;
using tuner::TrialOutcome;
using tuner::TrialRecord;
using tuner::TuneConfig;

namespace {

TunableDecl float_dim(const std::string& path, double low, double high, double def) {
    TunableDecl d;
    d.path = path;
    d.kind = TunableKind::Float;
    d.low = low;
    d.high = high;
    d.default_value = def;
    return d;
}

SearchSpace one_dim_space() {
    return SearchSpace({float_dim("s.x", 0.0, 1.0, 0.5)});
}

tuner::TrialEvaluator quadratic_1d() {
    return [](const dsl::Assignment& a) {
        double x = a.at("s.x").get<double>();
        TrialOutcome outcome;
        outcome.objective = -(x - 0.7) * (x - 0.7);
        return outcome;
    };
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("suggest is deterministic for a fixed rng seed") {
    auto space = one_dim_space();
    std::mt19937_64 rng_a(42), rng_b(42);
    auto a = tuner::suggest({}, space, rng_a);
    auto b = tuner::suggest({}, space, rng_b);
    CHECK(a.phase == "random");
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("suggest stays in the random phase below n_init") {
    auto space = one_dim_space();
    SuggestConfig config;  // auto n_init = max(5, 2*1) = 5
    std::vector<TrialRecord> history;
    for (int i = 0; i < 4; ++i) {
        TrialRecord r;
        r.trial = i;
        r.phase = "random";
        r.assignment = {{"s.x", 0.1 * (i + 1)}};
        r.objective = 0.0;
        history.push_back(r);
    }
    std::mt19937_64 rng(1);
    CHECK(tuner::suggest(history, space, rng, config).phase == "random");

    TrialRecord r;
    r.trial = 4;
    r.phase = "random";
    r.assignment = {{"s.x", 0.9}};
    r.objective = 0.0;
    history.push_back(r);
    CHECK(tuner::suggest(history, space, rng, config).phase == "bayesian");
}

TEST_CASE("EI landscape steers the suggestion toward the optimum basin") {
    // y = -(x - 0.7)^2 sampled at {0, 0.25, 0.5, 1.0}: the EI argmax must
    // land in (0.5, 1.0). Cross-checked against a dense grid of the same
    // acquisition surface.
    auto space = one_dim_space();
    std::vector<TrialRecord> history;
    int i = 0;
    for (double x : {0.0, 0.25, 0.5, 1.0}) {
        TrialRecord r;
        r.trial = i++;
        r.phase = "random";
        r.assignment = {{"s.x", x}};
        r.objective = -(x - 0.7) * (x - 0.7);
        history.push_back(r);
    }
    SuggestConfig config;
    config.n_init = 4;

    std::mt19937_64 rng(3);
    auto suggestion = tuner::suggest(history, space, rng, config);
    CHECK(suggestion.phase == "bayesian");
    double x = suggestion.assignment.at("s.x").get<double>();
    CHECK(x > 0.5);
    CHECK(x < 1.0);

    // dense-grid oracle over the same surrogate
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (const auto& r : history) {
        xs.push_back({r.assignment.at("s.x").get<double>()});
        ys.push_back(*r.objective);
    }
    auto gp = tuner::GpSurrogate::fit(xs, ys);
    double best_y = *std::max_element(ys.begin(), ys.end());
    double grid_best_x = 0.0, grid_best_ei = -1.0;
    for (int g = 0; g <= 10000; ++g) {
        double gx = g / 10000.0;
        auto post = gp.predict(std::vector<double>{gx});
        double ei = tuner::expected_improvement(post.mean, post.sd, best_y, config.xi);
        if (ei > grid_best_ei) {
            grid_best_ei = ei;
            grid_best_x = gx;
        }
    }
    CHECK(grid_best_x > 0.5);
    CHECK(grid_best_x < 1.0);
}

TEST_CASE("tune with budget 1 runs exactly one random trial") {
    TuneConfig config;
    config.budget = 1;
    config.seed = 9;
    auto result = tuner::tune(one_dim_space(), quadratic_1d(), config);
    CHECK(result.trace.size() == 1);
    CHECK(result.trace[0].phase == "random");
    CHECK(result.best.trial == 0);
}

TEST_CASE("tune finds a 1-d quadratic optimum") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        TuneConfig config;
        config.budget = 25;
        config.seed = seed;
        auto result = tuner::tune(one_dim_space(), quadratic_1d(), config);
        double x = result.best.assignment.at("s.x").get<double>();
        if (std::abs(x - 0.7) < 0.1) ++hits;
    }
    CHECK(hits >= 18);
}

TEST_CASE("epsilon=inf stops right after n_init + patience trials") {
    TuneConfig config;
    config.budget = 100;
    config.epsilon = std::numeric_limits<double>::infinity();
    config.seed = 5;
    config.suggest.n_init = 5;
    config.patience = 5;
    auto result = tuner::tune(one_dim_space(), quadratic_1d(), config);
    CHECK(result.converged_early);
    CHECK(result.trace.size() == 11);  // first check at trials = n_init + patience + 1
}

TEST_CASE("running best objective is nondecreasing along the trace") {
    TuneConfig config;
    config.budget = 30;
    config.seed = 77;
    auto result = tuner::tune(one_dim_space(), quadratic_1d(), config);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : result.trace) {
        if (r.objective) best = std::max(best, *r.objective);
        CHECK(best >= -1.0);
    }
    CHECK(*result.best.objective == doctest::Approx(best));
}

TEST_CASE("failed trials are recorded, excluded from the surrogate, and never best") {
    int calls = 0;
    auto flaky = [&calls](const dsl::Assignment& a) {
        TrialOutcome outcome;
        if (++calls % 2 == 0) {
            outcome.failed = true;
            return outcome;
        }
        double x = a.at("s.x").get<double>();
        outcome.objective = -(x - 0.7) * (x - 0.7);
        return outcome;
    };
    TuneConfig config;
    config.budget = 12;
    config.seed = 3;
    auto result = tuner::tune(one_dim_space(), flaky, config);
    int failed = 0;
    for (const auto& r : result.trace) failed += r.failed ? 1 : 0;
    CHECK(failed == 6);
    CHECK_FALSE(result.best.failed);
}

TEST_CASE("tune throws when every trial fails") {
    auto always_fail = [](const dsl::Assignment&) {
        TrialOutcome outcome;
        outcome.failed = true;
        return outcome;
    };
    TuneConfig config;
    config.budget = 3;
    CHECK_THROWS_AS(tuner::tune(one_dim_space(), always_fail, config), Error);
}

TEST_CASE("trace files round-trip and warm starts resume counting") {
    auto trace_path = temp_path("ragtuner_trace_test.jsonl");
    TuneConfig first;
    first.budget = 10;
    first.seed = 21;
    first.trace_path = trace_path;
    auto space = one_dim_space();
    auto result = tuner::tune(space, quadratic_1d(), first);
    CHECK(result.trace.size() == 10);

    auto loaded = tuner::load_trace(trace_path);
    REQUIRE(loaded.size() == 10);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].trial == static_cast<int>(i));
        CHECK(loaded[i].assignment == result.trace[i].assignment);
    }

    SUBCASE("warm start counts toward the budget and n_init") {
        auto second_path = temp_path("ragtuner_trace_resumed.jsonl");
        TuneConfig second;
        second.budget = 30;
        second.seed = 22;
        second.trace_path = second_path;
        second.warm_start_path = trace_path;
        auto resumed = tuner::tune(space, quadratic_1d(), second);
        CHECK(resumed.trace.size() == 30);
        CHECK(resumed.new_trials == 20);
        for (int i = 0; i < 10; ++i) CHECK(resumed.trace[i].phase == "warm");
        // warm records satisfy n_init, so the very first new trial is Bayesian
        CHECK(resumed.trace[10].phase == "bayesian");

        double warm_best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 10; ++i) warm_best = std::max(warm_best, *resumed.trace[i].objective);
        double running = warm_best;
        for (std::size_t i = 10; i < resumed.trace.size(); ++i) {
            if (resumed.trace[i].objective) {
                running = std::max(running, *resumed.trace[i].objective);
            }
            CHECK(running >= warm_best);
        }
        std::remove(second_path.c_str());
    }

    SUBCASE("out-of-bounds warm records are skipped") {
        // import against a narrower space: old x values above 0.5 are invalid
        SearchSpace narrow({float_dim("s.x", 0.0, 0.5, 0.1)});
        auto warm = tuner::warm_start_load(trace_path, narrow);
        CHECK(warm.records.size() + warm.skipped == 10);
        CHECK(warm.skipped > 0);
        for (const auto& r : warm.records) {
            CHECK(r.assignment.at("s.x").get<double>() <= 0.5);
            CHECK(r.phase == "warm");
        }
    }

    SUBCASE("traces from a different space are fully skipped") {
        SearchSpace other({float_dim("other.path", 0.0, 1.0, 0.5)});
        auto warm = tuner::warm_start_load(trace_path, other);
        CHECK(warm.records.empty());
        CHECK(warm.skipped == 10);
    }

    std::remove(trace_path.c_str());
}

TEST_CASE("identical seeds give byte-identical traces") {
    auto path_a = temp_path("ragtuner_det_a.jsonl");
    auto path_b = temp_path("ragtuner_det_b.jsonl");
    for (const auto& path : {path_a, path_b}) {
        TuneConfig config;
        config.budget = 15;
        config.seed = 4242;
        config.trace_path = path;
        tuner::tune(one_dim_space(), quadratic_1d(), config);
    }
    std::ifstream a(path_a), b(path_b);
    std::string text_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string text_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(text_a == text_b);
    CHECK(!text_a.empty());
    std::remove(path_a.c_str());
    std::remove(path_b.c_str());
}
