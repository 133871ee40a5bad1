#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "thintact/maskopt.hpp"

using namespace thintact;
using namespace thintact::testing;

namespace {

FitnessSpec small_spec() {
    FitnessSpec spec = FitnessSpec::with_white(32, 32);
    Mat grad(32, 32);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) grad(i, j) = j / 31.0;
    spec.scenes.push_back({"hgrad", grad, false});
    return spec;
}

int hamming(const MaskVector& a, const MaskVector& b) {
    int d = 0;
    for (int i = 0; i < a.length(); ++i) d += a.entries[i] != b.entries[i];
    return d;
}

}  // namespace

TEST_CASE("crossover swaps one contiguous segment and nothing else") {
    MaskVector a = random_vector(40, 1), b = random_vector(40, 2);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        auto [c, d] = crossover(a, b, rng);
        REQUIRE(c.length() == 40);
        REQUIRE(d.length() == 40);
        std::vector<int> swapped;
        for (int i = 0; i < 40; ++i) {
            bool keep = c.entries[i] == a.entries[i] && d.entries[i] == b.entries[i];
            bool swap = c.entries[i] == b.entries[i] && d.entries[i] == a.entries[i];
            CHECK((keep || swap));
            if (a.entries[i] != b.entries[i] && swap) swapped.push_back(i);
        }
        // The positions that provably swapped must be contiguous in index.
        for (std::size_t k = 1; k < swapped.size(); ++k) {
            bool gap_all_equal = true;
            for (int i = swapped[k - 1] + 1; i < swapped[k]; ++i)
                if (a.entries[i] != b.entries[i]) gap_all_equal = false;
            CHECK(gap_all_equal);
        }
    }
}

TEST_CASE("crossover is deterministic given the RNG state") {
    MaskVector a = random_vector(24, 4), b = random_vector(24, 5);
    std::mt19937_64 r1(9), r2(9);
    auto p1 = crossover(a, b, r1);
    auto p2 = crossover(a, b, r2);
    CHECK(p1.first.entries == p2.first.entries);
    CHECK(p1.second.entries == p2.second.entries);
}

TEST_CASE("mutate flips exactly s distinct loci") {
    MaskVector a = random_vector(30, 6);
    std::mt19937_64 rng(7);
    for (int s : {1, 5, 15}) {
        MaskVector m = mutate(a, s, rng);
        CHECK(hamming(a, m) == s);
        for (int v : m.entries) CHECK((v == 1 || v == -1));
    }
    MaskVector full = mutate(a, 30, rng);
    for (int i = 0; i < 30; ++i) CHECK(full.entries[i] == -a.entries[i]);
    CHECK_THROWS_AS(mutate(a, 31, rng), InvalidInput);
    CHECK_THROWS_AS(mutate(a, 0, rng), InvalidInput);
}

TEST_CASE("fitness is invariant under global sign flip and deterministic") {
    Geometry g = desk_geometry_small(32, 64);
    FitnessSpec spec = small_spec();
    MaskVector phi = random_vector(96, 8);
    MaskVector neg = phi;
    for (int& v : neg.entries) v = -v;
    double f1 = fitness(phi, spec, g);
    double f2 = fitness(neg, spec, g);
    double f3 = fitness(phi, spec, g);
    CHECK(f1 == f2);
    CHECK(f1 == f3);
    CHECK(f1 > 0.0);
    CHECK(std::isfinite(f1));
}

TEST_CASE("fitness responds to the noise seed but not wildly") {
    Geometry g = desk_geometry_small(32, 64);
    FitnessSpec spec = small_spec();
    MaskVector phi = random_vector(96, 9);
    double f1 = fitness(phi, spec, g);
    spec.noise_seed = 1;
    double f2 = fitness(phi, spec, g);
    CHECK(f1 != f2);
    CHECK(std::fabs(f1 - f2) <= 0.5 * std::fabs(f1));
}

TEST_CASE("fitness spec validation") {
    Geometry g = desk_geometry_small(32, 64);
    FitnessSpec no_white;
    no_white.scenes.push_back({"x", Mat::ones(32, 32) * 0.5, false});
    CHECK_THROWS_AS(fitness(random_vector(96, 10), no_white, g), InvalidInput);
    FitnessSpec only_white = FitnessSpec::with_white(32, 32);
    CHECK_THROWS_AS(fitness(random_vector(96, 10), only_white, g), InvalidInput);
}

TEST_CASE("GaConfig validation") {
    GaConfig cfg;
    cfg.population = 1;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = GaConfig{};
    cfg.elitism = cfg.population;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = GaConfig{};
    cfg.crossover_prob = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("a tiny GA run improves best fitness and keeps the gene alphabet") {
    Geometry g = desk_geometry_small(32, 64);
    FitnessSpec spec = small_spec();
    GaConfig cfg;
    cfg.population = 8;
    cfg.generations = 6;
    cfg.mutation_loci = 4;
    cfg.seed = 11;
    GaResult res = evolve(96, cfg, spec, g);
    REQUIRE(res.history.size() == 7);
    CHECK(res.history.front().generation == 0);
    CHECK(res.history.back().generation == 6);
    // Elitism makes the best-so-far trace non-decreasing.
    for (std::size_t i = 1; i < res.history.size(); ++i)
        CHECK(res.history[i].best >= res.history[i - 1].best);
    CHECK(res.history.back().best >= res.history.front().best);
    CHECK(res.best_fitness == res.history.back().best);
    CHECK(res.best.length() == 96);
    for (int v : res.best.entries) CHECK((v == 1 || v == -1));
    CHECK(res.best_fitness == fitness(res.best, spec, g));
}

TEST_CASE("evolve is deterministic for a fixed seed") {
    Geometry g = desk_geometry_small(32, 64);
    FitnessSpec spec = small_spec();
    GaConfig cfg;
    cfg.population = 6;
    cfg.generations = 3;
    cfg.seed = 21;
    GaResult a = evolve(96, cfg, spec, g);
    GaResult b = evolve(96, cfg, spec, g);
    CHECK(a.best.entries == b.best.entries);
    CHECK(a.best_fitness == b.best_fitness);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i].best == b.history[i].best);
        CHECK(a.history[i].mean == b.history[i].mean);
    }
    cfg.seed = 22;
    GaResult c = evolve(96, cfg, spec, g);
    CHECK(a.best.entries != c.best.entries);
}

TEST_CASE("degenerate evolve: population 2, one generation") {
    Geometry g = desk_geometry_small(32, 64);
    FitnessSpec spec = small_spec();
    GaConfig cfg;
    cfg.population = 2;
    cfg.generations = 1;
    cfg.elitism = 1;
    GaResult res = evolve(96, cfg, spec, g);
    CHECK(res.history.size() == 2);
    CHECK(res.best_fitness > 0.0);
}
