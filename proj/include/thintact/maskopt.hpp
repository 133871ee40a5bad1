#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "thintact/mask.hpp"
#include "thintact/mat.hpp"
#include "thintact/sysmat.hpp"

namespace thintact {

struct GaConfig {
    int population = 200;
    int generations = 2000;
    double crossover_prob = 0.8;
    double mutation_prob = 0.1;
    int mutation_loci = 10;  // s: loci inverted per mutation
    std::uint64_t seed = 0;
    int elitism = 2;

    void validate() const;
};

struct FitnessScene {
    std::string name;
    Mat image;  // N x M, values in [0, 1]
    bool is_white = false;
};

struct FitnessSpec {
    std::vector<FitnessScene> scenes;  // must include the all-ones white scene
    double noise_sigma = 0.005;
    double tau = 0.0;  // 0 -> default_tau of the generated (Pc, Qc)
    std::uint64_t noise_seed = 0;
    double w_ssim = 1.0, w_psnr = 1.0, w_grad = 1.0;
    SysmatConfig sysmat;

    void validate() const;
    static FitnessSpec with_white(int scene_rows, int scene_cols);
};

/// Simulated-reconstruction fitness: harmonic mean of the f_SSIM terms plus
/// arithmetic mean of the f_PSNR terms plus f_GRAD on the white reconstruction.
double fitness(const MaskVector& phi, const FitnessSpec& spec, const Geometry& g);

/// Two-point segment exchange between random loci.
std::pair<MaskVector, MaskVector> crossover(const MaskVector& a, const MaskVector& b,
                                            std::mt19937_64& rng);

/// Inverts exactly s distinct loci.
MaskVector mutate(const MaskVector& a, int s, std::mt19937_64& rng);

struct GaHistoryEntry {
    int generation = 0;
    double best = 0.0;
    double mean = 0.0;
};

struct GaResult {
    MaskVector best;
    double best_fitness = 0.0;
    std::vector<GaHistoryEntry> history;
};

/// Roulette selection with elitism over seeded random +-1 genes of length k.
GaResult evolve(int k, const GaConfig& cfg, const FitnessSpec& spec, const Geometry& g);

}  // namespace thintact
