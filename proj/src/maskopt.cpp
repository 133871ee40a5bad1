#include "thintact/maskopt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "thintact/metrics.hpp"
#include "thintact/recon.hpp"
#include "thintact/rng.hpp"

namespace thintact {

void GaConfig::validate() const {
    if (population < 2) throw InvalidInput("GaConfig: population must be >= 2");
    if (generations < 1) throw InvalidInput("GaConfig: generations must be >= 1");
    if (crossover_prob < 0 || crossover_prob > 1 || mutation_prob < 0 || mutation_prob > 1)
        throw InvalidInput("GaConfig: probabilities must be in [0, 1]");
    if (mutation_loci < 1) throw InvalidInput("GaConfig: mutation_loci must be >= 1");
    if (elitism < 0 || elitism >= population)
        throw InvalidInput("GaConfig: elitism must be in [0, population)");
}

void FitnessSpec::validate() const {
    bool has_white = false, has_other = false;
    for (const auto& s : scenes) (s.is_white ? has_white : has_other) = true;
    if (!has_white || !has_other)
        throw InvalidInput("FitnessSpec: need the white scene and at least one non-white scene");
}

FitnessSpec FitnessSpec::with_white(int scene_rows, int scene_cols) {
    FitnessSpec spec;
    spec.scenes.push_back({"white", Mat::ones(scene_rows, scene_cols), true});
    return spec;
}

double fitness(const MaskVector& phi, const FitnessSpec& spec, const Geometry& g) {
    spec.validate();
    // Canonical gene sign: the mask of Eq-style phi phi^T is invariant under
    // phi -> -phi, so fitness must be too; fix the first entry positive.
    MaskVector gene = phi;
    if (!gene.entries.empty() && gene.entries.front() < 0)
        for (int& e : gene.entries) e = -e;

    SystemMatrices sm = generate_system_matrices(gene, g, spec.sysmat);
    double tau = spec.tau > 0 ? spec.tau : default_tau(sm.pc, sm.qc);
    ReconOperator op = build_recon_operator(sm.pc, sm.qc, tau);

    double inv_ssim_sum = 0.0;  // harmonic mean accumulator
    double psnr_sum = 0.0;
    double f_grad = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < spec.scenes.size(); ++i) {
        const auto& scene = spec.scenes[i];
        std::uint64_t noise_seed = splitmix64(spec.noise_seed + 0x5ce4e0000ull + i);
        Mat yc_sim = forward(sm, scene.image, spec.noise_sigma, noise_seed, /*coding_only=*/true);
        Mat recon = solve_closed_form(op, yc_sim);

        double s = std::min(ssim(recon, scene.image), 1.0 - 1e-6);
        inv_ssim_sum += (1.0 - s);  // 1 / f_SSIM
        psnr_sum += psnr(recon, scene.image, 1.0);
        ++count;

        if (scene.is_white) {
            auto [gu, gv] = grad_l1(recon);
            f_grad = 2.0 * scene.image.rows() * scene.image.cols() / std::max(gu + gv, 1e-9);
        }
    }
    double f_ssim_hmean = count / inv_ssim_sum;
    double f_psnr_mean = psnr_sum / count;
    return spec.w_ssim * f_ssim_hmean + spec.w_psnr * f_psnr_mean + spec.w_grad * f_grad;
}

std::pair<MaskVector, MaskVector> crossover(const MaskVector& a, const MaskVector& b,
                                            std::mt19937_64& rng) {
    if (a.length() != b.length()) throw InvalidInput("crossover: gene lengths differ");
    const int k = a.length();
    std::uniform_int_distribution<int> locus(0, k);
    int lo = locus(rng), hi = locus(rng);
    if (lo > hi) std::swap(lo, hi);
    MaskVector ca = a, cb = b;
    for (int i = lo; i < hi; ++i) std::swap(ca.entries[i], cb.entries[i]);
    return {std::move(ca), std::move(cb)};
}

MaskVector mutate(const MaskVector& a, int s, std::mt19937_64& rng) {
    const int k = a.length();
    if (s < 1 || s > k) throw InvalidInput("mutate: s must be in [1, gene length]");
    // Partial Fisher-Yates draw of s distinct loci.
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    MaskVector out = a;
    for (int i = 0; i < s; ++i) {
        std::uniform_int_distribution<int> pick(i, k - 1);
        std::swap(idx[i], idx[pick(rng)]);
        out.entries[idx[i]] = -out.entries[idx[i]];
    }
    return out;
}

namespace {

int roulette_pick(const std::vector<double>& weights, double total, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (target <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

}  // namespace

GaResult evolve(int k, const GaConfig& cfg, const FitnessSpec& spec, const Geometry& g) {
    cfg.validate();
    spec.validate();

    std::vector<MaskVector> pop(cfg.population);
    for (int i = 0; i < cfg.population; ++i) {
        auto rng = rng_stream(cfg.seed, "ga.init", i);
        std::uniform_int_distribution<int> bit(0, 1);
        pop[i].entries.resize(k);
        for (int j = 0; j < k; ++j) pop[i].entries[j] = bit(rng) ? 1 : -1;
    }

    auto eval_all = [&](const std::vector<MaskVector>& p) {
        std::vector<double> f(p.size());
        std::exception_ptr err;
        #pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < static_cast<int>(p.size()); ++i) {
            try {
                f[i] = fitness(p[i], spec, g);
            } catch (...) {
                #pragma omp critical
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
        return f;
    };

    GaResult res;
    std::vector<double> fit = eval_all(pop);
    double best_ever = -1e300;

    for (int gen = 0; gen <= cfg.generations; ++gen) {
        double gen_best = *std::max_element(fit.begin(), fit.end());
        double gen_mean = std::accumulate(fit.begin(), fit.end(), 0.0) / fit.size();
        int arg_best =
            static_cast<int>(std::max_element(fit.begin(), fit.end()) - fit.begin());
        if (gen_best > best_ever) {
            best_ever = gen_best;
            res.best = pop[arg_best];
            res.best_fitness = gen_best;
        }
        res.history.push_back({gen, gen_best, gen_mean});
        if (gen == cfg.generations) break;

        // Selection weights: shifted fitness; keeps the worst individual selectable.
        double f_min = *std::min_element(fit.begin(), fit.end());
        double spread = gen_best - f_min;
        std::vector<double> weights(fit.size());
        for (std::size_t i = 0; i < fit.size(); ++i)
            weights[i] = (fit[i] - f_min) + 0.05 * spread + 1e-12;
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);

        std::vector<int> order(pop.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fit[a] > fit[b]; });

        std::vector<MaskVector> next;
        next.reserve(cfg.population);
        for (int e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);

        auto sel_rng = rng_stream(cfg.seed, "ga.select", gen);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        int child_index = 0;
        while (static_cast<int>(next.size()) < cfg.population) {
            int ia = roulette_pick(weights, total, sel_rng);
            int ib = roulette_pick(weights, total, sel_rng);
            auto op_rng = rng_stream(cfg.seed, "ga.op", gen, child_index++);
            MaskVector ca = pop[ia], cb = pop[ib];
            if (coin(sel_rng) < cfg.crossover_prob) std::tie(ca, cb) = crossover(ca, cb, op_rng);
            if (coin(sel_rng) < cfg.mutation_prob) ca = mutate(ca, cfg.mutation_loci, op_rng);
            if (coin(sel_rng) < cfg.mutation_prob) cb = mutate(cb, cfg.mutation_loci, op_rng);
            next.push_back(std::move(ca));
            if (static_cast<int>(next.size()) < cfg.population) next.push_back(std::move(cb));
        }
        pop = std::move(next);
        fit = eval_all(pop);
    }
    return res;
}

}  // namespace thintact
