#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "shapereg/ga.hpp"
#include "shapereg/raster.hpp"
#include "shapereg/rng.hpp"

namespace shapereg {

// Continuous cellular network dynamics on the pixel grid. A cell's state
// evolves by forward Euler:  x <- x + dt * (-x + A*y + B*u + z)  with the
// piecewise-linear output y = clamp(x, -1, 1), feedback template A, control
// template B over the static input u, and bias z.

struct Gene {
    std::array<double, 9> feedback{}; // A, row-major 3x3
    std::array<double, 9> control{};  // B, row-major 3x3
    double bias = 0.0;                // z
    double dt = 1.0;                  // Euler step, (0, 1]

    static constexpr int kEntryCount = 20; // 9 + 9 + bias + dt

    double entry(int i) const {
        if (i < 9) return feedback[i];
        if (i < 18) return control[i - 9];
        return i == 18 ? bias : dt;
    }

    void set_entry(int i, double v) {
        if (i < 9)
            feedback[i] = v;
        else if (i < 18)
            control[i - 9] = v;
        else if (i == 18)
            bias = v;
        else
            dt = std::clamp(v, 0.05, 1.0);
    }

    void validate() const {
        for (int i = 0; i < kEntryCount; ++i)
            if (!std::isfinite(entry(i))) throw std::invalid_argument("Gene: non-finite entry");
        if (!(dt > 0.0 && dt <= 1.0)) throw std::invalid_argument("Gene: dt must be in (0,1]");
    }

    std::array<std::uint8_t, kEntryCount * 8> payload_bytes() const {
        std::array<std::uint8_t, kEntryCount * 8> out;
        for (int i = 0; i < kEntryCount; ++i) {
            std::uint64_t bits;
            const double v = entry(i);
            std::memcpy(&bits, &v, 8);
            for (int b = 0; b < 8; ++b)
                out[static_cast<std::size_t>(i) * 8 + b] =
                    static_cast<std::uint8_t>(bits >> (8 * b));
        }
        return out;
    }

    // Stable FNV-1a hash of the numeric payload.
    std::uint64_t rule_id() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (std::uint8_t b : payload_bytes()) {
            h ^= b;
            h *= 0x100000001b3ull;
        }
        return h;
    }
};

struct CAState {
    int width = 0;
    int height = 0;
    std::vector<double> x;
    double threshold = 0.0; // binarization cut for mask extraction

    CAState() = default;
    CAState(int w, int h, double fill = 0.0)
        : width(w), height(h), x(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1) throw std::invalid_argument("CAState: dimensions must be >= 1");
    }

    double& at(int xx, int yy) { return x[static_cast<std::size_t>(yy) * width + xx]; }
    double at(int xx, int yy) const { return x[static_cast<std::size_t>(yy) * width + xx]; }
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> v;

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

    bool at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool b) { v[static_cast<std::size_t>(y) * width + x] = b ? 1 : 0; }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto b : v) c += b;
        return c;
    }
};

// One synchronous update step. Borders fold by reflect-101 like everywhere
// else in the library.
inline CAState cnn_step(const CAState& s, const Gene& g, const Raster& u) {
    if (u.width != s.width || u.height != s.height)
        throw std::invalid_argument("cnn_step: input dimensions must match state");
    CAState out = s;
    auto y_of = [](double x) { return std::clamp(x, -1.0, 1.0); };
    for (int yy = 0; yy < s.height; ++yy) {
        for (int xx = 0; xx < s.width; ++xx) {
            double a_sum = 0.0, b_sum = 0.0;
            int k = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx, ++k) {
                    const int px = reflect101(xx + dx, s.width);
                    const int py = reflect101(yy + dy, s.height);
                    a_sum += g.feedback[k] * y_of(s.at(px, py));
                    b_sum += g.control[k] * u.at(px, py);
                }
            const double x = s.at(xx, yy);
            out.at(xx, yy) = x + g.dt * (-x + a_sum + b_sum + g.bias);
        }
    }
    return out;
}

inline BinaryMask binarize(const CAState& s) {
    BinaryMask m(s.width, s.height);
    for (std::size_t i = 0; i < s.x.size(); ++i) m.v[i] = s.x[i] > s.threshold ? 1 : 0;
    return m;
}

struct EvolveResult {
    BinaryMask mask;
    bool converged = false;
    int steps = 0;
};

// Iterate cnn_step until the binarized mask holds still for 3 consecutive
// steps or max_steps is exhausted. Non-convergence is flagged, not fatal.
inline EvolveResult evolve_to_segmentation(const CAState& seed, const Gene& g,
                                           const Raster& input, int max_steps) {
    if (max_steps < 1) throw std::invalid_argument("evolve_to_segmentation: max_steps >= 1");
    CAState state = seed;
    BinaryMask mask = binarize(state);
    int stable = 0;
    int t = 0;
    while (t < max_steps) {
        state = cnn_step(state, g, input);
        ++t;
        BinaryMask next = binarize(state);
        stable = next.v == mask.v ? stable + 1 : 0;
        mask = std::move(next);
        if (stable >= 3) return {std::move(mask), true, t};
    }
    return {std::move(mask), false, t};
}

// Pixel-overlap F1 between a mask and the target.
inline double mask_f1(const BinaryMask& m, const BinaryMask& target) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < m.v.size(); ++i) {
        if (m.v[i] && target.v[i]) ++tp;
        else if (m.v[i]) ++fp;
        else if (target.v[i]) ++fn;
    }
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

struct InverseEvolveOptions {
    GAParams ga;
    int max_steps = 25;            // CNN evolution budget per fitness evaluation
    double stop_fitness = 1.0;     // early exit once reached
    std::vector<Gene> seed_genes;  // injected into the initial population
};

struct InverseEvolveResult {
    Gene best;
    double best_fitness = 0.0;
    std::vector<double> best_history; // per generation, non-decreasing
    std::vector<double> mean_history;
};

// GA search for a gene that evolves `seed` under `input` into `target`.
// Deterministic for a fixed rng_seed; elitism keeps the best-so-far fitness
// non-decreasing. Mutation mass is steered toward payload entries whose past
// changes improved the evolved mask.
inline InverseEvolveResult inverse_evolve_ga(const CAState& seed, const BinaryMask& target,
                                             const Raster& input,
                                             const InverseEvolveOptions& opts,
                                             std::uint64_t rng_seed) {
    opts.ga.validate();
    if (target.width != seed.width || target.height != seed.height ||
        target.width < 1 || target.height < 1)
        throw std::invalid_argument("inverse_evolve_ga: target dimensions must match seed");
    // An all-background target is legal: F1 treats empty-vs-empty as a perfect
    // match, so a decay gene scores 1.0 on it.

    Rng rng(rng_seed);
    const int pop_n = opts.ga.population;

    auto random_gene = [&]() {
        Gene g;
        for (int i = 0; i < 9; ++i) g.feedback[i] = rng.uniform(-2.0, 2.0);
        for (int i = 0; i < 9; ++i) g.control[i] = rng.uniform(-2.0, 2.0);
        g.bias = rng.uniform(-2.0, 2.0);
        g.dt = rng.uniform(0.1, 1.0);
        return g;
    };

    struct Individual {
        Gene gene;
        double fitness = -1.0;
    };

    auto evaluate = [&](const Gene& g) {
        return mask_f1(evolve_to_segmentation(seed, g, input, opts.max_steps).mask, target);
    };

    std::vector<Individual> pop(static_cast<std::size_t>(pop_n));
    for (int i = 0; i < pop_n; ++i) {
        pop[i].gene = i < static_cast<int>(opts.seed_genes.size()) ? opts.seed_genes[i]
                                                                   : random_gene();
        pop[i].fitness = evaluate(pop[i].gene);
    }

    std::array<double, Gene::kEntryCount> heat{};
    InverseEvolveResult result;
    auto record = [&]() {
        double best = -1.0, sum = 0.0;
        int best_i = 0;
        for (int i = 0; i < pop_n; ++i) {
            sum += pop[i].fitness;
            if (pop[i].fitness > best) {
                best = pop[i].fitness;
                best_i = i;
            }
        }
        result.best_history.push_back(best);
        result.mean_history.push_back(sum / pop_n);
        if (best > result.best_fitness || result.best_history.size() == 1) {
            result.best_fitness = best;
            result.best = pop[best_i].gene;
        }
    };
    record();

    auto tournament = [&]() -> const Individual& {
        int best = rng.index(pop_n);
        for (int k = 1; k < opts.ga.tournament; ++k) {
            const int c = rng.index(pop_n);
            if (pop[c].fitness > pop[best].fitness ||
                (pop[c].fitness == pop[best].fitness && c < best))
                best = c;
        }
        return pop[static_cast<std::size_t>(best)];
    };

    for (int gen = 1; gen <= opts.ga.generations; ++gen) {
        if (result.best_fitness >= opts.stop_fitness) break;

        // Elites survive unchanged (stable sort by fitness desc, index asc).
        std::vector<int> order(static_cast<std::size_t>(pop_n));
        for (int i = 0; i < pop_n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return pop[a].fitness > pop[b].fitness;
        });

        double max_heat = 0.0;
        for (double h : heat) max_heat = std::max(max_heat, h);

        std::vector<Individual> next;
        next.reserve(static_cast<std::size_t>(pop_n));
        for (int e = 0; e < opts.ga.elitism; ++e) next.push_back(pop[order[e]]);

        while (static_cast<int>(next.size()) < pop_n) {
            const Individual& pa = tournament();
            const Individual& pb = tournament();
            Individual child;
            child.gene = pa.gene;
            if (rng.uniform() < opts.ga.crossover_rate) {
                for (int i = 0; i < Gene::kEntryCount; ++i)
                    if (rng.uniform() < 0.5) child.gene.set_entry(i, pb.gene.entry(i));
            }
            std::vector<int> changed;
            for (int i = 0; i < Gene::kEntryCount; ++i) {
                const double bias_w =
                    max_heat > 0.0 ? 0.5 + 1.5 * heat[i] / max_heat : 1.0;
                if (rng.uniform() < opts.ga.mutation_rate * bias_w) {
                    child.gene.set_entry(i, child.gene.entry(i) +
                                                rng.gaussian(0.0, opts.ga.mutation_sigma));
                    changed.push_back(i);
                }
            }
            child.fitness = evaluate(child.gene);
            if (child.fitness > pa.fitness)
                for (int i : changed) heat[i] += child.fitness - pa.fitness;
            next.push_back(std::move(child));
        }
        pop = std::move(next);
        record();
    }
    return result;
}

} // namespace shapereg
