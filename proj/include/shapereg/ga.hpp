#pragma once

#include <stdexcept>

namespace shapereg {

// Shared GA knobs. Individual encodings, fitness, and operators live with the
// modules that use them.
struct GAParams {
    int population = 32;
    int generations = 60;
    int tournament = 3;
    double crossover_rate = 0.8;
    double mutation_rate = 0.05;
    double mutation_sigma = 0.3;
    int elitism = 2;

    void validate() const {
        if (population < 4) throw std::invalid_argument("GAParams: population must be >= 4");
        if (generations < 0) throw std::invalid_argument("GAParams: negative generation count");
        if (tournament < 1 || tournament > population)
            throw std::invalid_argument("GAParams: bad tournament size");
        if (crossover_rate < 0 || crossover_rate > 1 || mutation_rate < 0 || mutation_rate > 1)
            throw std::invalid_argument("GAParams: rates must lie in [0,1]");
        if (elitism < 0 || elitism >= population)
            throw std::invalid_argument("GAParams: elitism must be in [0, population)");
    }
};

} // namespace shapereg
