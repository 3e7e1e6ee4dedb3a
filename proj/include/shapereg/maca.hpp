#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace shapereg {

// Multiple-attractor cellular automaton over a 1-D register: the additive
// {rule 90, rule 150} family with null boundaries. Linear over GF(2), so
// attractor basins partition the state space and designated bit positions of
// the attractor identify the basin.

using BitPattern = std::vector<std::uint8_t>; // one cell per element, values 0/1

struct MACAConfig {
    int n = 0;                       // register length
    std::vector<std::uint8_t> rules; // 90 or 150 per cell
    int depth = 0;                   // max iterations before giving up
    std::vector<int> pef_positions;  // distinct bit indices, each < n

    void validate() const {
        if (n < 1) throw std::invalid_argument("MACAConfig: n must be >= 1");
        if (static_cast<int>(rules.size()) != n)
            throw std::invalid_argument("MACAConfig: rule vector length must equal n");
        for (auto r : rules)
            if (r != 90 && r != 150)
                throw std::invalid_argument("MACAConfig: rules restricted to {90, 150}");
        if (depth < 1) throw std::invalid_argument("MACAConfig: depth must be >= 1");
        if (pef_positions.empty() || static_cast<int>(pef_positions.size()) > n)
            throw std::invalid_argument("MACAConfig: need 1..n pef positions");
        std::vector<int> sorted = pef_positions;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (sorted[i] < 0 || sorted[i] >= n)
                throw std::invalid_argument("MACAConfig: pef position out of range");
            if (i > 0 && sorted[i] == sorted[i - 1])
                throw std::invalid_argument("MACAConfig: pef positions must be distinct");
        }
    }

    bool same_family(const MACAConfig& o) const {
        return n == o.n && rules == o.rules && pef_positions == o.pef_positions;
    }
};

// Default config used when none is specified: alternating 90/150 rules and m
// evenly spread PEF positions, depth = n.
inline MACAConfig default_maca_config(int n, int m) {
    MACAConfig cfg;
    cfg.n = n;
    cfg.depth = n;
    cfg.rules.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cfg.rules[i] = i % 2 == 0 ? 90 : 150;
    m = std::max(1, std::min(m, n));
    for (int i = 0; i < m; ++i)
        cfg.pef_positions.push_back(static_cast<int>((static_cast<long long>(i) * n) / m));
    return cfg;
}

// next[i] = s[i-1] XOR (rule150 ? s[i] : 0) XOR s[i+1], null boundary.
inline BitPattern maca_step(const BitPattern& s, const MACAConfig& cfg) {
    BitPattern next(s.size());
    const int n = cfg.n;
    for (int i = 0; i < n; ++i) {
        std::uint8_t v = 0;
        if (i > 0) v ^= s[i - 1];
        if (cfg.rules[i] == 150) v ^= s[i];
        if (i + 1 < n) v ^= s[i + 1];
        next[i] = v;
    }
    return next;
}

struct AttractorResult {
    BitPattern representative; // first repeated state along the trajectory
    int steps = 0;             // iterations taken until the repeat (or depth)
    bool cycled = false;       // false when depth ran out first
};

namespace maca_detail {

struct PatternHash {
    std::size_t operator()(const BitPattern& p) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (std::uint8_t b : p) {
            h ^= b;
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

} // namespace maca_detail

// Run the register until a state repeats (fixed point or cycle entry) or the
// depth budget is exhausted; the first repeated state is the attractor
// representative.
inline AttractorResult maca_attractor(const BitPattern& pattern, const MACAConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(pattern.size()) != cfg.n)
        throw std::invalid_argument("maca_attractor: pattern length must equal n");
    std::unordered_map<BitPattern, int, maca_detail::PatternHash> seen;
    BitPattern state = pattern;
    seen.emplace(state, 0);
    for (int t = 1; t <= cfg.depth; ++t) {
        state = maca_step(state, cfg);
        if (seen.count(state)) return {state, t, true};
        seen.emplace(state, t);
    }
    return {state, cfg.depth, false};
}

inline std::vector<std::uint8_t> extract_pef_bits(const BitPattern& state,
                                                  const MACAConfig& cfg) {
    std::vector<std::uint8_t> bits;
    bits.reserve(cfg.pef_positions.size());
    for (int p : cfg.pef_positions) bits.push_back(state[static_cast<std::size_t>(p)]);
    return bits;
}

struct ClassifyResult {
    std::string label = "unknown";
    std::vector<std::uint8_t> pef_bits;
};

// Forward declaration; definition in rule_db.hpp.
struct ShapeRuleDB;

} // namespace shapereg
