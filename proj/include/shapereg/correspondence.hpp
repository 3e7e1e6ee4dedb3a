#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapereg/raster.hpp"

namespace shapereg {

// A matched point pair: slave-image location, master-image location, and a
// match quality score in [0,1].
struct Correspondence {
    Point slave;
    Point master;
    double score = 0.0;
};

struct CorrespondenceSet {
    std::vector<Correspondence> pairs;
    std::string source = "sift"; // "sift" or "refined"

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

// CSV format: xs,ys,xm,ym,score (one pair per line).
inline void save_correspondences(const std::string& path, const CorrespondenceSet& cs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.precision(17);
    for (const auto& c : cs.pairs)
        out << c.slave.x << "," << c.slave.y << "," << c.master.x << "," << c.master.y << ","
            << c.score << "\n";
}

inline CorrespondenceSet load_correspondences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("unreadable file: " + path);
    CorrespondenceSet cs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Correspondence c;
        char comma;
        if (!(ss >> c.slave.x >> comma >> c.slave.y >> comma >> c.master.x >> comma >>
              c.master.y >> comma >> c.score))
            throw std::runtime_error("bad correspondence at " + path + ":" +
                                     std::to_string(lineno));
        cs.pairs.push_back(c);
    }
    return cs;
}

} // namespace shapereg
