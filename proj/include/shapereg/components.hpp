#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "shapereg/cellular.hpp"
#include "shapereg/raster.hpp"

namespace shapereg {

// Connected-component labeling and boundary tracing shared by segmentation,
// resampling rules, and object classification.

struct ComponentSet {
    int width = 0;
    int height = 0;
    std::vector<int> ids; // -1 = background, else component index
    int count = 0;

    int id_at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
};

// 8-connected components of the mask's set pixels, indexed in scan order.
inline ComponentSet connected_components(const BinaryMask& mask) {
    ComponentSet cs;
    cs.width = mask.width;
    cs.height = mask.height;
    cs.ids.assign(mask.v.size(), -1);
    std::vector<std::size_t> stack;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * mask.width + x;
            if (!mask.v[i] || cs.ids[i] >= 0) continue;
            const int id = cs.count++;
            cs.ids[i] = id;
            stack.push_back(i);
            while (!stack.empty()) {
                const std::size_t j = stack.back();
                stack.pop_back();
                const int jx = static_cast<int>(j % mask.width);
                const int jy = static_cast<int>(j / mask.width);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int qx = jx + dx, qy = jy + dy;
                        if (qx < 0 || qx >= mask.width || qy < 0 || qy >= mask.height) continue;
                        const std::size_t q = static_cast<std::size_t>(qy) * mask.width + qx;
                        if (mask.v[q] && cs.ids[q] < 0) {
                            cs.ids[q] = id;
                            stack.push_back(q);
                        }
                    }
            }
        }
    return cs;
}

struct ComponentInfo {
    int id = -1;
    int area = 0;
    double cx = 0.0; // centroid
    double cy = 0.0;
    int seed_x = 0; // centroid snapped to the nearest in-component pixel
    int seed_y = 0;
};

inline std::vector<ComponentInfo> component_info(const ComponentSet& cs) {
    std::vector<ComponentInfo> info(static_cast<std::size_t>(cs.count));
    for (int k = 0; k < cs.count; ++k) info[k].id = k;
    for (int y = 0; y < cs.height; ++y)
        for (int x = 0; x < cs.width; ++x) {
            const int id = cs.id_at(x, y);
            if (id < 0) continue;
            info[id].area += 1;
            info[id].cx += x;
            info[id].cy += y;
        }
    for (auto& ci : info) {
        ci.cx /= std::max(1, ci.area);
        ci.cy /= std::max(1, ci.area);
    }
    // Snap centroids to the nearest pixel belonging to the component.
    std::vector<double> best(info.size(), 1e18);
    for (int y = 0; y < cs.height; ++y)
        for (int x = 0; x < cs.width; ++x) {
            const int id = cs.id_at(x, y);
            if (id < 0) continue;
            const double d = (x - info[id].cx) * (x - info[id].cx) +
                             (y - info[id].cy) * (y - info[id].cy);
            if (d < best[id]) {
                best[id] = d;
                info[id].seed_x = x;
                info[id].seed_y = y;
            }
        }
    return info;
}

// Moore-neighbor boundary trace of one component, clockwise, starting from its
// scan-order-first pixel. Returns an ordered closed contour (first point not
// repeated at the end). Single-pixel components return that pixel alone.
inline std::vector<Point> trace_contour(const ComponentSet& cs, int id) {
    if (id < 0 || id >= cs.count) throw std::invalid_argument("trace_contour: bad component id");
    int sx = -1, sy = -1;
    for (int y = 0; y < cs.height && sx < 0; ++y)
        for (int x = 0; x < cs.width; ++x)
            if (cs.id_at(x, y) == id) {
                sx = x;
                sy = y;
                break;
            }
    auto inside = [&](int x, int y) {
        return x >= 0 && x < cs.width && y >= 0 && y < cs.height && cs.id_at(x, y) == id;
    };
    // Moore neighborhood in clockwise order starting from west.
    static const int moore[8][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                    {1, 0},  {1, 1},   {0, 1},  {-1, 1}};
    std::vector<Point> contour;
    int cx = sx, cy = sy;
    int dir = 0; // index into moore[] of the backtrack direction
    contour.push_back({static_cast<double>(cx), static_cast<double>(cy)});
    const std::size_t limit = cs.ids.size() * 4 + 8;
    for (std::size_t guard = 0; guard < limit; ++guard) {
        int found = -1;
        for (int k = 0; k < 8; ++k) {
            const int probe = (dir + k) % 8;
            const int nx = cx + moore[probe][0];
            const int ny = cy + moore[probe][1];
            if (inside(nx, ny)) {
                found = probe;
                cx = nx;
                cy = ny;
                break;
            }
        }
        if (found < 0) break; // isolated pixel
        if (cx == sx && cy == sy) break;
        contour.push_back({static_cast<double>(cx), static_cast<double>(cy)});
        // Continue scanning from just past the direction we came from.
        dir = (found + 5) % 8;
    }
    return contour;
}

} // namespace shapereg
