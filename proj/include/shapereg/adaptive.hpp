#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "shapereg/canny.hpp"
#include "shapereg/components.hpp"
#include "shapereg/convolve.hpp"
#include "shapereg/pyramid.hpp"
#include "shapereg/raster.hpp"
#include "shapereg/resample.hpp"
#include "shapereg/svrf.hpp"

namespace shapereg {

// Feature-adaptive resampling: the slave image is decomposed into a Laplacian
// pyramid, each band is warped with a level-appropriate kernel (nearest
// neighbor at flagged small/high-contrast features on the finest band), and
// the pyramid is inverted over the output frame.

struct ResamplingRules {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> flags;    // finest-level small/random-feature mask
    std::map<int, KernelKind> kernels;  // per-level assignments for levels >= 1

    bool flagged(int x, int y) const {
        if (x < 0 || x >= width || y < 0 || y >= height) return false;
        return flags[static_cast<std::size_t>(y) * width + x] != 0;
    }

    // Default table: level 1 -> BL, level 2 -> CC, deeper -> KD16.
    KernelSpec kernel_for_level(int level) const {
        auto it = kernels.find(level);
        if (it != kernels.end()) return kernel_spec(it->second);
        if (level <= 1) return kernel_spec(KernelKind::BL);
        if (level == 2) return kernel_spec(KernelKind::CC);
        return kernel_spec(KernelKind::KD16);
    }
};

// Flags connected components that are smaller than `area_thresh` pixels AND
// locally high-contrast (3x3 max-min above `contrast_thresh`). Components are
// taken per label over the segmentation, plus isolated specks of the edge
// mask.
inline ResamplingRules classify_features_for_resampling(const Raster& img,
                                                        const LabelField& labels,
                                                        const EdgeMap& edges,
                                                        int area_thresh = 4,
                                                        double contrast_thresh = 0.3) {
    if (labels.width != img.width || labels.height != img.height ||
        edges.width != img.width || edges.height != img.height)
        throw std::invalid_argument("classify_features_for_resampling: dimension mismatch");

    ResamplingRules rules;
    rules.width = img.width;
    rules.height = img.height;
    rules.flags.assign(img.size(), 0);
    const Raster contrast = local_contrast_3x3(img);

    auto flag_component = [&](const ComponentSet& comps, const ComponentInfo& ci) {
        if (ci.area >= area_thresh) return;
        double max_contrast = 0.0;
        for (int y = 0; y < comps.height; ++y)
            for (int x = 0; x < comps.width; ++x)
                if (comps.id_at(x, y) == ci.id)
                    max_contrast = std::max(max_contrast, contrast.at(x, y));
        if (max_contrast <= contrast_thresh) return;
        for (int y = 0; y < comps.height; ++y)
            for (int x = 0; x < comps.width; ++x)
                if (comps.id_at(x, y) == ci.id)
                    rules.flags[static_cast<std::size_t>(y) * img.width + x] = 1;
    };

    for (int l = 0; l < labels.num_labels; ++l) {
        BinaryMask mask(img.width, img.height);
        bool any = false;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                if (labels.at(x, y) == l) {
                    mask.set(x, y, true);
                    any = true;
                }
        if (!any) continue;
        const ComponentSet comps = connected_components(mask);
        for (const auto& ci : component_info(comps)) flag_component(comps, ci);
    }
    {
        BinaryMask mask(img.width, img.height);
        mask.v = edges.mask;
        const ComponentSet comps = connected_components(mask);
        for (const auto& ci : component_info(comps)) flag_component(comps, ci);
    }
    return rules;
}

// Warp through the Laplacian decomposition. `map` is the pull transform in
// finest-level coordinates; band k evaluates it at 2^k-scaled coordinates.
template <class MapFn>
Raster adaptive_resample(const Raster& img, MapFn&& map, const ResamplingRules& rules,
                         int levels, int out_width, int out_height) {
    if (levels < 2) throw std::invalid_argument("adaptive_resample: need >= 2 levels");
    if (rules.width != img.width || rules.height != img.height)
        throw std::invalid_argument("adaptive_resample: rules built for different dimensions");

    const LaplacianPyramid src = laplacian_build(img, levels - 1); // throws if too deep

    const KernelSpec nn = kernel_spec(KernelKind::NN);
    const KernelSpec cc = kernel_spec(KernelKind::CC);

    LaplacianPyramid out;
    int w = out_width, h = out_height;
    for (int k = 0; k < levels - 1; ++k) {
        const Raster& band = src.bands[static_cast<std::size_t>(k)];
        const double scale = std::pow(2.0, k);
        Raster ob(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const Point p0{x * scale, y * scale};
                const Point s0 = map(p0);
                const double sx = s0.x / scale, sy = s0.y / scale;
                KernelSpec spec = k == 0
                                      ? (rules.flagged(static_cast<int>(std::lround(s0.x)),
                                                       static_cast<int>(std::lround(s0.y)))
                                             ? nn
                                             : cc)
                                      : rules.kernel_for_level(k);
                ob.at(x, y) = sample(band, sx, sy, spec);
            }
        out.bands.push_back(std::move(ob));
        w = (w + 1) / 2;
        h = (h + 1) / 2;
    }
    {
        const double scale = std::pow(2.0, levels - 1);
        const KernelSpec spec = rules.kernel_for_level(levels - 1);
        Raster ob(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const Point p0{x * scale, y * scale};
                const Point s0 = map(p0);
                ob.at(x, y) = sample(src.base, s0.x / scale, s0.y / scale, spec);
            }
        out.base = std::move(ob);
    }
    return laplacian_invert(out);
}

} // namespace shapereg
