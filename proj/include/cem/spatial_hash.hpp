#pragma once

// Uniform spatial-hash broad phase over bounding circles. Produces exactly
// the pairs whose COM distance is within the radius sum plus margin, with
// immovable-immovable pairs excluded, in a deterministic sorted order.

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "cem/math.hpp"

namespace cem {

struct BroadPhaseEntry {
    Vec2 pos;
    double radius = 0.0;
    bool movable = true;
};

inline std::vector<std::pair<int, int>> broad_phase(const std::vector<BroadPhaseEntry>& bodies,
                                                    double margin) {
    std::vector<std::pair<int, int>> pairs;
    if (bodies.size() < 2) return pairs;

    double max_r = 0.0;
    for (const auto& b : bodies) max_r = std::max(max_r, b.radius);
    const double cell = std::max(2.0 * max_r + margin, 1e-6);
    const double inv_cell = 1.0 / cell;

    auto key = [](int32_t ix, int32_t iy) {
        return (static_cast<uint64_t>(static_cast<uint32_t>(ix)) << 32) |
               static_cast<uint32_t>(iy);
    };
    std::unordered_map<uint64_t, std::vector<int>> grid;
    grid.reserve(bodies.size() * 2);
    std::vector<std::pair<int32_t, int32_t>> cells(bodies.size());
    for (size_t i = 0; i < bodies.size(); ++i) {
        cells[i] = {static_cast<int32_t>(std::floor(bodies[i].pos.x * inv_cell)),
                    static_cast<int32_t>(std::floor(bodies[i].pos.y * inv_cell))};
        grid[key(cells[i].first, cells[i].second)].push_back(static_cast<int>(i));
    }

    for (size_t i = 0; i < bodies.size(); ++i) {
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                const auto it = grid.find(key(cells[i].first + dx, cells[i].second + dy));
                if (it == grid.end()) continue;
                for (int j : it->second) {
                    if (j <= static_cast<int>(i)) continue;
                    if (!bodies[i].movable && !bodies[j].movable) continue;
                    const double reach = bodies[i].radius + bodies[j].radius + margin;
                    if ((bodies[i].pos - bodies[j].pos).norm() <= reach)
                        pairs.emplace_back(static_cast<int>(i), j);
                }
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace cem
