#pragma once

#include "remi/core/types.hpp"

#include <cstdint>
#include <vector>

namespace remi::testing {

// Reference mask: for every pixel center, count ring edges crossed by a ray
// toward +x (even-odd per ring), then union rings and spans. Quadratic and
// deliberately naive. Works in doubled coordinates so centers are integers.
inline std::vector<std::uint8_t> oracle_mask(const MaskRegion& m, int w, int h) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            long long cx = 2LL * x + 1, cy = 2LL * y + 1;
            bool in = false;
            for (auto ring : m.polygons) {
                while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
                int crossings = 0;
                for (std::size_t i = 0; i < ring.size(); ++i) {
                    const auto& a = ring[i];
                    const auto& b = ring[(i + 1) % ring.size()];
                    long long ay = 2LL * a.y, by = 2LL * b.y, ax = 2LL * a.x, bx = 2LL * b.x;
                    bool straddles = (ay <= cy && cy < by) || (by <= cy && cy < ay);
                    if (!straddles) continue;
                    // ix = ax + (cy - ay) * (bx - ax) / (by - ay); count when ix > cx.
                    long long lhs = ax * (by - ay) + (cy - ay) * (bx - ax);
                    long long rhs = cx * (by - ay);
                    if (by - ay > 0 ? lhs > rhs : lhs < rhs) ++crossings;
                }
                if (crossings % 2 == 1) in = true;
            }
            for (const auto& s : m.spans)
                if (s.y == y && x >= s.x && x < s.x + s.length) in = true;
            out[static_cast<std::size_t>(y) * w + x] = in ? 1 : 0;
        }
    }
    return out;
}

}  // namespace remi::testing
