#ifndef SSX_RECT_COVER_HPP
#define SSX_RECT_COVER_HPP

#include <optional>
#include <vector>

#include "ssx/grid.hpp"

namespace ssx {

struct Rect {
    int x0 = 0;  // inclusive top-left
    int y0 = 0;
    int w = 0;
    int h = 0;

    int area() const { return w * h; }
    int x1() const { return x0 + w; }  // exclusive
    int y1() const { return y0 + h; }

    bool operator==(const Rect& o) const { return x0 == o.x0 && y0 == o.y0 && w == o.w && h == o.h; }
};

// Empty pixel columns/rows between two rect boundaries; 0 when touching or
// overlapping on that axis. Chebyshev combination of the two axis gaps.
int rect_gap(const Rect& a, const Rect& b);

// Maximum-area all-true rectangle via the per-row histogram-stack sweep.
// Ties break by smaller y0, then smaller x0, then larger w. nullopt when the
// grid holds no true pixel.
std::optional<Rect> largest_rect(const BinaryGrid& grid);

// Greedy maximal cover: repeatedly extract largest_rect and clear it, stopping
// once the best remaining rectangle falls below a_min. Emitted rects are
// pairwise disjoint, ordered by extraction (non-increasing area).
std::vector<Rect> greedy_cover(const BinaryGrid& grid, int a_min);

} // namespace ssx

#endif
