#include "ssx/rect_cover.hpp"

#include <algorithm>

#include "ssx/errors.hpp"

namespace ssx {

int rect_gap(const Rect& a, const Rect& b) {
    int gx = 0;
    if (a.x1() <= b.x0)
        gx = b.x0 - a.x1();
    else if (b.x1() <= a.x0)
        gx = a.x0 - b.x1();
    int gy = 0;
    if (a.y1() <= b.y0)
        gy = b.y0 - a.y1();
    else if (b.y1() <= a.y0)
        gy = a.y0 - b.y1();
    return std::max(gx, gy);
}

namespace {

// area desc, then y0 asc, x0 asc, w desc
bool better(const Rect& a, const Rect& b) {
    if (a.area() != b.area()) return a.area() > b.area();
    if (a.y0 != b.y0) return a.y0 < b.y0;
    if (a.x0 != b.x0) return a.x0 < b.x0;
    return a.w > b.w;
}

} // namespace

std::optional<Rect> largest_rect(const BinaryGrid& grid) {
    const int w = grid.width;
    const int h = grid.height;
    if (w == 0 || h == 0) return std::nullopt;

    std::optional<Rect> best;
    std::vector<int> heights(static_cast<size_t>(w) + 1, 0);
    std::vector<int> stack;
    stack.reserve(static_cast<size_t>(w) + 1);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) heights[x] = grid.at(x, y) ? heights[x] + 1 : 0;
        heights[w] = 0;  // sentinel flushes the stack
        stack.clear();
        for (int x = 0; x <= w; ++x) {
            while (!stack.empty() && heights[stack.back()] > heights[x]) {
                const int ht = heights[stack.back()];
                stack.pop_back();
                const int left = stack.empty() ? 0 : stack.back() + 1;
                const Rect cand{left, y - ht + 1, x - left, ht};
                if (!best || better(cand, *best)) best = cand;
            }
            stack.push_back(x);
        }
    }
    return best;
}

std::vector<Rect> greedy_cover(const BinaryGrid& grid, int a_min) {
    if (a_min < 1) throw ConfigError("greedy_cover requires a_min >= 1");
    BinaryGrid residual = grid;
    std::vector<Rect> out;
    for (;;) {
        const auto r = largest_rect(residual);
        if (!r || r->area() < a_min) break;
        out.push_back(*r);
        for (int y = r->y0; y < r->y1(); ++y)
            for (int x = r->x0; x < r->x1(); ++x) residual.at(x, y) = 0;
    }
    return out;
}

} // namespace ssx
