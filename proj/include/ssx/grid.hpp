#ifndef SSX_GRID_HPP
#define SSX_GRID_HPP

#include <cstdint>
#include <vector>

namespace ssx {

// Row-major 2D grid. (x, y) indexing with y = row, x = column.
template <typename T>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    T& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool same_shape(const Grid& o) const { return width == o.width && height == o.height; }
    size_t size() const { return data.size(); }

    bool operator==(const Grid& o) const {
        return width == o.width && height == o.height && data == o.data;
    }
};

using ByteGrid = Grid<std::uint8_t>;
using BinaryGrid = Grid<std::uint8_t>; // 0 = false, 1 = true

inline size_t count_set(const BinaryGrid& g) {
    size_t n = 0;
    for (auto v : g.data) n += (v != 0);
    return n;
}

} // namespace ssx

#endif
