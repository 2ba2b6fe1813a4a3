#ifndef SSX_LINALG_HPP
#define SSX_LINALG_HPP

#include <cstddef>
#include <vector>

#include "ssx/errors.hpp"

namespace ssx {

using Vec = std::vector<double>;

// Dense row-major matrix, sized for the small affine policies used here.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline Vec matvec(const Mat& m, const Vec& x) {
    if (static_cast<int>(x.size()) != m.cols) throw DimensionError("matvec dimension mismatch");
    Vec y(static_cast<size_t>(m.rows), 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        const double* row = m.data.data() + static_cast<size_t>(r) * m.cols;
        for (int c = 0; c < m.cols; ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

// m += scale * g * x^T
inline void add_outer(Mat& m, const Vec& g, const Vec& x, double scale) {
    if (static_cast<int>(g.size()) != m.rows || static_cast<int>(x.size()) != m.cols)
        throw DimensionError("add_outer dimension mismatch");
    for (int r = 0; r < m.rows; ++r) {
        double* row = m.data.data() + static_cast<size_t>(r) * m.cols;
        const double gs = g[r] * scale;
        for (int c = 0; c < m.cols; ++c) row[c] += gs * x[c];
    }
}

inline void axpy(Vec& y, const Vec& x, double a) {
    if (y.size() != x.size()) throw DimensionError("axpy dimension mismatch");
    for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline void mat_axpy(Mat& y, const Mat& x, double a) {
    if (!y.same_shape(x)) throw DimensionError("mat_axpy dimension mismatch");
    for (size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

} // namespace ssx

#endif
