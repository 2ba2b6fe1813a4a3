#ifndef SSX_STATS_HPP
#define SSX_STATS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssx/errors.hpp"

namespace ssx {

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw EmptyError("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Linear-interpolation quantile (type 7): h = (n-1)q.
inline double quantile_type7(std::vector<double> v, double q) {
    if (v.empty()) throw EmptyError("quantile of empty sample");
    if (q < 0.0) q = 0.0;
    if (q > 1.0) q = 1.0;
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const size_t lo = static_cast<size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

inline double median_of(const std::vector<double>& v) { return quantile_type7(v, 0.5); }

// Median absolute deviation, raw (no consistency constant).
inline double mad_of(const std::vector<double>& v) {
    const double med = median_of(v);
    std::vector<double> dev(v.size());
    for (size_t i = 0; i < v.size(); ++i) dev[i] = std::fabs(v[i] - med);
    return median_of(dev);
}

// Sample standard deviation (ddof = 1); 0 for n = 1.
inline double sample_std(const std::vector<double>& v) {
    if (v.empty()) throw EmptyError("std of empty sample");
    if (v.size() == 1) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Population standard deviation (ddof = 0).
inline double population_std(const std::vector<double>& v) {
    if (v.empty()) throw EmptyError("std of empty sample");
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

} // namespace ssx

#endif
