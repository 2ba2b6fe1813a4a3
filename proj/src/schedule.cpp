#include "ssx/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssx/errors.hpp"

namespace ssx {

std::vector<int> respace(const std::string& spec, int t_base) {
    if (t_base < 1) throw SpecParseError("t_base must be >= 1");
    std::vector<long long> counts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) throw SpecParseError("empty segment count in '" + spec + "'");
        size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(tok, &pos);
        } catch (const std::exception&) {
            throw SpecParseError("bad segment count '" + tok + "'");
        }
        if (pos != tok.size() || v < 0) throw SpecParseError("bad segment count '" + tok + "'");
        counts.push_back(v);
    }
    if (counts.empty()) throw SpecParseError("empty respacing spec");

    long long total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw ZeroStepsError("respacing allocates zero timesteps");

    const long long n_seg = static_cast<long long>(counts.size());
    std::vector<int> out;
    out.reserve(static_cast<size_t>(total));
    for (long long i = 0; i < n_seg; ++i) {
        const long long start = i * t_base / n_seg;
        const long long end = (i + 1) * t_base / n_seg;
        const long long size = end - start;
        const long long c = counts[i];
        if (c == 0) continue;
        if (c > size)
            throw SpecParseError("segment " + std::to_string(i) + " wants " + std::to_string(c) +
                                 " steps but only spans " + std::to_string(size));
        for (long long j = 0; j < c; ++j) out.push_back(static_cast<int>(start + j * size / c));
    }
    return out;
}

DiffusionSchedule DiffusionSchedule::from_respacing(const std::string& spec, int t_base) {
    return from_timesteps(respace(spec, t_base), t_base);
}

DiffusionSchedule DiffusionSchedule::from_timesteps(std::vector<int> timesteps, int t_base) {
    if (timesteps.empty()) throw ZeroStepsError("empty timestep list");
    if (!std::is_sorted(timesteps.begin(), timesteps.end()) ||
        std::adjacent_find(timesteps.begin(), timesteps.end()) != timesteps.end())
        throw SpecParseError("timesteps must be strictly increasing");
    if (timesteps.front() < 0 || timesteps.back() >= t_base)
        throw SpecParseError("timesteps out of range");

    DiffusionSchedule s;
    s.t_base = t_base;
    s.timesteps = std::move(timesteps);

    // base linear-beta schedule
    const double beta_lo = 1e-4;
    const double beta_hi = 0.02;
    std::vector<double> base_abar(static_cast<size_t>(t_base));
    double acc = 1.0;
    for (int t = 0; t < t_base; ++t) {
        const double b = t_base == 1 ? beta_hi
                                     : beta_lo + (beta_hi - beta_lo) * static_cast<double>(t) /
                                                     static_cast<double>(t_base - 1);
        acc *= (1.0 - b);
        base_abar[static_cast<size_t>(t)] = acc;
    }

    const int L = s.length();
    s.alpha_bar.resize(L);
    s.beta.resize(L);
    s.alpha.resize(L);
    s.posterior_var.resize(L);
    s.posterior_coef_x0.resize(L);
    s.posterior_coef_xt.resize(L);
    double last = 1.0;
    for (int j = 0; j < L; ++j) {
        const double abar = base_abar[static_cast<size_t>(s.timesteps[j])];
        s.alpha_bar[j] = abar;
        s.beta[j] = 1.0 - abar / last;
        s.alpha[j] = 1.0 - s.beta[j];
        const double abar_prev = j == 0 ? 1.0 : s.alpha_bar[j - 1];
        s.posterior_var[j] = s.beta[j] * (1.0 - abar_prev) / (1.0 - abar);
        s.posterior_coef_x0[j] = std::sqrt(abar_prev) * s.beta[j] / (1.0 - abar);
        s.posterior_coef_xt[j] = std::sqrt(s.alpha[j]) * (1.0 - abar_prev) / (1.0 - abar);
        last = abar;
    }
    return s;
}

} // namespace ssx
