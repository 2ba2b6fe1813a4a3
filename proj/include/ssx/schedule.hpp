#ifndef SSX_SCHEDULE_HPP
#define SSX_SCHEDULE_HPP

#include <string>
#include <vector>

namespace ssx {

// Splits [0, t_base) into one equal segment per comma-separated count
// (low-noise segment first) and allocates count_i evenly spaced timesteps
// inside segment i. Result is strictly increasing.
std::vector<int> respace(const std::string& spec, int t_base);

// Linear-beta base schedule restricted to a subset of timesteps. Index j runs
// over the respaced chain, ascending in noise level. posterior_* entries at
// j = 0 describe the final deterministic projection onto x0 (variance 0,
// coef_x0 = 1).
struct DiffusionSchedule {
    int t_base = 0;
    std::vector<int> timesteps;      // ascending base timesteps, size L
    std::vector<double> alpha_bar;   // cumulative alpha at each chain index
    std::vector<double> beta;        // respaced per-step beta
    std::vector<double> alpha;       // 1 - beta
    std::vector<double> posterior_var;      // sigma_j^2 for the j -> j-1 transition
    std::vector<double> posterior_coef_x0;  // posterior mean = c0*x0 + ct*x_t
    std::vector<double> posterior_coef_xt;

    int length() const { return static_cast<int>(timesteps.size()); }

    static DiffusionSchedule from_respacing(const std::string& spec, int t_base);
    static DiffusionSchedule from_timesteps(std::vector<int> timesteps, int t_base);
};

} // namespace ssx

#endif
