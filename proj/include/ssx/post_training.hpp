#ifndef SSX_POST_TRAINING_HPP
#define SSX_POST_TRAINING_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssx/metrics.hpp"
#include "ssx/oracle.hpp"
#include "ssx/schedule.hpp"
#include "ssx/toy_generator.hpp"

namespace ssx {

struct RewardClip {
    enum class Mode { Fixed, Quantile };
    Mode mode = Mode::Quantile;
    double lo = 0.05;
    double hi = 0.95;

    // "quantile:0.05,0.95" or "fixed:-5,5"
    static RewardClip parse(const std::string& spec);
};

struct PPOConfig {
    double clip_eps = 0.2;
    double beta_kl = 0.0;
    int sub_epochs = 4;
    int rollouts = 32;
    RewardClip reward_clip;
    std::string respacing = "80,20,0,0";
    double lr = 1e-3;
    double adv_eps = 1e-8;
    void validate() const;
};

struct IterConfig {
    int samples = 32;
    int topk = 16;
    int epochs = 30;
    int batch = 16;
    double lr = 5e-3;
    std::string respacing = "80,20,0,0";
    void validate() const;
};

// Exact diagonal-Gaussian log density, summed over flattened coordinates.
double gauss_logprob(const Vec& a, const Vec& mu, const Vec& var);
double gauss_logprob(const Vec& a, const Vec& mu, double var);

// exp(logp_new - logp_old), clamped to [1e-8, 1e8].
double ppo_ratio(double logp_new, double logp_old);

// min(rho*A, clip(rho, 1-eps, 1+eps)*A)
double clipped_surrogate(double rho, double advantage, double eps);

// (1/T) sum_t (logp_old - logp_new)
double kl_estimate(const std::vector<double>& logp_old, const std::vector<double>& logp_new);

// (R - mean) / (population std + eps); fewer than two rewards yield zeros.
std::vector<double> normalize_advantages(const std::vector<double>& rewards, double eps = 1e-8);

std::vector<double> clip_rewards(const std::vector<double>& rewards, const RewardClip& clip);

// Terminal reward hook: nullopt marks an oracle failure (failed render or
// unusable plan); those trajectories receive the gated minimum reward.
using RewardFn = std::function<std::optional<double>(const LayoutVector&)>;

// Hybrid reward: weighted sum of oracle outputs on top of the selection score.
struct RewardWeights {
    double selection = 1.0;
    double living_room = 0.0;
    double public_score = 0.0;
    double integration = 0.0;
    double profile_penalty = 0.0;  // subtracts distance to the reference profile
    std::map<Category, double> reference;
};

RewardFn make_oracle_reward(const OracleParams& oracle, const GateConfig& gates, const GenConfig& gen,
                            const RewardWeights& weights = {});

struct RolloutBatch {
    std::vector<Trajectory> trajectories;
    std::vector<double> rewards;     // raw, failures substituted with the gated minimum
    std::vector<double> clipped;
    std::vector<double> advantages;  // zero-mean, unit population std
    int oracle_failures = 0;
};

// Per-rollout seeds derive from `seed`, so results are identical for any
// worker count.
RolloutBatch collect_rollouts(const Policy& pol, const ConditionSampler& sampler,
                              const DiffusionSchedule& sched, const RewardFn& reward, int n,
                              std::uint64_t seed, const RewardClip& clip, double adv_eps,
                              int n_workers = 1);

struct PPOStats {
    double mean_ratio = 0.0;
    double kl = 0.0;
    double frac_clipped = 0.0;
    double surrogate = 0.0;
};

// Timestep-averaged clipped surrogate minus beta_kl * KL, evaluated against a
// frozen rollout batch. Analytic gradients accumulate into grad_out.
double ppo_objective(const Policy& pol, const RolloutBatch& batch, const DiffusionSchedule& sched,
                     const PPOConfig& cfg, PolicyGrad* grad_out, PPOStats* stats_out);

struct PPODiagnostics {
    double mean_reward = 0.0;
    double median_reward = 0.0;
    double mean_ratio_first = 1.0;
    double kl = 0.0;
    double frac_clipped = 0.0;
    int oracle_failures = 0;
};

std::pair<Policy, PPODiagnostics> sspt_ppo_round(const Policy& pol, const PPOConfig& cfg,
                                                 const RewardFn& reward, const ConditionSampler& sampler,
                                                 const DiffusionSchedule& sched, std::uint64_t round_seed,
                                                 int n_workers = 1);

struct ScoredPlan {
    std::string id;
    LayoutVector lv;
    double score = 0.0;
};

// Scores the base set once; cached scores are reused across rounds.
void score_plans(std::vector<ScoredPlan>& plans, const RewardFn& reward);

struct IterDiagnostics {
    double median_candidate_score = 0.0;  // fresh samples before the update
    double median_fresh_score = 0.0;      // fresh samples after the update
    double acceptance_rate = 0.0;         // top-k fraction drawn from candidates
    int topk_size = 0;
    int oracle_failures = 0;
};

std::pair<Policy, IterDiagnostics> sspt_iter_round(const Policy& pol,
                                                   const std::vector<ScoredPlan>& base,
                                                   const IterConfig& cfg, const RewardFn& reward,
                                                   const ConditionSampler& sampler,
                                                   const DiffusionSchedule& sched,
                                                   std::uint64_t round_seed, int n_workers = 1);

} // namespace ssx

#endif
