#include "ssx/post_training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "ssx/errors.hpp"
#include "ssx/screening.hpp"
#include "ssx/stats.hpp"

namespace ssx {

RewardClip RewardClip::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("reward clip spec needs mode:lo,hi");
    const std::string mode = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    const auto comma = rest.find(',');
    if (comma == std::string::npos) throw ConfigError("reward clip spec needs two bounds");
    RewardClip rc;
    rc.lo = std::stod(rest.substr(0, comma));
    rc.hi = std::stod(rest.substr(comma + 1));
    if (mode == "fixed") {
        rc.mode = Mode::Fixed;
        if (rc.lo > rc.hi) throw ConfigError("fixed clip bounds inverted");
    } else if (mode == "quantile") {
        rc.mode = Mode::Quantile;
        if (!(rc.lo >= 0.0 && rc.lo < rc.hi && rc.hi <= 1.0))
            throw ConfigError("quantile clip needs 0 <= lo < hi <= 1");
    } else {
        throw ConfigError("unknown reward clip mode '" + mode + "'");
    }
    return rc;
}

void PPOConfig::validate() const {
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip_eps must be in (0,1)");
    if (beta_kl < 0.0) throw ConfigError("beta_kl must be >= 0");
    if (sub_epochs < 1 || rollouts < 1) throw ConfigError("sub_epochs and rollouts must be >= 1");
}

void IterConfig::validate() const {
    if (samples < 1 || topk < 1 || epochs < 0 || batch < 1) throw ConfigError("bad iter config");
}

double gauss_logprob(const Vec& a, const Vec& mu, const Vec& var) {
    if (a.size() != mu.size() || a.size() != var.size())
        throw DimensionError("gauss_logprob dimension mismatch");
    constexpr double log2pi = 1.8378770664093454835606594728112;
    double s = 0.0;
    for (size_t d = 0; d < a.size(); ++d) {
        const double r = a[d] - mu[d];
        s += log2pi + std::log(var[d]) + r * r / var[d];
    }
    return -0.5 * s;
}

double gauss_logprob(const Vec& a, const Vec& mu, double var) {
    if (a.size() != mu.size()) throw DimensionError("gauss_logprob dimension mismatch");
    constexpr double log2pi = 1.8378770664093454835606594728112;
    const double logv = std::log(var);
    double s = 0.0;
    for (size_t d = 0; d < a.size(); ++d) {
        const double r = a[d] - mu[d];
        s += log2pi + logv + r * r / var;
    }
    return -0.5 * s;
}

double ppo_ratio(double logp_new, double logp_old) {
    const double rho = std::exp(logp_new - logp_old);
    if (rho < 1e-8) return 1e-8;
    if (rho > 1e8) return 1e8;
    return rho;
}

double clipped_surrogate(double rho, double advantage, double eps) {
    const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps);
    return std::min(rho * advantage, clipped * advantage);
}

double kl_estimate(const std::vector<double>& logp_old, const std::vector<double>& logp_new) {
    if (logp_old.size() != logp_new.size() || logp_old.empty())
        throw LengthMismatchError("kl_estimate needs equal, non-empty inputs");
    double s = 0.0;
    for (size_t i = 0; i < logp_old.size(); ++i) s += logp_old[i] - logp_new[i];
    return s / static_cast<double>(logp_old.size());
}

std::vector<double> normalize_advantages(const std::vector<double>& rewards, double eps) {
    if (rewards.size() < 2) return std::vector<double>(rewards.size(), 0.0);
    const double mu = mean_of(rewards);
    const double sd = population_std(rewards);
    std::vector<double> out(rewards.size());
    for (size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mu) / (sd + eps);
    return out;
}

std::vector<double> clip_rewards(const std::vector<double>& rewards, const RewardClip& clip) {
    if (rewards.empty()) return {};
    double lo = clip.lo;
    double hi = clip.hi;
    if (clip.mode == RewardClip::Mode::Quantile) {
        lo = quantile_type7(rewards, clip.lo);
        hi = quantile_type7(rewards, clip.hi);
    }
    std::vector<double> out(rewards.size());
    for (size_t i = 0; i < rewards.size(); ++i) out[i] = std::clamp(rewards[i], lo, hi);
    return out;
}

RewardFn make_oracle_reward(const OracleParams& oracle, const GateConfig& gates, const GenConfig& gen,
                            const RewardWeights& weights) {
    return [oracle, gates, gen, weights](const LayoutVector& lv) -> std::optional<double> {
        try {
            const LayoutMask mask = render_layout(lv, gen, oracle.codes);
            const PlanReport report = analyze_plan("reward", mask, oracle);
            if (!report.valid) return std::nullopt;
            const SelectionScore s = selection_score(report.facts(gates), gates);
            if (s.hard_invalid) return std::nullopt;
            double r = weights.selection * s.s;
            if (weights.living_room != 0.0 && report.living_room) r += weights.living_room * *report.living_room;
            if (weights.public_score != 0.0 && report.public_score)
                r += weights.public_score * *report.public_score;
            if (weights.integration != 0.0 && report.integration) r += weights.integration * *report.integration;
            if (weights.profile_penalty != 0.0 && !weights.reference.empty()) {
                double dist = 0.0;
                int n = 0;
                for (const auto& [g, ref] : weights.reference) {
                    auto it = report.profile_R.find(g);
                    if (it == report.profile_R.end()) continue;
                    dist += std::fabs(it->second - ref);
                    ++n;
                }
                if (n > 0) r -= weights.profile_penalty * dist / n;
            }
            return r;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
}

RolloutBatch collect_rollouts(const Policy& pol, const ConditionSampler& sampler,
                              const DiffusionSchedule& sched, const RewardFn& reward, int n,
                              std::uint64_t seed, const RewardClip& clip, double adv_eps, int n_workers) {
    RolloutBatch batch;
    batch.trajectories.resize(static_cast<size_t>(n));
    std::vector<std::optional<double>> raw(static_cast<size_t>(n));

    auto work = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i), 0x9e37));
            const Condition cond = sampler.sample(rng);
            Trajectory traj = rollout(pol, cond, sched, rng);
            LayoutVector lv{traj.x0, cond};
            raw[static_cast<size_t>(i)] = reward(lv);
            batch.trajectories[static_cast<size_t>(i)] = std::move(traj);
        }
    };
    const int workers = std::max(1, std::min(n_workers, n));
    if (workers == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            const int lo = w * n / workers;
            const int hi = (w + 1) * n / workers;
            pool.emplace_back(work, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    // failed renders receive the gated minimum reward before clipping
    double fail_reward = clip.mode == RewardClip::Mode::Fixed ? clip.lo : 0.0;
    if (clip.mode == RewardClip::Mode::Quantile) {
        bool any = false;
        for (const auto& r : raw)
            if (r && (!any || *r < fail_reward)) {
                fail_reward = *r;
                any = true;
            }
    }
    batch.rewards.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& r = raw[static_cast<size_t>(i)];
        if (r) {
            batch.rewards[static_cast<size_t>(i)] = *r;
        } else {
            batch.rewards[static_cast<size_t>(i)] = fail_reward;
            batch.trajectories[static_cast<size_t>(i)].oracle_ok = false;
            batch.oracle_failures++;
        }
    }
    batch.clipped = clip_rewards(batch.rewards, clip);
    batch.advantages = normalize_advantages(batch.clipped, adv_eps);
    for (int i = 0; i < n; ++i) batch.trajectories[static_cast<size_t>(i)].reward = batch.rewards[static_cast<size_t>(i)];
    return batch;
}

double ppo_objective(const Policy& pol, const RolloutBatch& batch, const DiffusionSchedule& sched,
                     const PPOConfig& cfg, PolicyGrad* grad_out, PPOStats* stats_out) {
    const size_t B = batch.trajectories.size();
    if (B == 0) throw EmptyError("ppo objective over empty batch");
    double surrogate = 0.0;
    double kl = 0.0;
    double ratio_sum = 0.0;
    size_t steps_total = 0;
    size_t clipped_steps = 0;

    for (size_t ti = 0; ti < B; ++ti) {
        const Trajectory& traj = batch.trajectories[ti];
        const double A = batch.advantages[ti];
        if (traj.steps.empty()) continue;
        const double step_norm = 1.0 / (static_cast<double>(B) * traj.steps.size());
        for (const auto& st : traj.steps) {
            const MeanVar mv = p_mean_variance(pol, st.state, st.chain_index, sched, traj.cond);
            const double var = sched.posterior_var[static_cast<size_t>(st.chain_index)];
            const double logp_new = gauss_logprob(st.action, mv.mu, var);
            const double rho = ppo_ratio(logp_new, st.logp);
            const double clipped = std::clamp(rho, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
            const bool unclipped_active = rho * A <= clipped * A;
            surrogate += std::min(rho * A, clipped * A) * step_norm;
            kl += (st.logp - logp_new) * step_norm;
            ratio_sum += rho;
            ++steps_total;
            if (!unclipped_active) ++clipped_steps;

            if (grad_out) {
                const double coef = (unclipped_active ? A * rho : 0.0) + cfg.beta_kl;
                if (coef != 0.0) {
                    Vec g(mv.mu.size());
                    for (size_t d = 0; d < g.size(); ++d)
                        g[d] = coef * (st.action[d] - mv.mu[d]) / var * step_norm;
                    add_outer(grad_out->W_x, g, st.state, 1.0);
                    add_outer(grad_out->W_t, g,
                              time_embedding(st.timestep, pol.cfg.t_embed_dim, pol.cfg.t_base), 1.0);
                    add_outer(grad_out->W_c, g, encode_condition(traj.cond, pol.cfg), 1.0);
                    axpy(grad_out->b, g, 1.0);
                }
            }
        }
    }
    const double objective = surrogate - cfg.beta_kl * kl;
    if (stats_out) {
        stats_out->surrogate = surrogate;
        stats_out->kl = kl;
        stats_out->mean_ratio = steps_total ? ratio_sum / static_cast<double>(steps_total) : 1.0;
        stats_out->frac_clipped = steps_total ? static_cast<double>(clipped_steps) / steps_total : 0.0;
    }
    return objective;
}

std::pair<Policy, PPODiagnostics> sspt_ppo_round(const Policy& pol, const PPOConfig& cfg,
                                                 const RewardFn& reward, const ConditionSampler& sampler,
                                                 const DiffusionSchedule& sched, std::uint64_t round_seed,
                                                 int n_workers) {
    cfg.validate();
    const RolloutBatch batch = collect_rollouts(pol, sampler, sched, reward, cfg.rollouts, round_seed,
                                                cfg.reward_clip, cfg.adv_eps, n_workers);
    PPODiagnostics diag;
    diag.oracle_failures = batch.oracle_failures;
    diag.mean_reward = mean_of(batch.rewards);
    diag.median_reward = median_of(batch.rewards);

    Policy current = pol;
    PPOStats stats;
    for (int e = 0; e < cfg.sub_epochs; ++e) {
        PolicyGrad grad = PolicyGrad::zero(pol.cfg);
        ppo_objective(current, batch, sched, cfg, &grad, &stats);
        if (e == 0) diag.mean_ratio_first = stats.mean_ratio;
        apply_gradient(current, grad, cfg.lr);  // gradient ascent
    }
    diag.kl = stats.kl;
    diag.frac_clipped = stats.frac_clipped;
    return {current, diag};
}

void score_plans(std::vector<ScoredPlan>& plans, const RewardFn& reward) {
    for (auto& p : plans) {
        const auto r = reward(p.lv);
        p.score = r ? *r : -std::numeric_limits<double>::infinity();
    }
}

std::pair<Policy, IterDiagnostics> sspt_iter_round(const Policy& pol, const std::vector<ScoredPlan>& base,
                                                   const IterConfig& cfg, const RewardFn& reward,
                                                   const ConditionSampler& sampler,
                                                   const DiffusionSchedule& sched,
                                                   std::uint64_t round_seed, int n_workers) {
    cfg.validate();
    IterDiagnostics diag;

    auto sample_scored = [&](const Policy& p_use, std::uint64_t salt, int n,
                             std::vector<ScoredPlan>& out) {
        out.resize(static_cast<size_t>(n));
        auto work = [&](int lo, int hi) {
            for (int i = lo; i < hi; ++i) {
                Rng rng(derive_seed(round_seed, static_cast<std::uint64_t>(i), salt));
                const Condition cond = sampler.sample(rng);
                Trajectory traj = rollout(p_use, cond, sched, rng);
                ScoredPlan p;
                p.id = (salt ? "eval_" : "cand_") + std::to_string(i);
                p.lv = LayoutVector{std::move(traj.x0), cond};
                const auto r = reward(p.lv);
                p.score = r ? *r : -std::numeric_limits<double>::infinity();
                out[static_cast<size_t>(i)] = std::move(p);
            }
        };
        const int workers = std::max(1, std::min(n_workers, n));
        if (workers == 1) {
            work(0, n);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back(work, w * n / workers, (w + 1) * n / workers);
            for (auto& t : pool) t.join();
        }
    };

    std::vector<ScoredPlan> candidates;
    sample_scored(pol, 0, cfg.samples, candidates);
    for (const auto& c : candidates)
        if (std::isinf(c.score)) diag.oracle_failures++;

    std::vector<double> cand_scores;
    for (const auto& c : candidates) cand_scores.push_back(c.score);
    diag.median_candidate_score = median_of(cand_scores);

    std::vector<std::pair<std::string, double>> cand_pairs, base_pairs;
    for (const auto& c : candidates) cand_pairs.push_back({c.id, c.score});
    for (const auto& b : base) base_pairs.push_back({b.id, b.score});
    const auto selected = top_k(cand_pairs, base_pairs, static_cast<size_t>(cfg.topk));
    diag.topk_size = static_cast<int>(selected.size());

    std::map<std::string, const ScoredPlan*> by_id;
    for (const auto& c : candidates) by_id[c.id] = &c;
    for (const auto& b : base) by_id[b.id] = &b;
    std::vector<LayoutVector> train_set;
    int from_candidates = 0;
    for (const auto& id : selected) {
        const ScoredPlan* p = by_id.at(id);
        if (std::isinf(p->score)) continue;  // hard-invalid plans never train
        train_set.push_back(p->lv);
        if (id.rfind("cand_", 0) == 0) ++from_candidates;
    }
    diag.acceptance_rate = selected.empty() ? 0.0 : static_cast<double>(from_candidates) / selected.size();

    Policy current = pol;
    if (!train_set.empty()) {
        Rng train_rng(derive_seed(round_seed, 0xf17e, 2));
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            // deterministic shuffle per epoch
            std::vector<size_t> order(train_set.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            for (size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[train_rng.uniform_int(i)]);
            for (size_t lo = 0; lo < order.size(); lo += static_cast<size_t>(cfg.batch)) {
                std::vector<LayoutVector> minibatch;
                for (size_t k = lo; k < std::min(order.size(), lo + static_cast<size_t>(cfg.batch)); ++k)
                    minibatch.push_back(train_set[order[k]]);
                auto [loss, next] = denoising_step(current, minibatch, sched, train_rng, cfg.lr);
                (void)loss;
                current = std::move(next);
            }
        }
    }

    std::vector<ScoredPlan> fresh;
    sample_scored(current, 1, cfg.samples, fresh);
    std::vector<double> fresh_scores;
    for (const auto& f : fresh) fresh_scores.push_back(f.score);
    diag.median_fresh_score = median_of(fresh_scores);

    return {current, diag};
}

} // namespace ssx
