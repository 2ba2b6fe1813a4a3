#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ssx/errors.hpp"
#include "ssx/post_training.hpp"

using namespace ssx;

namespace {

GenConfig tiny_cfg() {
    GenConfig cfg;
    cfg.max_rooms = 2;  // state dim 8
    cfg.t_embed_dim = 4;
    return cfg;
}

Condition tiny_cond() {
    Condition c;
    c.room_types = {0, 1};
    c.adjacencies = {{0, 1}};
    return c;
}

// reward that prefers coordinates near a fixed target layout
RewardFn target_reward(const Vec& target) {
    return [target](const LayoutVector& lv) -> std::optional<double> {
        double s = 0.0;
        for (size_t i = 0; i < lv.coords.size(); ++i) {
            const double d = lv.coords[i] - target[i];
            s += d * d;
        }
        return -s / static_cast<double>(lv.coords.size());
    };
}

} // namespace

TEST_CASE("gauss_logprob hand values") {
    CHECK(gauss_logprob(Vec{0.0}, Vec{0.0}, Vec{1.0}) == doctest::Approx(-0.91893853320467274).epsilon(1e-12));
    // quadratic vanishes when a = mu
    const int D = 7;
    Vec a(D, 3.25), mu(D, 3.25), var(D, 1.0);
    CHECK(gauss_logprob(a, mu, var) == doctest::Approx(-D / 2.0 * std::log(2 * 3.14159265358979323846)).epsilon(1e-12));
    CHECK_THROWS_AS(gauss_logprob(Vec{0.0}, Vec{0.0, 1.0}, Vec{1.0, 1.0}), DimensionError);
}

TEST_CASE("gauss_logprob matches an extended-precision reference on random triples") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int D = 1 + static_cast<int>(rng.uniform_int(6));
        Vec a(static_cast<size_t>(D)), mu(static_cast<size_t>(D)), var(static_cast<size_t>(D));
        for (int d = 0; d < D; ++d) {
            a[static_cast<size_t>(d)] = rng.uniform(-3, 3);
            mu[static_cast<size_t>(d)] = rng.uniform(-3, 3);
            var[static_cast<size_t>(d)] = 0.05 + rng.uniform();
        }
        long double ref = 0.0L;
        for (int d = 0; d < D; ++d) {
            const long double r = static_cast<long double>(a[static_cast<size_t>(d)]) - mu[static_cast<size_t>(d)];
            ref += logl(2.0L * 3.141592653589793238462643383279502884L) +
                   logl(static_cast<long double>(var[static_cast<size_t>(d)])) +
                   r * r / static_cast<long double>(var[static_cast<size_t>(d)]);
        }
        ref *= -0.5L;
        CHECK(std::fabs(gauss_logprob(a, mu, var) - static_cast<double>(ref)) < 1e-12 * (1.0 + std::fabs(static_cast<double>(ref))));
    }
}

TEST_CASE("ppo_ratio identities and clamping") {
    CHECK(ppo_ratio(-3.5, -3.5) == doctest::Approx(1.0));
    CHECK(ppo_ratio(std::log(2.0) - 1.0, -1.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(ppo_ratio(100.0, 0.0) == doctest::Approx(1e8));
    CHECK(ppo_ratio(-100.0, 0.0) == doctest::Approx(1e-8));
    // clamp engages beyond +-8 ln 10
    const double edge = 8.0 * std::log(10.0);
    CHECK(ppo_ratio(edge + 0.1, 0.0) == doctest::Approx(1e8));
    CHECK(ppo_ratio(edge - 0.1, 0.0) < 1e8);
}

TEST_CASE("clipped surrogate hand cases") {
    CHECK(clipped_surrogate(1.5, 1.0, 0.2) == doctest::Approx(1.2));
    CHECK(clipped_surrogate(0.5, -1.0, 0.2) == doctest::Approx(-0.8));
    for (double A : {-2.0, -0.5, 0.0, 0.5, 2.0}) CHECK(clipped_surrogate(1.0, A, 0.2) == doctest::Approx(A));
}

TEST_CASE("clipped surrogate never exceeds rho*A") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const double rho = std::exp(rng.uniform(-2, 2));
        const double A = rng.uniform(-2, 2);
        const double eps = 0.05 + 0.3 * rng.uniform();
        const double j = clipped_surrogate(rho, A, eps);
        CHECK(j <= rho * A + 1e-12);
    }
}

TEST_CASE("kl_estimate basics and antisymmetry") {
    CHECK(kl_estimate({-1.0, -2.0}, {-1.0, -2.0}) == doctest::Approx(0.0));
    CHECK(kl_estimate({-0.5, -1.5}, {-1.0, -2.0}) == doctest::Approx(0.5));
    Rng rng(9);
    std::vector<double> a, b;
    for (int i = 0; i < 9; ++i) {
        a.push_back(rng.uniform(-4, 0));
        b.push_back(rng.uniform(-4, 0));
    }
    CHECK(kl_estimate(a, b) == doctest::Approx(-kl_estimate(b, a)).epsilon(1e-12));
    CHECK_THROWS_AS(kl_estimate({1.0}, {1.0, 2.0}), LengthMismatchError);
    CHECK_THROWS_AS(kl_estimate({}, {}), LengthMismatchError);
}

TEST_CASE("normalize_advantages hand case and moments") {
    const auto a = normalize_advantages({1.0, 2.0, 3.0});
    REQUIRE(a.size() == 3);
    CHECK(a[0] == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(a[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(a[2] == doctest::Approx(1.2247).epsilon(1e-4));

    const auto c = normalize_advantages({4.0, 4.0, 4.0});
    for (double v : c) CHECK(v == doctest::Approx(0.0));

    const auto single = normalize_advantages({3.0});
    CHECK(single == std::vector<double>{0.0});

    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> r;
        const int n = 2 + static_cast<int>(rng.uniform_int(30));
        for (int i = 0; i < n; ++i) r.push_back(rng.uniform(-5, 5));
        const auto adv = normalize_advantages(r);
        double mean = 0.0;
        for (double v : adv) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : adv) var += (v - mean) * (v - mean);
        var /= n;
        CHECK(std::fabs(mean) < 1e-9);
        CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("clip_rewards fixed and quantile modes") {
    std::vector<double> r;
    for (int i = 0; i < 10; ++i) r.push_back(i);
    RewardClip fixed{RewardClip::Mode::Fixed, 2.0, 7.0};
    CHECK(clip_rewards(r, fixed) == std::vector<double>{2, 2, 2, 3, 4, 5, 6, 7, 7, 7});

    RewardClip all{RewardClip::Mode::Quantile, 0.0, 1.0};
    CHECK(clip_rewards(r, all) == r);

    RewardClip q{RewardClip::Mode::Quantile, 0.1, 0.9};
    const auto c = clip_rewards(r, q);
    CHECK(c.front() == doctest::Approx(0.9));
    CHECK(c.back() == doctest::Approx(8.1));
    CHECK(c[5] == doctest::Approx(5.0));

    // clipping preserves ordering (monotone non-decreasing map)
    for (size_t i = 1; i < c.size(); ++i) CHECK(c[i] >= c[i - 1]);
}

TEST_CASE("reward clip spec parsing") {
    const auto q = RewardClip::parse("quantile:0.05,0.95");
    CHECK(q.mode == RewardClip::Mode::Quantile);
    CHECK(q.lo == doctest::Approx(0.05));
    const auto f = RewardClip::parse("fixed:-5,5");
    CHECK(f.mode == RewardClip::Mode::Fixed);
    CHECK(f.lo == doctest::Approx(-5));
    CHECK_THROWS_AS(RewardClip::parse("quantile:0.9,0.1"), ConfigError);
    CHECK_THROWS_AS(RewardClip::parse("nope"), ConfigError);
}

TEST_CASE("respace allocates the stated counts in the stated segments") {
    const auto ts = respace("80,20,0,0", 1000);
    REQUIRE(ts.size() == 100);
    for (int t : ts) CHECK(t < 500);
    int below250 = 0;
    for (int t : ts) below250 += t < 250;
    CHECK(below250 == 80);
    for (size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);

    CHECK(respace("4", 4) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("respace property: strictly increasing within segment bounds") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const int n_seg = 1 + static_cast<int>(rng.uniform_int(5));
        const int t_base = 60 * n_seg;
        std::string spec;
        std::vector<int> counts;
        int total = 0;
        for (int i = 0; i < n_seg; ++i) {
            const int c = static_cast<int>(rng.uniform_int(20));
            counts.push_back(c);
            total += c;
            spec += (i ? "," : "") + std::to_string(c);
        }
        if (total == 0) {
            CHECK_THROWS_AS(respace(spec, t_base), ZeroStepsError);
            continue;
        }
        const auto ts = respace(spec, t_base);
        CHECK(static_cast<int>(ts.size()) == total);
        for (size_t i = 1; i < ts.size(); ++i) REQUIRE(ts[i] > ts[i - 1]);
        // segment bounds
        size_t k = 0;
        for (int i = 0; i < n_seg; ++i) {
            const int lo = i * t_base / n_seg;
            const int hi = (i + 1) * t_base / n_seg;
            for (int j = 0; j < counts[static_cast<size_t>(i)]; ++j, ++k) {
                REQUIRE(ts[k] >= lo);
                REQUIRE(ts[k] < hi);
            }
        }
    }
}

TEST_CASE("respace error cases") {
    CHECK_THROWS_AS(respace("", 100), SpecParseError);
    CHECK_THROWS_AS(respace("a,b", 100), SpecParseError);
    CHECK_THROWS_AS(respace("-1", 100), SpecParseError);
    CHECK_THROWS_AS(respace("0,0", 100), ZeroStepsError);
    CHECK_THROWS_AS(respace("80", 40), SpecParseError);  // more steps than the segment holds
}

TEST_CASE("schedule posterior quantities are positive where sampled") {
    const auto s = DiffusionSchedule::from_respacing("8,4,0,0", 1000);
    REQUIRE(s.length() == 12);
    for (int j = 1; j < s.length(); ++j) {
        CHECK(s.posterior_var[static_cast<size_t>(j)] > 0.0);
        CHECK(s.alpha_bar[static_cast<size_t>(j)] < s.alpha_bar[static_cast<size_t>(j - 1)]);
    }
    // final projection step: target collapses onto x0
    CHECK(s.posterior_coef_x0[0] == doctest::Approx(1.0));
    CHECK(s.posterior_coef_xt[0] == doctest::Approx(0.0));
    CHECK(s.posterior_var[0] == doctest::Approx(0.0));
}

TEST_CASE("theta = theta_old identities on a real rollout batch") {
    const auto cfg = tiny_cfg();
    const auto pol = init_policy(cfg, 5);
    const auto sched = DiffusionSchedule::from_respacing("8,4,0,0", cfg.t_base);
    ConditionSampler sampler(cfg, 2);
    Vec target(static_cast<size_t>(cfg.state_dim()), 0.25);
    PPOConfig pcfg;
    pcfg.rollouts = 8;
    const auto batch = collect_rollouts(pol, sampler, sched, target_reward(target), pcfg.rollouts, 42,
                                        pcfg.reward_clip, pcfg.adv_eps, 2);

    PPOStats stats;
    const double obj = ppo_objective(pol, batch, sched, pcfg, nullptr, &stats);
    CHECK(std::fabs(stats.mean_ratio - 1.0) < 1e-6);
    CHECK(std::fabs(stats.kl) < 1e-9);
    CHECK(stats.frac_clipped == doctest::Approx(0.0));

    // advantages are normalized: mean 0, population std 1
    double mean = 0.0;
    for (double a : batch.advantages) mean += a;
    mean /= batch.advantages.size();
    double var = 0.0;
    for (double a : batch.advantages) var += (a - mean) * (a - mean);
    var /= batch.advantages.size();
    CHECK(std::fabs(mean) < 1e-9);
    CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-4));

    // at theta_old the surrogate equals the mean advantage = 0
    CHECK(std::fabs(obj) < 1e-9);
}

TEST_CASE("ppo round with lr=0 and one sub-epoch is a no-op with KL 0") {
    const auto cfg = tiny_cfg();
    const auto pol = init_policy(cfg, 6);
    const auto sched = DiffusionSchedule::from_respacing("8,4,0,0", cfg.t_base);
    ConditionSampler sampler(cfg, 2);
    Vec target(static_cast<size_t>(cfg.state_dim()), 0.25);
    PPOConfig pcfg;
    pcfg.rollouts = 6;
    pcfg.sub_epochs = 1;
    pcfg.lr = 0.0;
    pcfg.beta_kl = 0.0;
    const auto [next, diag] = sspt_ppo_round(pol, pcfg, target_reward(target), sampler, sched, 7, 1);
    CHECK(next.W_x.data == pol.W_x.data);
    CHECK(next.b == pol.b);
    CHECK(std::fabs(diag.kl) < 1e-9);
    CHECK(diag.mean_ratio_first == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ppo objective gradient matches central finite differences") {
    const auto cfg = tiny_cfg();
    const auto pol = init_policy(cfg, 8);
    const auto sched = DiffusionSchedule::from_timesteps({5, 400}, cfg.t_base);  // 2-step chain
    ConditionSampler sampler(cfg, 2);
    Vec target(static_cast<size_t>(cfg.state_dim()), 0.3);
    PPOConfig pcfg;
    pcfg.rollouts = 4;
    pcfg.beta_kl = 0.1;  // exercise the KL path too
    const auto batch = collect_rollouts(pol, sampler, sched, target_reward(target), pcfg.rollouts, 11,
                                        pcfg.reward_clip, pcfg.adv_eps, 1);

    // evaluate the gradient away from theta_old so the ratio branch is non-trivial
    Policy at = pol;
    for (auto& v : at.W_x.data) v += 1e-3;
    PolicyGrad grad = PolicyGrad::zero(cfg);
    ppo_objective(at, batch, sched, pcfg, &grad, nullptr);

    const double h = 1e-6;
    auto fd_check = [&](auto get_ref, double analytic) {
        Policy plus = at, minus = at;
        get_ref(plus) += h;
        get_ref(minus) -= h;
        const double fd = (ppo_objective(plus, batch, sched, pcfg, nullptr, nullptr) -
                           ppo_objective(minus, batch, sched, pcfg, nullptr, nullptr)) /
                          (2 * h);
        CHECK(std::fabs(fd - analytic) <= 1e-4 * std::max(1.0, std::fabs(fd)));
    };
    fd_check([](Policy& p) -> double& { return p.W_x.data[0]; }, grad.W_x.data[0]);
    fd_check([](Policy& p) -> double& { return p.W_x.data[9]; }, grad.W_x.data[9]);
    fd_check([](Policy& p) -> double& { return p.W_t.data[2]; }, grad.W_t.data[2]);
    fd_check([](Policy& p) -> double& { return p.W_c.data[5]; }, grad.W_c.data[5]);
    fd_check([](Policy& p) -> double& { return p.b[3]; }, grad.b[3]);
}

TEST_CASE("ppo hill-climb: mean reward rises on the synthetic target") {
    const auto cfg = tiny_cfg();
    const auto sched = DiffusionSchedule::from_respacing("8,4,0,0", cfg.t_base);
    ConditionSampler sampler(cfg, 2);
    Vec target(static_cast<size_t>(cfg.state_dim()), 0.25);
    PPOConfig pcfg;
    pcfg.rollouts = 24;
    pcfg.sub_epochs = 3;
    pcfg.lr = 1e-3;
    Policy pol = init_policy(cfg, 0);
    std::vector<double> means;
    for (int round = 0; round < 6; ++round) {
        auto [next, diag] = sspt_ppo_round(pol, pcfg, target_reward(target), sampler, sched,
                                           derive_seed(99, static_cast<std::uint64_t>(round)), 2);
        pol = std::move(next);
        means.push_back(diag.mean_reward);
    }
    CHECK(means.back() > means.front());
}

TEST_CASE("rollout collection is reproducible and worker-count independent") {
    const auto cfg = tiny_cfg();
    const auto pol = init_policy(cfg, 10);
    const auto sched = DiffusionSchedule::from_respacing("8,4,0,0", cfg.t_base);
    ConditionSampler sampler(cfg, 2);
    Vec target(static_cast<size_t>(cfg.state_dim()), 0.0);
    RewardClip clip{RewardClip::Mode::Quantile, 0.05, 0.95};
    const auto b1 = collect_rollouts(pol, sampler, sched, target_reward(target), 8, 5, clip, 1e-8, 1);
    const auto b2 = collect_rollouts(pol, sampler, sched, target_reward(target), 8, 5, clip, 1e-8, 4);
    REQUIRE(b1.rewards.size() == b2.rewards.size());
    for (size_t i = 0; i < b1.rewards.size(); ++i) {
        CHECK(b1.rewards[i] == b2.rewards[i]);
        CHECK(b1.trajectories[i].x0 == b2.trajectories[i].x0);
    }
}

TEST_CASE("iter round: degenerate filter keeps everything, deterministic top-k") {
    const auto cfg = tiny_cfg();
    const auto sched = DiffusionSchedule::from_respacing("8,4,0,0", cfg.t_base);
    ConditionSampler sampler(cfg, 2);
    Vec target(static_cast<size_t>(cfg.state_dim()), 0.2);
    const auto reward = target_reward(target);

    std::vector<ScoredPlan> base;
    for (int i = 0; i < 3; ++i) {
        Condition c = tiny_cond();
        base.push_back({"base_" + std::to_string(i), program_layout(c, cfg), 0.0});
    }
    score_plans(base, reward);

    IterConfig icfg;
    icfg.samples = 4;
    icfg.topk = 100;  // K >= everything
    icfg.epochs = 1;
    icfg.lr = 1e-3;
    const Policy pol = init_policy(cfg, 12);
    const auto [p1, d1] = sspt_iter_round(pol, base, icfg, reward, sampler, sched, 5, 1);
    const auto [p2, d2] = sspt_iter_round(pol, base, icfg, reward, sampler, sched, 5, 2);
    CHECK(d1.topk_size == 7);  // 4 candidates + 3 base
    CHECK(d1.median_candidate_score == doctest::Approx(d2.median_candidate_score));
    CHECK(p1.W_x.data == p2.W_x.data);  // deterministic given the seed
}

TEST_CASE("iter round improves the fresh-sample median on the synthetic target") {
    const auto cfg = tiny_cfg();
    const auto sched = DiffusionSchedule::from_respacing("8,4,0,0", cfg.t_base);
    ConditionSampler sampler(cfg, 2);
    Vec target(static_cast<size_t>(cfg.state_dim()), 0.25);
    const auto reward = target_reward(target);

    // base set: layouts exactly at the target, scoring 0 (the maximum)
    std::vector<ScoredPlan> base;
    for (int i = 0; i < 8; ++i) {
        Condition c = tiny_cond();
        LayoutVector lv{target, c};
        base.push_back({"base_" + std::to_string(i), lv, 0.0});
    }
    score_plans(base, reward);

    IterConfig icfg;
    icfg.samples = 16;
    icfg.topk = 8;
    icfg.epochs = 40;
    icfg.lr = 1e-2;
    Policy pol = init_policy(cfg, 14);
    const auto [next, diag] = sspt_iter_round(pol, base, icfg, reward, sampler, sched, 21, 2);
    (void)next;
    CHECK(diag.median_fresh_score >= diag.median_candidate_score);
}
