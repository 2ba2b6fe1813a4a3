#include "ssx/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "ssx/bench.hpp"
#include "ssx/errors.hpp"
#include "ssx/oracle.hpp"
#include "ssx/post_training.hpp"

namespace ssx {

namespace fs = std::filesystem;

namespace {

int env_workers() {
    if (const char* w = std::getenv("SSX_WORKERS")) {
        const int n = std::atoi(w);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(4u, hc ? hc : 1u));
}

struct OracleFlags {
    int min_rect_area = 50;
    int touch_dist = 2;
    int door_reach = 2;
    std::string method = "hh";
    bool raw_ra = false;
    bool strict_codes = false;
    std::string codes_file;
    std::string gate_file;
    std::string public_extra;  // e.g. "dining" to widen the public set

    void add_to(CLI::App* cmd) {
        cmd->add_option("--min-rect-area", min_rect_area, "minimum rectangle area in px^2");
        cmd->add_option("--touch-dist", touch_dist, "within-room touch distance in px");
        cmd->add_option("--door-reach", door_reach, "door-to-core reach in px");
        cmd->add_option("--method", method, "integration method")->check(CLI::IsMember({"hh", "closeness"}));
        cmd->add_flag("--raw-ra", raw_ra, "skip the D-value normalization of RA");
        cmd->add_flag("--strict-codes", strict_codes, "error on unknown boundary codes");
        cmd->add_option("--codes", codes_file, "channel code table file");
        cmd->add_option("--gate-config", gate_file, "validity gate config file");
        cmd->add_option("--public-set", public_extra, "extra public categories, comma separated");
    }

    OracleParams oracle() const {
        OracleParams p;
        if (!codes_file.empty()) p.codes = load_code_table(codes_file);
        p.graph.a_min = min_rect_area;
        p.graph.touch_dist = touch_dist;
        p.graph.door_reach = door_reach;
        p.method = method == "hh" ? Method::HH : Method::Closeness;
        p.raw_ra = raw_ra;
        p.strict_codes = strict_codes;
        if (!public_extra.empty()) {
            std::stringstream ss(public_extra);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                auto c = category_from_name(tok);
                if (!c) throw ConfigError("unknown category '" + tok + "' in --public-set");
                p.categories.public_set.insert(*c);
            }
        }
        return p;
    }

    GateConfig gates() const {
        return gate_file.empty() ? GateConfig{} : load_gate_config(gate_file);
    }
};

std::vector<std::string> png_files_sorted(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw IOError("not a directory: " + dir);
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".png") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<PlanReport> analyze_dir(const std::string& input, const OracleParams& params) {
    const auto files = png_files_sorted(input);
    if (files.empty()) throw IOError("no .png files in " + input);
    std::vector<PlanReport> reports;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        reports.push_back(analyze_png_bytes(fs::path(f).stem().string(), bytes, params));
    }
    return reports;
}

void write_reports(const std::vector<PlanReport>& reports, const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "plans");
    for (const auto& r : reports) {
        std::ofstream out(fs::path(out_dir) / "plans" / (r.plan_id + ".json"), std::ios::binary);
        out << report_to_json(r) << "\n";
    }
    export_summary_csv(reports, (fs::path(out_dir) / "convex_integration_summary.csv").string());
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"space-syntax oracle and post-training toolkit"};
    app.require_subcommand(1);

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "run the oracle over a directory of 4-channel PNG masks");
    OracleFlags an_flags;
    std::string an_input, an_out;
    analyze->add_option("--input", an_input, "directory of .png masks")->required();
    analyze->add_option("--out", an_out, "output directory")->required();
    an_flags.add_to(analyze);

    // ---- screen ----
    auto* screen = app.add_subcommand("screen", "validity screening: filtered id list + cleaning ledger");
    OracleFlags sc_flags;
    std::string sc_input, sc_out;
    screen->add_option("--input", sc_input, "directory of .png masks")->required();
    screen->add_option("--out", sc_out, "output directory")->required();
    sc_flags.add_to(screen);

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "sample plans under eval conditions and aggregate metrics");
    OracleFlags be_flags;
    std::string be_ckpt, be_out, be_ref, be_respacing = "80,20,0,0";
    int be_samples = 200, be_rooms = 8, be_cap = 7;
    std::uint64_t be_seed = 0;
    bool be_masks = false;
    bench->add_option("--checkpoint", be_ckpt, "policy checkpoint")->required();
    bench->add_option("--out", be_out, "run directory")->required();
    bench->add_option("--samples", be_samples, "plans per run");
    bench->add_option("--eval-rooms", be_rooms, "room count of eval programs");
    bench->add_option("--cap", be_cap, "train-condition room cap (for the cap < eval check)");
    bench->add_option("--seed", be_seed, "master seed");
    bench->add_option("--respacing", be_respacing, "timestep respacing spec");
    bench->add_option("--reference", be_ref, "reference profile CSV for d_profile");
    bench->add_flag("--dump-masks", be_masks, "also write rendered PNG masks");
    be_flags.add_to(bench);

    // ---- train-iter ----
    auto* titer = app.add_subcommand("train-iter", "iterative top-k retraining rounds");
    OracleFlags ti_flags;
    std::string ti_ckpt_in, ti_out, ti_respacing = "80,20,0,0", ti_programs;
    int ti_rounds = 5, ti_samples = 32, ti_topk = 16, ti_epochs = 30, ti_cap = 7, ti_base = 16,
        ti_warmup = 200, ti_batch = 16;
    double ti_lr = 5e-3;
    std::uint64_t ti_seed = 0;
    titer->add_option("--rounds", ti_rounds, "training rounds");
    titer->add_option("--samples", ti_samples, "candidates per round");
    titer->add_option("--topk", ti_topk, "top-k selection size");
    titer->add_option("--epochs", ti_epochs, "denoising epochs per round");
    titer->add_option("--batch", ti_batch, "minibatch size");
    titer->add_option("--lr", ti_lr, "learning rate");
    titer->add_option("--seed", ti_seed, "master seed");
    titer->add_option("--cap", ti_cap, "train-condition room cap");
    titer->add_option("--base-size", ti_base, "procedural base set size");
    titer->add_option("--warmup", ti_warmup, "denoising warm-up steps before round 0");
    titer->add_option("--respacing", ti_respacing, "timestep respacing spec");
    titer->add_option("--checkpoint", ti_ckpt_in, "starting checkpoint (fresh init when absent)");
    titer->add_option("--programs", ti_programs, "JSONL program file for the base set");
    titer->add_option("--out", ti_out, "run directory")->required();
    ti_flags.add_to(titer);

    // ---- train-ppo ----
    auto* tppo = app.add_subcommand("train-ppo", "on-policy PPO rounds with oracle rewards");
    OracleFlags tp_flags;
    std::string tp_ckpt_in, tp_out, tp_respacing = "80,20,0,0", tp_clip = "quantile:0.05,0.95";
    int tp_rounds = 10, tp_rollouts = 32, tp_sub = 4, tp_cap = 7, tp_warmup = 200;
    double tp_lr = 1e-3, tp_eps = 0.2, tp_beta = 0.0;
    std::uint64_t tp_seed = 0;
    tppo->add_option("--rounds", tp_rounds, "training rounds");
    tppo->add_option("--rollouts", tp_rollouts, "trajectories per round");
    tppo->add_option("--sub-epochs", tp_sub, "optimization passes per round");
    tppo->add_option("--clip-eps", tp_eps, "PPO clip epsilon");
    tppo->add_option("--beta-kl", tp_beta, "KL penalty weight");
    tppo->add_option("--reward-clip", tp_clip, "reward clip spec, fixed:lo,hi or quantile:lo,hi");
    tppo->add_option("--lr", tp_lr, "learning rate");
    tppo->add_option("--seed", tp_seed, "master seed");
    tppo->add_option("--cap", tp_cap, "train-condition room cap");
    tppo->add_option("--warmup", tp_warmup, "denoising warm-up steps before round 0");
    tppo->add_option("--respacing", tp_respacing, "timestep respacing spec");
    tppo->add_option("--checkpoint", tp_ckpt_in, "starting checkpoint (fresh init when absent)");
    tppo->add_option("--out", tp_out, "run directory")->required();
    tp_flags.add_to(tppo);

    // ---- plot ----
    auto* plot = app.add_subcommand("plot", "profile SVG from a summary CSV");
    std::string pl_summary, pl_out, pl_ref;
    plot->add_option("--summary", pl_summary, "convex_integration_summary.csv")->required();
    plot->add_option("--out", pl_out, "output SVG path")->required();
    plot->add_option("--reference", pl_ref, "reference profile CSV");

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        std::cerr << "run with --help for the full option list\n";
        return 2;
    }

    const int workers = env_workers();
    try {
        if (*analyze) {
            const auto reports = analyze_dir(an_input, an_flags.oracle());
            write_reports(reports, an_out);
            const auto br = aggregate_reports(reports, std::nullopt, an_flags.gates());
            write_bench_report(br, (fs::path(an_out) / "bench_report.json").string());
            std::printf("analyzed %d plans, %d valid\n", br.total, br.valid);
            return 0;
        }
        if (*screen) {
            const auto params = sc_flags.oracle();
            const auto cfg = sc_flags.gates();
            const auto reports = analyze_dir(sc_input, params);
            fs::create_directories(sc_out);
            std::vector<PlanOutcome> outcomes;
            std::ofstream ids(fs::path(sc_out) / "filtered_ids.txt", std::ios::binary);
            for (const auto& r : reports) {
                const PlanOutcome o = outcome_of(r, cfg);
                outcomes.push_back(o);
                if (o == PlanOutcome::Usable) ids << r.plan_id << "\n";
            }
            const CleaningLedger ledger = clean_dataset(outcomes);
            std::ofstream lout(fs::path(sc_out) / "cleaning_ledger.csv", std::ios::binary);
            lout << ledger.to_csv();
            std::printf("screened %zu plans: %zu usable (%.2f%%)\n", ledger.total, ledger.usable,
                        ledger.usable_pct());
            return 0;
        }
        if (*bench) {
            BenchConfig cfg;
            cfg.train_cap = be_cap;
            cfg.eval_rooms = be_rooms;
            cfg.samples = be_samples;
            cfg.seed = be_seed;
            cfg.respacing = be_respacing;
            cfg.oracle = be_flags.oracle();
            cfg.gates = be_flags.gates();
            cfg.workers = workers;
            cfg.write_masks = be_masks;
            const Policy pol = load_policy(be_ckpt);
            std::optional<std::map<Category, double>> ref;
            if (!be_ref.empty()) ref = load_reference_profile(be_ref);
            const BenchReport br = run_bench(pol, cfg, ref, be_out);
            std::printf("bench: %d plans, %d valid", br.total, br.valid);
            if (br.d_profile) std::printf(", d_profile %.4f", *br.d_profile);
            std::printf("\n");
            return 0;
        }
        if (*titer) {
            GenConfig gen;
            Policy pol = ti_ckpt_in.empty() ? init_policy(gen, ti_seed) : load_policy(ti_ckpt_in);
            const DiffusionSchedule sched = DiffusionSchedule::from_respacing(ti_respacing, pol.cfg.t_base);
            const auto oracle = ti_flags.oracle();
            const auto gates = ti_flags.gates();
            const RewardFn reward = make_oracle_reward(oracle, gates, pol.cfg);
            ConditionSampler sampler(pol.cfg, ti_cap);

            std::vector<ScoredPlan> base;
            Rng base_rng(derive_seed(ti_seed, 0xba5e, 0));
            if (!ti_programs.empty()) {
                int i = 0;
                for (const auto& c : load_programs_jsonl(ti_programs))
                    base.push_back({"base_" + std::to_string(i++), program_layout(c, pol.cfg), 0.0});
            } else {
                for (int i = 0; i < ti_base; ++i) {
                    const int m = 3 + static_cast<int>(base_rng.uniform_int(static_cast<std::uint64_t>(ti_cap - 2)));
                    const Condition c = sample_program(base_rng, pol.cfg, m);
                    base.push_back({"base_" + std::to_string(i), program_layout(c, pol.cfg), 0.0});
                }
            }
            score_plans(base, reward);

            fs::create_directories(ti_out);
            std::vector<LayoutVector> warm_set;
            for (const auto& b : base) warm_set.push_back(b.lv);
            Rng warm_rng(derive_seed(ti_seed, 0x3a9, 1));
            for (int s = 0; s < ti_warmup; ++s) {
                auto [loss, next] = denoising_step(pol, warm_set, sched, warm_rng, ti_lr);
                (void)loss;
                pol = std::move(next);
            }

            IterConfig icfg;
            icfg.samples = ti_samples;
            icfg.topk = ti_topk;
            icfg.epochs = ti_epochs;
            icfg.batch = ti_batch;
            icfg.lr = ti_lr;
            icfg.respacing = ti_respacing;

            std::ofstream log(fs::path(ti_out) / "train_log.csv", std::ios::binary);
            log << "round,seconds,median_candidate,median_fresh,acceptance,topk,oracle_failures\n";
            double first_median = 0.0, last_median = 0.0, hours = 0.0;
            for (int round = 0; round < ti_rounds; ++round) {
                const auto t0 = std::chrono::steady_clock::now();
                auto [next, diag] = sspt_iter_round(pol, base, icfg, reward, sampler, sched,
                                                    derive_seed(ti_seed, 0x17e4, static_cast<std::uint64_t>(round)),
                                                    workers);
                pol = std::move(next);
                const double secs = seconds_since(t0);
                hours += secs / 3600.0;
                if (round == 0) first_median = diag.median_candidate_score;
                last_median = diag.median_fresh_score;
                char line[256];
                std::snprintf(line, sizeof(line), "%d,%.3f,%.6g,%.6g,%.4f,%d,%d\n", round, secs,
                              diag.median_candidate_score, diag.median_fresh_score, diag.acceptance_rate,
                              diag.topk_size, diag.oracle_failures);
                log << line;
                log.flush();
                std::printf("iter round %d: candidate median %.4f -> fresh median %.4f (%.1fs)\n", round,
                            diag.median_candidate_score, diag.median_fresh_score, secs);
            }
            save_policy(pol, (fs::path(ti_out) / "policy_final.ckpt").string());
            if (hours > 0)
                std::printf("delta median selection score per hour: %.5f\n",
                            (last_median - first_median) / hours);
            std::printf("ood guard: %llu conditions sampled, %llu cap violations\n",
                        static_cast<unsigned long long>(sampler.sampled_count()),
                        static_cast<unsigned long long>(sampler.cap_violations()));
            return 0;
        }
        if (*tppo) {
            GenConfig gen;
            Policy pol = tp_ckpt_in.empty() ? init_policy(gen, tp_seed) : load_policy(tp_ckpt_in);
            const DiffusionSchedule sched = DiffusionSchedule::from_respacing(tp_respacing, pol.cfg.t_base);
            const auto oracle = tp_flags.oracle();
            const auto gates = tp_flags.gates();
            const RewardFn reward = make_oracle_reward(oracle, gates, pol.cfg);
            ConditionSampler sampler(pol.cfg, tp_cap);

            if (tp_warmup > 0) {
                Rng base_rng(derive_seed(tp_seed, 0xba5e, 0));
                std::vector<LayoutVector> warm_set;
                for (int i = 0; i < 16; ++i) {
                    const int m = 3 + static_cast<int>(base_rng.uniform_int(static_cast<std::uint64_t>(tp_cap - 2)));
                    warm_set.push_back(program_layout(sample_program(base_rng, pol.cfg, m), pol.cfg));
                }
                Rng warm_rng(derive_seed(tp_seed, 0x3a9, 1));
                for (int s = 0; s < tp_warmup; ++s) {
                    auto [loss, next] = denoising_step(pol, warm_set, sched, warm_rng, 5e-3);
                    (void)loss;
                    pol = std::move(next);
                }
            }

            PPOConfig pcfg;
            pcfg.clip_eps = tp_eps;
            pcfg.beta_kl = tp_beta;
            pcfg.sub_epochs = tp_sub;
            pcfg.rollouts = tp_rollouts;
            pcfg.reward_clip = RewardClip::parse(tp_clip);
            pcfg.respacing = tp_respacing;
            pcfg.lr = tp_lr;

            fs::create_directories(tp_out);
            std::ofstream log(fs::path(tp_out) / "train_log.csv", std::ios::binary);
            log << "round,seconds,mean_reward,median_reward,mean_ratio_first,kl,frac_clipped,oracle_failures\n";
            double first_median = 0.0, last_median = 0.0, hours = 0.0;
            for (int round = 0; round < tp_rounds; ++round) {
                const auto t0 = std::chrono::steady_clock::now();
                auto [next, diag] = sspt_ppo_round(pol, pcfg, reward, sampler, sched,
                                                   derive_seed(tp_seed, 0x990, static_cast<std::uint64_t>(round)),
                                                   workers);
                pol = std::move(next);
                const double secs = seconds_since(t0);
                hours += secs / 3600.0;
                if (round == 0) first_median = diag.median_reward;
                last_median = diag.median_reward;
                char line[256];
                std::snprintf(line, sizeof(line), "%d,%.3f,%.6g,%.6g,%.6f,%.6g,%.4f,%d\n", round, secs,
                              diag.mean_reward, diag.median_reward, diag.mean_ratio_first, diag.kl,
                              diag.frac_clipped, diag.oracle_failures);
                log << line;
                log.flush();
                std::printf("ppo round %d: mean reward %.4f, median %.4f (%.1fs)\n", round,
                            diag.mean_reward, diag.median_reward, secs);
            }
            save_policy(pol, (fs::path(tp_out) / "policy_final.ckpt").string());
            if (hours > 0)
                std::printf("delta median reward per hour: %.5f\n", (last_median - first_median) / hours);
            std::printf("ood guard: %llu conditions sampled, %llu cap violations\n",
                        static_cast<unsigned long long>(sampler.sampled_count()),
                        static_cast<unsigned long long>(sampler.cap_violations()));
            return 0;
        }
        if (*plot) {
            const auto rows = load_summary_csv(pl_summary);
            std::optional<std::map<Category, double>> ref;
            if (!pl_ref.empty()) ref = load_reference_profile(pl_ref);
            const BenchReport br = aggregate_summary(rows, ref);
            if (br.profile.empty()) throw EmptyError("summary holds no profile data");
            emit_profile_svg(br.profile, ref, pl_out);
            std::printf("wrote %s\n", pl_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace ssx
