#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssx/bench.hpp"
#include "ssx/cli.hpp"
#include "ssx/errors.hpp"

using namespace ssx;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(SSX_FIXTURE_DIR) + "/" + name; }
std::string config(const std::string& name) { return std::string(SSX_CONFIG_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<PlanReport> fixture_corpus() {
    GenConfig gen;
    OracleParams params;
    params.graph.a_min = 12;
    Rng rng(71);
    std::vector<PlanReport> reports;
    for (int i = 0; i < 5; ++i) {
        const auto cond = sample_program(rng, gen, 3 + i);
        const auto mask = render_layout(program_layout(cond, gen), gen, params.codes);
        char name[16];
        std::snprintf(name, sizeof(name), "fx_%03d", i);
        reports.push_back(analyze_plan(name, mask, params));
    }
    return reports;
}

} // namespace

TEST_CASE("fixture replay reproduces the frozen checkpoint medians and profile distances") {
    const auto ref = load_reference_profile(config("reference_profile_rplan8.csv"));
    REQUIRE(ref.size() == 9);

    struct Expect {
        const char* file;
        double public_median;
        double living_room;
        double living_adv;
        double d_profile;
    };
    const Expect cases[] = {
        {"summary_baseline.csv", 0.1292, 1.3397, 0.2413, 0.1131},
        {"summary_iter5.csv", 0.1820, 1.4195, 0.3149, 0.0912},
        {"summary_ppo10.csv", 0.2244, 1.4169, 0.3522, 0.0663},
    };
    for (const auto& c : cases) {
        const auto rows = load_summary_csv(fixture(c.file));
        REQUIRE(rows.size() == 5);
        const auto br = aggregate_summary(rows, ref);
        REQUIRE(br.metric_stats.count("public_score") == 1);
        CHECK(br.metric_stats.at("public_score").median == doctest::Approx(c.public_median).epsilon(1e-9));
        CHECK(br.metric_stats.at("living_room").median == doctest::Approx(c.living_room).epsilon(1e-9));
        CHECK(br.metric_stats.at("living_adv").median == doctest::Approx(c.living_adv).epsilon(1e-9));
        REQUIRE(br.d_profile.has_value());
        CHECK(br.d_profile_categories == 9);
        CHECK(*br.d_profile == doctest::Approx(c.d_profile).epsilon(1e-9));
    }
}

TEST_CASE("summary csv export: header, column count, empty cells") {
    const auto reports = fixture_corpus();
    const auto dir = fresh_dir("ssx_csv_test");
    const auto path = (dir / "convex_integration_summary.csv").string();
    export_summary_csv(reports, path);
    const auto text = slurp(path);
    CHECK(text.rfind("# convex_integration_summary v1\n", 0) == 0);
    CHECK(text.find("\r") == std::string::npos);  // LF endings only

    std::stringstream ss(text);
    std::string line;
    std::getline(ss, line);  // comment
    std::getline(ss, line);  // header
    const auto count_cells = [](const std::string& s) {
        return std::count(s.begin(), s.end(), ',') + 1;
    };
    const auto expect = count_cells(line);
    int rows = 0;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        CHECK(count_cells(line) == expect);
        ++rows;
    }
    CHECK(rows == 5);
    CHECK(text.find("nan") == std::string::npos);
    CHECK(text.find("inf") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("summary csv round-trips through the loader") {
    const auto reports = fixture_corpus();
    const auto dir = fresh_dir("ssx_csv_rt");
    const auto path = (dir / "s.csv").string();
    export_summary_csv(reports, path);
    const auto rows = load_summary_csv(path);
    REQUIRE(rows.size() == reports.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].plan_id == reports[i].plan_id);
        CHECK(rows[i].valid == reports[i].valid);
        if (reports[i].public_score) {
            REQUIRE(rows[i].public_score.has_value());
            CHECK(*rows[i].public_score == doctest::Approx(*reports[i].public_score).epsilon(1e-7));
        }
        for (const auto& [g, v] : reports[i].profile_R) {
            REQUIRE(rows[i].R.count(g) == 1);
            CHECK(rows[i].R.at(g) == doctest::Approx(v).epsilon(1e-7));
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("summary csv golden file stays frozen") {
    const auto reports = fixture_corpus();
    const auto dir = fresh_dir("ssx_golden");
    const auto path = (dir / "golden.csv").string();
    export_summary_csv(reports, path);
    CHECK(slurp(path) == slurp(fixture("golden_summary.csv")));
    fs::remove_all(dir);
}

TEST_CASE("plan report json round-trips") {
    const auto reports = fixture_corpus();
    for (const auto& r : reports) {
        const auto back = report_from_json(report_to_json(r));
        CHECK(back.plan_id == r.plan_id);
        CHECK(back.valid == r.valid);
        CHECK(back.total_rooms == r.total_rooms);
        CHECK(back.profile_R.size() == r.profile_R.size());
        if (r.integration) CHECK(*back.integration == doctest::Approx(*r.integration).epsilon(1e-12));
        REQUIRE(back.rooms.size() == r.rooms.size());
        for (size_t i = 0; i < r.rooms.size(); ++i)
            CHECK(back.rooms[i].instance_id == r.rooms[i].instance_id);
    }
}

TEST_CASE("analyze_png_bytes maps parse failures to a failure stage") {
    OracleParams params;
    const std::vector<std::uint8_t> junk = {9, 9, 9};
    const auto r = analyze_png_bytes("bad", junk, params);
    CHECK_FALSE(r.valid);
    CHECK(r.failure_stage == "parse_failed");
    GateConfig gates;
    CHECK(outcome_of(r, gates) == PlanOutcome::ParseFailed);
}

TEST_CASE("profile svg determinism and single-category handling") {
    std::map<Category, ProfilePoint> profile;
    profile[Category::Living] = {1.4, 1.3, 1.5, 10};
    const auto one = profile_svg(profile, std::nullopt);
    CHECK(one.find("<circle") != std::string::npos);

    profile[Category::Bedroom] = {1.0, 0.9, 1.1, 10};
    profile[Category::Kitchen] = {0.9, 0.8, 1.0, 10};
    std::map<Category, double> ref = {{Category::Living, 1.6}, {Category::Bedroom, 0.92}};
    const auto a = profile_svg(profile, ref);
    const auto b = profile_svg(profile, ref);
    CHECK(a == b);
    CHECK(a.find("polyline") != std::string::npos);
    CHECK(a.find("dasharray") != std::string::npos);

    // identical run and reference produce two coincident polylines
    std::map<Category, double> same = {{Category::Living, 1.4}, {Category::Bedroom, 1.0},
                                       {Category::Kitchen, 0.9}};
    const auto c = profile_svg(profile, same);
    CHECK(c.find("polyline") != std::string::npos);
}

TEST_CASE("run_bench writes a replayable run directory deterministically") {
    GenConfig gen;
    Policy pol = init_policy(gen, 77);
    // brief warm-up so some plans are valid
    const auto sched = DiffusionSchedule::from_respacing("8,4,0,0", gen.t_base);
    Rng warm(3);
    std::vector<LayoutVector> base;
    Rng brng(4);
    for (int i = 0; i < 8; ++i) base.push_back(program_layout(sample_program(brng, gen, 4), gen));
    for (int s = 0; s < 60; ++s) pol = denoising_step(pol, base, sched, warm, 5e-3).second;

    BenchConfig cfg;
    cfg.samples = 12;
    cfg.seed = 5;
    cfg.respacing = "8,4,0,0";
    cfg.workers = 3;
    cfg.oracle.graph.a_min = 12;
    const auto ref = load_reference_profile(config("reference_profile_rplan8.csv"));

    const auto d1 = fresh_dir("ssx_bench_a");
    const auto d2 = fresh_dir("ssx_bench_b");
    const auto r1 = run_bench(pol, cfg, ref, d1.string());
    cfg.workers = 1;
    const auto r2 = run_bench(pol, cfg, ref, d2.string());
    CHECK(r1.total == 12);
    CHECK(slurp((d1 / "convex_integration_summary.csv").string()) ==
          slurp((d2 / "convex_integration_summary.csv").string()));
    CHECK(slurp((d1 / "bench_report.json").string()) == slurp((d2 / "bench_report.json").string()));
    if (fs::exists(d1 / "profile.svg"))
        CHECK(slurp((d1 / "profile.svg").string()) == slurp((d2 / "profile.svg").string()));

    // the report is a pure function of the per-plan files
    const auto reloaded = load_plan_reports((d1 / "plans").string());
    REQUIRE(static_cast<int>(reloaded.size()) == cfg.samples);
    const auto br = aggregate_reports(reloaded, ref, cfg.gates);
    CHECK(br.valid == r1.valid);
    if (r1.d_profile) CHECK(*br.d_profile == doctest::Approx(*r1.d_profile).epsilon(1e-12));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("bench config invariant: cap below eval rooms") {
    BenchConfig cfg;
    cfg.train_cap = 8;
    cfg.eval_rooms = 8;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("cli: no arguments is a usage error (exit 2)") {
    const char* argv[] = {"ssx"};
    CHECK(cli_dispatch(1, argv) == 2);
    const char* argv2[] = {"ssx", "--help"};
    CHECK(cli_dispatch(2, argv2) == 0);
    const char* argv3[] = {"ssx", "frobnicate"};
    CHECK(cli_dispatch(2, argv3) == 2);
}

TEST_CASE("cli analyze: runs over a png directory and writes the summary") {
    // build a small corpus of rendered masks on disk
    GenConfig gen;
    OracleParams params;
    Rng rng(81);
    const auto dir = fresh_dir("ssx_cli_masks");
    for (int i = 0; i < 3; ++i) {
        const auto cond = sample_program(rng, gen, 4);
        const auto mask = render_layout(program_layout(cond, gen), gen, params.codes);
        char name[16];
        std::snprintf(name, sizeof(name), "m_%02d.png", i);
        write_layout_png(mask, (dir / name).string());
    }
    const auto out = fresh_dir("ssx_cli_out");
    const std::string in_s = dir.string(), out_s = out.string();
    const char* argv[] = {"ssx", "analyze", "--input", in_s.c_str(), "--out", out_s.c_str(),
                          "--min-rect-area", "12"};
    CHECK(cli_dispatch(8, argv) == 0);
    CHECK(fs::exists(out / "convex_integration_summary.csv"));
    CHECK(fs::exists(out / "plans" / "m_00.json"));

    // data error: missing directory → exit 1
    const char* argv_bad[] = {"ssx", "analyze", "--input", "/nonexistent_dir_xyz", "--out", out_s.c_str()};
    CHECK(cli_dispatch(6, argv_bad) == 1);
    fs::remove_all(dir);
    fs::remove_all(out);
}

TEST_CASE("cli screen: emits filtered ids and the cleaning ledger") {
    GenConfig gen;
    OracleParams params;
    Rng rng(83);
    const auto dir = fresh_dir("ssx_screen_masks");
    for (int i = 0; i < 4; ++i) {
        const auto cond = sample_program(rng, gen, 5);
        const auto mask = render_layout(program_layout(cond, gen), gen, params.codes);
        char name[16];
        std::snprintf(name, sizeof(name), "p_%02d.png", i);
        write_layout_png(mask, (dir / name).string());
    }
    // one junk file that fails to parse
    std::ofstream junk(dir / "zz_junk.png", std::ios::binary);
    junk << "not a png";
    junk.close();

    const auto out = fresh_dir("ssx_screen_out");
    const std::string in_s = dir.string(), out_s = out.string();
    const char* argv[] = {"ssx", "screen", "--input", in_s.c_str(), "--out", out_s.c_str(),
                          "--min-rect-area", "12"};
    CHECK(cli_dispatch(8, argv) == 0);
    const auto ledger = slurp((out / "cleaning_ledger.csv").string());
    CHECK(ledger.find("parse_failed,1") != std::string::npos);
    CHECK(fs::exists(out / "filtered_ids.txt"));
    fs::remove_all(dir);
    fs::remove_all(out);
}

TEST_CASE("cwri appears in the bench report json") {
    const auto reports = fixture_corpus();
    GateConfig gates;
    const auto br = aggregate_reports(reports, std::nullopt, gates);
    const auto js = bench_report_json(br);
    CHECK(js.find("\"cwri\"") != std::string::npos);
    CHECK(js.find("\"living\"") != std::string::npos);
}
