#include "ssx/bench.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "ssx/errors.hpp"

namespace ssx {

namespace fs = std::filesystem;
using json = nlohmann::json;

void BenchConfig::validate() const {
    if (samples < 1) throw ConfigError("bench needs samples >= 1");
    if (!(train_cap < eval_rooms)) throw ConfigError("train cap must stay below the eval room count");
    if (workers < 1) throw ConfigError("workers must be >= 1");
}

namespace {

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string opt_cell(const std::optional<double>& v) { return v ? fmt9(*v) : ""; }

void collect(std::vector<double>& out, const std::optional<double>& v) {
    if (v) out.push_back(*v);
}

} // namespace

BenchReport aggregate_reports(const std::vector<PlanReport>& reports,
                              const std::optional<std::map<Category, double>>& reference,
                              const GateConfig& gates) {
    BenchReport br;
    br.total = static_cast<int>(reports.size());

    std::vector<double> v_int, v_pub, v_lr, v_la;
    std::map<Category, std::vector<double>> r_by_cat;
    std::vector<std::map<Category, double>> plan_R;
    for (const auto& r : reports) {
        if (!r.failure_stage.empty()) {
            br.failure_counts[r.failure_stage]++;
            continue;
        }
        if (!r.valid) continue;
        br.valid++;
        collect(v_int, r.integration);
        collect(v_pub, r.public_score);
        collect(v_lr, r.living_room);
        collect(v_la, r.living_adv);
        for (const auto& [g, val] : r.profile_R) r_by_cat[g].push_back(val);
        plan_R.push_back(r.profile_R);
        if (penalty(r.facts(gates), gates) < 0.0) br.failure_counts["gated"]++;
    }

    if (!v_pub.empty()) br.metric_stats["public_score"] = summarize(v_pub);
    if (!v_lr.empty()) br.metric_stats["living_room"] = summarize(v_lr);
    if (!v_la.empty()) br.metric_stats["living_adv"] = summarize(v_la);
    if (!v_int.empty()) br.metric_stats["integration"] = summarize(v_int);

    for (const auto& [g, vals] : r_by_cat) {
        ProfilePoint p;
        p.median = median_of(vals);
        p.q25 = quantile_type7(vals, 0.25);
        p.q75 = quantile_type7(vals, 0.75);
        p.count = static_cast<int>(vals.size());
        br.profile[g] = p;
    }
    br.cwri_by_category = cwri(plan_R);

    if (reference) {
        std::map<Category, double> y, y_ref;
        for (const auto& [g, p] : br.profile) {
            auto it = reference->find(g);
            if (it == reference->end()) continue;
            y[g] = p.median;
            y_ref[g] = it->second;
        }
        if (!y.empty()) {
            br.d_profile = profile_distance(y, y_ref);
            br.d_profile_categories = static_cast<int>(y.size());
        }
    }
    return br;
}

void export_summary_csv(const std::vector<PlanReport>& reports, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path);
    out << "# convex_integration_summary v1\n";
    out << "plan_id,valid,integration,public_score,living_room,living_adv";
    for (Category g : category_order()) {
        const auto n = category_name(g);
        out << ",I_" << n << ",R_" << n;
    }
    out << ",total_rooms,total_area,living_area_share\n";
    for (const auto& r : reports) {
        out << r.plan_id << "," << (r.valid ? 1 : 0) << "," << opt_cell(r.integration) << ","
            << opt_cell(r.public_score) << "," << opt_cell(r.living_room) << "," << opt_cell(r.living_adv);
        for (Category g : category_order()) {
            auto i_it = r.profile_I.find(g);
            auto r_it = r.profile_R.find(g);
            out << "," << (i_it != r.profile_I.end() ? fmt9(i_it->second) : "");
            out << "," << (r_it != r.profile_R.end() ? fmt9(r_it->second) : "");
        }
        out << "," << r.total_rooms << "," << fmt9(r.total_area) << "," << fmt9(r.living_area_share)
            << "\n";
    }
}

std::vector<SummaryRow> load_summary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open " + path);
    std::string line;
    std::vector<std::string> header;
    std::vector<SummaryRow> rows;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.push_back("");
        if (!have_header) {
            header = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != header.size())
            throw IOError(path + ": row with " + std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(header.size()));
        SummaryRow row;
        for (size_t i = 0; i < header.size(); ++i) {
            const std::string& key = header[i];
            const std::string& val = cells[i];
            if (val.empty()) continue;
            if (key == "plan_id") row.plan_id = val;
            else if (key == "valid") row.valid = val == "1";
            else if (key == "integration") row.integration = std::stod(val);
            else if (key == "public_score") row.public_score = std::stod(val);
            else if (key == "living_room") row.living_room = std::stod(val);
            else if (key == "living_adv") row.living_adv = std::stod(val);
            else if (key == "total_rooms") row.total_rooms = std::stod(val);
            else if (key == "total_area") row.total_area = std::stod(val);
            else if (key == "living_area_share") row.living_area_share = std::stod(val);
            else if (key.rfind("I_", 0) == 0) {
                if (auto c = category_from_name(key.substr(2))) row.I[*c] = std::stod(val);
            } else if (key.rfind("R_", 0) == 0) {
                if (auto c = category_from_name(key.substr(2))) row.R[*c] = std::stod(val);
            }
        }
        rows.push_back(std::move(row));
    }
    if (!have_header) throw IOError(path + ": missing header row");
    return rows;
}

BenchReport aggregate_summary(const std::vector<SummaryRow>& rows,
                              const std::optional<std::map<Category, double>>& reference) {
    BenchReport br;
    br.total = static_cast<int>(rows.size());
    std::vector<double> v_int, v_pub, v_lr, v_la;
    std::map<Category, std::vector<double>> r_by_cat;
    std::vector<std::map<Category, double>> plan_R;
    for (const auto& row : rows) {
        if (!row.valid) continue;
        br.valid++;
        collect(v_int, row.integration);
        collect(v_pub, row.public_score);
        collect(v_lr, row.living_room);
        collect(v_la, row.living_adv);
        for (const auto& [g, val] : row.R) r_by_cat[g].push_back(val);
        plan_R.push_back(row.R);
    }
    if (!v_pub.empty()) br.metric_stats["public_score"] = summarize(v_pub);
    if (!v_lr.empty()) br.metric_stats["living_room"] = summarize(v_lr);
    if (!v_la.empty()) br.metric_stats["living_adv"] = summarize(v_la);
    if (!v_int.empty()) br.metric_stats["integration"] = summarize(v_int);
    for (const auto& [g, vals] : r_by_cat) {
        ProfilePoint p;
        p.median = median_of(vals);
        p.q25 = quantile_type7(vals, 0.25);
        p.q75 = quantile_type7(vals, 0.75);
        p.count = static_cast<int>(vals.size());
        br.profile[g] = p;
    }
    br.cwri_by_category = cwri(plan_R);
    if (reference) {
        std::map<Category, double> y, y_ref;
        for (const auto& [g, p] : br.profile) {
            auto it = reference->find(g);
            if (it == reference->end()) continue;
            y[g] = p.median;
            y_ref[g] = it->second;
        }
        if (!y.empty()) {
            br.d_profile = profile_distance(y, y_ref);
            br.d_profile_categories = static_cast<int>(y.size());
        }
    }
    return br;
}

std::map<Category, double> load_reference_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open reference profile " + path);
    std::map<Category, double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line.rfind("category,", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw IOError(path + ": expected category,median");
        const auto cat = category_from_name(line.substr(0, comma));
        if (!cat) throw IOError(path + ": unknown category '" + line.substr(0, comma) + "'");
        out[*cat] = std::stod(line.substr(comma + 1));
    }
    if (out.empty()) throw IOError(path + ": empty reference profile");
    return out;
}

void save_reference_profile(const std::map<Category, double>& profile, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path);
    out << "category,median\n";
    for (Category g : category_order()) {
        auto it = profile.find(g);
        if (it != profile.end()) out << category_name(g) << "," << fmt9(it->second) << "\n";
    }
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

std::string profile_svg(const std::map<Category, ProfilePoint>& profile,
                        const std::optional<std::map<Category, double>>& reference) {
    std::vector<Category> cats;
    for (Category g : category_order())
        if (profile.count(g)) cats.push_back(g);
    if (cats.empty()) throw EmptyError("profile_svg needs at least one category");

    const double W = 640, H = 360, ml = 60, mr = 20, mt = 28, mb = 60;
    double lo = 1e300, hi = -1e300;
    for (Category g : cats) {
        const auto& p = profile.at(g);
        lo = std::min(lo, p.q25);
        hi = std::max(hi, p.q75);
        if (reference) {
            auto it = reference->find(g);
            if (it != reference->end()) {
                lo = std::min(lo, it->second);
                hi = std::max(hi, it->second);
            }
        }
    }
    const double pad = std::max(0.05, (hi - lo) * 0.1);
    lo -= pad;
    hi += pad;

    auto xpos = [&](size_t i) {
        if (cats.size() == 1) return ml + (W - ml - mr) / 2.0;
        return ml + (W - ml - mr) * static_cast<double>(i) / (cats.size() - 1);
    };
    auto ypos = [&](double v) { return mt + (H - mt - mb) * (1.0 - (v - lo) / (hi - lo)); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";

    // IQR band
    os << "<polygon fill=\"#aaccee\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (size_t i = 0; i < cats.size(); ++i)
        os << fmt2(xpos(i)) << "," << fmt2(ypos(profile.at(cats[i]).q25)) << " ";
    for (size_t i = cats.size(); i-- > 0;)
        os << fmt2(xpos(i)) << "," << fmt2(ypos(profile.at(cats[i]).q75)) << " ";
    os << "\"/>\n";

    // median polyline + markers
    if (cats.size() > 1) {
        os << "<polyline fill=\"none\" stroke=\"#1f4e9b\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < cats.size(); ++i)
            os << fmt2(xpos(i)) << "," << fmt2(ypos(profile.at(cats[i]).median)) << " ";
        os << "\"/>\n";
    }
    for (size_t i = 0; i < cats.size(); ++i)
        os << "<circle cx=\"" << fmt2(xpos(i)) << "\" cy=\"" << fmt2(ypos(profile.at(cats[i]).median))
           << "\" r=\"3\" fill=\"#1f4e9b\"/>\n";

    // reference polyline
    if (reference) {
        std::vector<std::pair<size_t, double>> pts;
        for (size_t i = 0; i < cats.size(); ++i) {
            auto it = reference->find(cats[i]);
            if (it != reference->end()) pts.push_back({i, it->second});
        }
        if (pts.size() > 1) {
            os << "<polyline fill=\"none\" stroke=\"#b33a3a\" stroke-width=\"2\" stroke-dasharray=\"6,3\" points=\"";
            for (const auto& [i, v] : pts) os << fmt2(xpos(i)) << "," << fmt2(ypos(v)) << " ";
            os << "\"/>\n";
        }
        for (const auto& [i, v] : pts)
            os << "<circle cx=\"" << fmt2(xpos(i)) << "\" cy=\"" << fmt2(ypos(v))
               << "\" r=\"3\" fill=\"#b33a3a\"/>\n";
    }

    for (size_t i = 0; i < cats.size(); ++i)
        os << "<text x=\"" << fmt2(xpos(i)) << "\" y=\"" << H - mb + 18
           << "\" font-size=\"12\" text-anchor=\"middle\">" << category_name(cats[i]) << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        os << "<text x=\"" << ml - 8 << "\" y=\"" << fmt2(ypos(v) + 4)
           << "\" font-size=\"11\" text-anchor=\"end\">" << fmt2(v) << "</text>\n";
    }
    os << "<text x=\"" << ml << "\" y=\"16\" font-size=\"13\">median relative integration profile"
       << (reference ? " (solid: run, dashed: reference)" : "") << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

void emit_profile_svg(const std::map<Category, ProfilePoint>& profile,
                      const std::optional<std::map<Category, double>>& reference,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path);
    out << profile_svg(profile, reference);
}

std::string bench_report_json(const BenchReport& r) {
    json j;
    j["schema"] = "bench_report_v1";
    j["total"] = r.total;
    j["valid"] = r.valid;
    json stats = json::object();
    for (const auto& [name, s] : r.metric_stats) {
        stats[name] = {{"mean", s.mean}, {"median", s.median}, {"std", s.std},
                       {"q25", s.q25},   {"q75", s.q75},       {"iqr", s.iqr}};
    }
    j["metrics"] = stats;
    json prof = json::object();
    for (const auto& [g, p] : r.profile)
        prof[category_name(g)] = {{"median", p.median}, {"q25", p.q25}, {"q75", p.q75}, {"count", p.count}};
    j["profile"] = prof;
    json cw = json::object();
    for (const auto& [g, v] : r.cwri_by_category) cw[category_name(g)] = v;
    j["cwri"] = cw;
    if (r.d_profile) {
        j["d_profile"] = *r.d_profile;
        j["d_profile_categories"] = r.d_profile_categories;
    } else {
        j["d_profile"] = nullptr;
    }
    j["failure_counts"] = r.failure_counts;
    return j.dump(2);
}

void write_bench_report(const BenchReport& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path);
    out << bench_report_json(r) << "\n";
}

std::vector<PlanReport> load_plan_reports(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    std::vector<PlanReport> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        std::stringstream ss;
        ss << in.rdbuf();
        out.push_back(report_from_json(ss.str()));
    }
    return out;
}

BenchReport run_bench(const Policy& pol, const BenchConfig& cfg,
                      const std::optional<std::map<Category, double>>& reference,
                      const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(fs::path(out_dir) / "plans");

    const DiffusionSchedule sched = DiffusionSchedule::from_respacing(cfg.respacing, pol.cfg.t_base);
    std::vector<PlanReport> reports(static_cast<size_t>(cfg.samples));

    auto work = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "plan_%06d", i);
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i), 0xbe7c));
            const Condition cond = sample_program(rng, pol.cfg, cfg.eval_rooms);
            const Trajectory traj = rollout(pol, cond, sched, rng);
            PlanReport report;
            try {
                const LayoutMask mask = render_layout({traj.x0, cond}, pol.cfg, cfg.oracle.codes);
                report = analyze_plan(name, mask, cfg.oracle);
                if (cfg.write_masks)
                    write_layout_png(mask, (fs::path(out_dir) / "plans" / (std::string(name) + ".png")).string());
            } catch (const DegeneratePolygonError& e) {
                report.plan_id = name;
                report.failure_stage = "build_org";
                report.flags.push_back(std::string("degenerate: ") + e.what());
            }
            std::ofstream out(fs::path(out_dir) / "plans" / (std::string(name) + ".json"),
                              std::ios::binary);
            out << report_to_json(report) << "\n";
            reports[static_cast<size_t>(i)] = std::move(report);
        }
    };
    const int workers = std::max(1, std::min(cfg.workers, cfg.samples));
    if (workers == 1) {
        work(0, cfg.samples);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(work, w * cfg.samples / workers, (w + 1) * cfg.samples / workers);
        for (auto& t : pool) t.join();
    }

    export_summary_csv(reports, (fs::path(out_dir) / "convex_integration_summary.csv").string());
    const BenchReport br = aggregate_reports(reports, reference, cfg.gates);
    write_bench_report(br, (fs::path(out_dir) / "bench_report.json").string());
    if (!br.profile.empty())
        emit_profile_svg(br.profile, reference, (fs::path(out_dir) / "profile.svg").string());
    return br;
}

} // namespace ssx
