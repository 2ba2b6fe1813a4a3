#ifndef SSX_BENCH_HPP
#define SSX_BENCH_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssx/metrics.hpp"
#include "ssx/oracle.hpp"
#include "ssx/post_training.hpp"
#include "ssx/toy_generator.hpp"

namespace ssx {

struct BenchConfig {
    int train_cap = 7;    // informational; bench itself samples eval programs
    int eval_rooms = 8;   // target room count for the OOD protocol
    int samples = 200;
    std::uint64_t seed = 0;
    std::string respacing = "80,20,0,0";
    OracleParams oracle;
    GateConfig gates;
    int workers = 1;
    bool write_masks = false;

    void validate() const;  // cap < eval_rooms, samples >= 1
};

struct ProfilePoint {
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    int count = 0;
};

struct BenchReport {
    std::map<std::string, SummaryStats> metric_stats;  // public_score, living_room, living_adv, integration
    std::map<Category, ProfilePoint> profile;
    std::map<Category, double> cwri_by_category;
    std::optional<double> d_profile;
    int d_profile_categories = 0;
    int total = 0;
    int valid = 0;
    std::map<std::string, int> failure_counts;  // parse_failed / build_org / build_house / gated
};

// Aggregates per-plan reports into the bench summary; d_profile uses the
// categories present in both the run profile and the reference.
BenchReport aggregate_reports(const std::vector<PlanReport>& reports,
                              const std::optional<std::map<Category, double>>& reference,
                              const GateConfig& gates);

// Samples N plans under exact eval-room conditions, runs the oracle on each,
// writes plans/*.json + convex_integration_summary.csv + bench_report.json +
// profile.svg under out_dir, and returns the aggregate.
BenchReport run_bench(const Policy& pol, const BenchConfig& cfg,
                      const std::optional<std::map<Category, double>>& reference,
                      const std::string& out_dir);

// Stable column order, %.9g floats, LF endings, empty cells for absent values.
void export_summary_csv(const std::vector<PlanReport>& reports, const std::string& path);

struct SummaryRow {
    std::string plan_id;
    bool valid = false;
    std::optional<double> integration, public_score, living_room, living_adv;
    std::map<Category, double> I, R;
    std::optional<double> total_rooms, total_area, living_area_share;
};

std::vector<SummaryRow> load_summary_csv(const std::string& path);

// Aggregation over summary rows (fixture replay path).
BenchReport aggregate_summary(const std::vector<SummaryRow>& rows,
                              const std::optional<std::map<Category, double>>& reference);

std::map<Category, double> load_reference_profile(const std::string& path);
void save_reference_profile(const std::map<Category, double>& profile, const std::string& path);

// Deterministic SVG line plot of median profiles with IQR bands, category
// order fixed by category_order().
std::string profile_svg(const std::map<Category, ProfilePoint>& profile,
                        const std::optional<std::map<Category, double>>& reference);
void emit_profile_svg(const std::map<Category, ProfilePoint>& profile,
                      const std::optional<std::map<Category, double>>& reference,
                      const std::string& path);

std::string bench_report_json(const BenchReport& r);
void write_bench_report(const BenchReport& r, const std::string& path);

std::vector<PlanReport> load_plan_reports(const std::string& dir);

} // namespace ssx

#endif
