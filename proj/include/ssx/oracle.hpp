#ifndef SSX_ORACLE_HPP
#define SSX_ORACLE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ssx/channel_codes.hpp"
#include "ssx/integration.hpp"
#include "ssx/mask_io.hpp"
#include "ssx/metrics.hpp"
#include "ssx/screening.hpp"
#include "ssx/syntax_graph.hpp"

namespace ssx {

struct OracleParams {
    ChannelCodeTable codes = ChannelCodeTable::rplan_default();
    CategoryMap categories = CategoryMap::rplan_default();
    GraphParams graph;
    Method method = Method::HH;
    bool raw_ra = false;
    double eps_ra = 1e-6;
    bool strict_codes = false;
    bool strict_connect = false;
};

struct RoomReport {
    int instance_id = 0;
    int room_type = 0;
    Category category = Category::Unknown;
    std::size_t instance_pixels = 0;
    std::size_t core_pixels = 0;
    int rect_count = 0;
    std::optional<double> mean_integration;  // absent when no rect survived
    bool empty_core = false;
};

// Per-plan oracle output: everything downstream metrics, screening and the
// bench aggregate from.
struct PlanReport {
    std::string plan_id;
    bool valid = false;                // graph built and integration computed
    std::vector<std::string> flags;
    std::string failure_stage;         // empty, or parse_failed/build_org/build_house

    int node_count = 0;
    bool restricted_component = false;
    std::vector<RoomReport> rooms;

    std::optional<double> integration;
    std::optional<double> public_score;
    std::optional<double> living_room;
    std::optional<double> living_adv;
    std::map<Category, double> profile_I;
    std::map<Category, double> profile_R;

    int total_rooms = 0;        // instances present in the mask
    double total_area = 0.0;    // sum of instance pixel counts
    double living_area_share = 0.0;
    bool living_present = false;

    std::map<int, double> type_mean_integration;  // room type -> mean of instance means
    std::map<int, int> type_room_count;

    PlanFacts facts(const GateConfig& cfg) const;
};

PlanReport analyze_plan(const std::string& plan_id, const LayoutMask& m, const OracleParams& params);

// Decodes then analyzes; decode/parse failures yield an invalid report with
// failure_stage = "parse_failed" instead of propagating.
PlanReport analyze_png_bytes(const std::string& plan_id, const std::vector<std::uint8_t>& bytes,
                             const OracleParams& params);

std::string report_to_json(const PlanReport& r);
PlanReport report_from_json(const std::string& text);

PlanOutcome outcome_of(const PlanReport& r, const GateConfig& cfg);

} // namespace ssx

#endif
