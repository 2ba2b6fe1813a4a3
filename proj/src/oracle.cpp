#include "ssx/oracle.hpp"

#include <nlohmann/json.hpp>

#include "ssx/errors.hpp"

namespace ssx {

using json = nlohmann::json;

PlanFacts PlanReport::facts(const GateConfig& cfg) const {
    PlanFacts f;
    f.hard_invalid = !valid;
    f.total_rooms = total_rooms;
    f.total_area = total_area;
    f.living_share = living_area_share;
    for (const auto& [type, mean] : type_mean_integration) {
        if (cfg.ignore_types.count(type)) continue;
        if (type == cfg.living_type) {
            f.living_present = true;
            f.living_mean = mean;
        } else {
            f.other_type_means.push_back(mean);
        }
    }
    return f;
}

PlanReport analyze_plan(const std::string& plan_id, const LayoutMask& m, const OracleParams& params) {
    PlanReport r;
    r.plan_id = plan_id;
    r.flags = m.flags;

    const auto d = derive_masks(m, params.codes, params.strict_codes);
    if (d.snapped_pixels > 0) r.flags.push_back("snapped_boundary_codes");
    const auto cores = room_cores(m, d);

    r.total_rooms = static_cast<int>(cores.size());
    double living_area = 0.0;
    for (const auto& rc : cores) {
        r.total_area += static_cast<double>(rc.instance_pixel_count);
        const Category cat = params.categories.category_of(rc.room_type);
        if (cat == Category::Living) {
            r.living_present = true;
            living_area += static_cast<double>(rc.instance_pixel_count);
        }
        RoomReport rr;
        rr.instance_id = rc.instance_id;
        rr.room_type = rc.room_type;
        rr.category = cat;
        rr.instance_pixels = rc.instance_pixel_count;
        rr.core_pixels = rc.core_pixels;
        rr.empty_core = rc.empty;
        if (rc.empty) r.flags.push_back("empty_core:" + std::to_string(rc.instance_id));
        r.rooms.push_back(rr);
    }
    if (r.total_area > 0) r.living_area_share = living_area / r.total_area;

    RectGraph g;
    try {
        g = build_graph(m, d, params.graph);
    } catch (const EmptyPlanError&) {
        r.failure_stage = "build_org";
        r.flags.push_back("empty_graph");
        return r;
    }
    r.node_count = static_cast<int>(g.nodes.size());
    for (auto& rr : r.rooms)
        for (const auto& n : g.nodes)
            if (n.instance_id == rr.instance_id) rr.rect_count++;
    for (const auto& rr : r.rooms)
        if (!rr.empty_core && rr.rect_count == 0)
            r.flags.push_back("room_dropped:" + std::to_string(rr.instance_id));

    NodeScores ns;
    RoomScores rs;
    try {
        const auto dt = all_pairs_depth(g, params.strict_connect);
        if (dt.restricted) {
            r.restricted_component = true;
            r.flags.push_back("restricted_to_largest_component");
        }
        ns = node_integration(dt, params.method, params.raw_ra, params.eps_ra);
        rs = room_mean_integration(ns, g);
    } catch (const DisconnectedError&) {
        r.failure_stage = "build_house";
        r.flags.push_back("disconnected_graph");
        return r;
    } catch (const TooFewNodesError&) {
        r.failure_stage = "build_house";
        r.flags.push_back("too_few_nodes");
        return r;
    }
    r.valid = true;
    r.integration = plan_integration(ns);

    std::vector<RoomIntegration> rooms;
    for (auto& rr : r.rooms) {
        auto it = rs.mean_by_instance.find(rr.instance_id);
        if (it == rs.mean_by_instance.end()) continue;
        rr.mean_integration = it->second;
        rooms.push_back({rr.instance_id, rr.room_type, it->second});
    }

    for (const auto& ri : rooms) {
        auto& n = r.type_room_count[ri.room_type];
        auto& m_mean = r.type_mean_integration[ri.room_type];
        m_mean = (m_mean * n + ri.mean_score) / (n + 1);
        n += 1;
    }

    try {
        r.public_score = public_score(rooms, params.categories);
    } catch (const MissingPublicError&) {
        r.flags.push_back("missing_public");
    } catch (const MissingOtherError&) {
        r.flags.push_back("missing_other");
    }
    try {
        const auto pm = category_profile(rooms, params.categories);
        r.profile_I = pm.I;
        r.profile_R = pm.R;
        try {
            const auto [lr, la] = living_metrics(pm, params.categories);
            r.living_room = lr;
            r.living_adv = la;
        } catch (const MissingLivingError&) {
            r.flags.push_back("missing_living");
        } catch (const MissingOtherError&) {
            r.flags.push_back("missing_visible_competitor");
        }
    } catch (const NoValidCategoryError&) {
        r.flags.push_back("no_valid_category");
    }
    return r;
}

PlanReport analyze_png_bytes(const std::string& plan_id, const std::vector<std::uint8_t>& bytes,
                             const OracleParams& params) {
    LayoutMask m;
    try {
        m = parse_layout(bytes, params.codes);
    } catch (const std::runtime_error& e) {
        PlanReport r;
        r.plan_id = plan_id;
        r.failure_stage = "parse_failed";
        r.flags.push_back(std::string("parse_error: ") + e.what());
        return r;
    }
    return analyze_plan(plan_id, m, params);
}

namespace {

json optional_to_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

std::optional<double> optional_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

json category_map_to_json(const std::map<Category, double>& m) {
    json out = json::object();
    for (const auto& [g, v] : m) out[category_name(g)] = v;
    return out;
}

std::map<Category, double> category_map_from_json(const json& j) {
    std::map<Category, double> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto c = category_from_name(it.key());
        if (c) out[*c] = it.value().get<double>();
    }
    return out;
}

} // namespace

std::string report_to_json(const PlanReport& r) {
    json j;
    j["schema"] = "plan_report_v1";
    j["plan_id"] = r.plan_id;
    j["valid"] = r.valid;
    j["flags"] = r.flags;
    j["failure_stage"] = r.failure_stage;
    j["node_count"] = r.node_count;
    j["restricted_component"] = r.restricted_component;
    j["integration"] = optional_to_json(r.integration);
    j["public_score"] = optional_to_json(r.public_score);
    j["living_room"] = optional_to_json(r.living_room);
    j["living_adv"] = optional_to_json(r.living_adv);
    j["profile_I"] = category_map_to_json(r.profile_I);
    j["profile_R"] = category_map_to_json(r.profile_R);
    j["total_rooms"] = r.total_rooms;
    j["total_area"] = r.total_area;
    j["living_area_share"] = r.living_area_share;
    j["living_present"] = r.living_present;
    json rooms = json::array();
    for (const auto& rr : r.rooms) {
        json room;
        room["instance_id"] = rr.instance_id;
        room["room_type"] = rr.room_type;
        room["category"] = category_name(rr.category);
        room["instance_pixels"] = rr.instance_pixels;
        room["core_pixels"] = rr.core_pixels;
        room["rect_count"] = rr.rect_count;
        room["mean_integration"] = optional_to_json(rr.mean_integration);
        room["empty_core"] = rr.empty_core;
        rooms.push_back(room);
    }
    j["rooms"] = rooms;
    json types = json::object();
    for (const auto& [t, m] : r.type_mean_integration) types[std::to_string(t)] = m;
    j["type_mean_integration"] = types;
    json counts = json::object();
    for (const auto& [t, n] : r.type_room_count) counts[std::to_string(t)] = n;
    j["type_room_count"] = counts;
    return j.dump(2);
}

PlanReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    PlanReport r;
    r.plan_id = j.at("plan_id").get<std::string>();
    r.valid = j.at("valid").get<bool>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
    r.failure_stage = j.at("failure_stage").get<std::string>();
    r.node_count = j.at("node_count").get<int>();
    r.restricted_component = j.at("restricted_component").get<bool>();
    r.integration = optional_from_json(j.at("integration"));
    r.public_score = optional_from_json(j.at("public_score"));
    r.living_room = optional_from_json(j.at("living_room"));
    r.living_adv = optional_from_json(j.at("living_adv"));
    r.profile_I = category_map_from_json(j.at("profile_I"));
    r.profile_R = category_map_from_json(j.at("profile_R"));
    r.total_rooms = j.at("total_rooms").get<int>();
    r.total_area = j.at("total_area").get<double>();
    r.living_area_share = j.at("living_area_share").get<double>();
    r.living_present = j.at("living_present").get<bool>();
    for (const auto& room : j.at("rooms")) {
        RoomReport rr;
        rr.instance_id = room.at("instance_id").get<int>();
        rr.room_type = room.at("room_type").get<int>();
        if (auto c = category_from_name(room.at("category").get<std::string>())) rr.category = *c;
        rr.instance_pixels = room.at("instance_pixels").get<std::size_t>();
        rr.core_pixels = room.at("core_pixels").get<std::size_t>();
        rr.rect_count = room.at("rect_count").get<int>();
        rr.mean_integration = optional_from_json(room.at("mean_integration"));
        rr.empty_core = room.at("empty_core").get<bool>();
        r.rooms.push_back(rr);
    }
    for (auto it = j.at("type_mean_integration").begin(); it != j.at("type_mean_integration").end(); ++it)
        r.type_mean_integration[std::stoi(it.key())] = it.value().get<double>();
    for (auto it = j.at("type_room_count").begin(); it != j.at("type_room_count").end(); ++it)
        r.type_room_count[std::stoi(it.key())] = it.value().get<int>();
    return r;
}

PlanOutcome outcome_of(const PlanReport& r, const GateConfig& cfg) {
    if (r.failure_stage == "parse_failed") return PlanOutcome::ParseFailed;
    if (r.failure_stage == "build_org") return PlanOutcome::BuildOrg;
    if (r.failure_stage == "build_house") return PlanOutcome::BuildHouse;
    if (penalty(r.facts(cfg), cfg) < 0.0) return PlanOutcome::SynSkip;
    return PlanOutcome::Usable;
}

} // namespace ssx
