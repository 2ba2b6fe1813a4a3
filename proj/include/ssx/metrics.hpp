#ifndef SSX_METRICS_HPP
#define SSX_METRICS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ssx/stats.hpp"

namespace ssx {

enum class Category {
    Living,
    Bedroom,
    Kitchen,
    Bathroom,
    Dining,
    Study,
    Balcony,
    Entrance,
    Storage,
    Unknown,
};

const std::vector<Category>& category_order();  // fixed reporting order, Unknown excluded
std::string category_name(Category c);
std::optional<Category> category_from_name(const std::string& name);

// Maps room-type codes to merged functional categories and defines the public
// set, the profile denominator set G_p and the visible set G_p^vis.
struct CategoryMap {
    std::map<int, Category> by_type;
    std::set<Category> public_set{Category::Living};
    std::vector<Category> denominator;  // G_p: all categories except Unknown
    std::vector<Category> visible;      // G_p^vis: G_p minus Entrance

    Category category_of(int room_type) const;
    bool is_public(int room_type) const { return public_set.count(category_of(room_type)) != 0; }
    bool in_denominator(Category c) const;
    bool in_visible(Category c) const;

    static CategoryMap rplan_default();
};

// One room instance with its aggregated integration, the interface between
// the integration engine and the metric suite.
struct RoomIntegration {
    int instance_id = 0;
    int room_type = 0;
    double mean_score = 0.0;
};

struct CategoryProfile {
    std::map<Category, double> I;  // absolute category integration
    std::map<Category, double> R;  // normalized to per-plan mean 1 over G_p
};

struct SummaryStats {
    double mean = 0, median = 0, std = 0, q25 = 0, q75 = 0, iqr = 0;
};

// public_max - other_max over room instances.
double public_score(const std::vector<RoomIntegration>& rooms, const CategoryMap& cm);

// n-weighted type aggregation within each category; R normalized by the mean
// over present denominator categories.
CategoryProfile category_profile(const std::vector<RoomIntegration>& rooms, const CategoryMap& cm);

// (living_room, living_adv) from a plan profile.
std::pair<double, double> living_metrics(const CategoryProfile& pm, const CategoryMap& cm);

// Coverage-weighted relative integration per category over a dataset of
// per-plan R maps. Categories absent from every plan yield 0.
std::map<Category, double> cwri(const std::vector<std::map<Category, double>>& plan_R);

// Mean absolute difference of per-category medians; both maps must share the
// same category set.
double profile_distance(const std::map<Category, double>& Y, const std::map<Category, double>& Y_ref);

SummaryStats summarize(const std::vector<double>& samples);

} // namespace ssx

#endif
