#include "ssx/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ssx/errors.hpp"

namespace ssx {

const std::vector<Category>& category_order() {
    static const std::vector<Category> order = {
        Category::Living,  Category::Bedroom, Category::Kitchen,
        Category::Bathroom, Category::Dining,  Category::Study,
        Category::Balcony, Category::Entrance, Category::Storage,
    };
    return order;
}

std::string category_name(Category c) {
    switch (c) {
        case Category::Living: return "living";
        case Category::Bedroom: return "bedroom";
        case Category::Kitchen: return "kitchen";
        case Category::Bathroom: return "bathroom";
        case Category::Dining: return "dining";
        case Category::Study: return "study";
        case Category::Balcony: return "balcony";
        case Category::Entrance: return "entrance";
        case Category::Storage: return "storage";
        case Category::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<Category> category_from_name(const std::string& name) {
    for (Category c : category_order())
        if (category_name(c) == name) return c;
    if (name == "unknown") return Category::Unknown;
    return std::nullopt;
}

Category CategoryMap::category_of(int room_type) const {
    auto it = by_type.find(room_type);
    return it == by_type.end() ? Category::Unknown : it->second;
}

bool CategoryMap::in_denominator(Category c) const {
    return std::find(denominator.begin(), denominator.end(), c) != denominator.end();
}

bool CategoryMap::in_visible(Category c) const {
    return std::find(visible.begin(), visible.end(), c) != visible.end();
}

CategoryMap CategoryMap::rplan_default() {
    CategoryMap cm;
    cm.by_type = {
        {0, Category::Living},   {1, Category::Bedroom}, {2, Category::Kitchen},
        {3, Category::Bathroom}, {4, Category::Dining},  {5, Category::Bedroom},
        {6, Category::Study},    {7, Category::Bedroom}, {8, Category::Bedroom},
        {9, Category::Balcony},  {10, Category::Entrance}, {11, Category::Storage},
        {12, Category::Storage},
    };
    cm.denominator = category_order();
    for (Category c : category_order())
        if (c != Category::Entrance) cm.visible.push_back(c);
    return cm;
}

double public_score(const std::vector<RoomIntegration>& rooms, const CategoryMap& cm) {
    bool has_public = false, has_other = false;
    double public_max = 0, other_max = 0;
    for (const auto& r : rooms) {
        if (cm.is_public(r.room_type)) {
            if (!has_public || r.mean_score > public_max) public_max = r.mean_score;
            has_public = true;
        } else {
            if (!has_other || r.mean_score > other_max) other_max = r.mean_score;
            has_other = true;
        }
    }
    if (!has_public) throw MissingPublicError("no public room with a score");
    if (!has_other) throw MissingOtherError("no non-public room with a score");
    return public_max - other_max;
}

CategoryProfile category_profile(const std::vector<RoomIntegration>& rooms, const CategoryMap& cm) {
    // type -> (room count n, mean of instance means m)
    std::map<int, std::pair<int, double>> by_type;
    for (const auto& r : rooms) {
        auto& a = by_type[r.room_type];
        a.second = (a.second * a.first + r.mean_score) / (a.first + 1);
        a.first += 1;
    }

    CategoryProfile pm;
    std::map<Category, std::pair<double, double>> acc;  // category -> (sum n*m, sum n)
    for (const auto& [type, nm] : by_type) {
        const Category g = cm.category_of(type);
        auto& a = acc[g];
        a.first += nm.first * nm.second;
        a.second += nm.first;
    }
    double mu = 0;
    int present = 0;
    for (const auto& [g, a] : acc) {
        const double I = a.first / a.second;
        pm.I[g] = I;
        if (cm.in_denominator(g)) {
            mu += I;
            ++present;
        }
    }
    if (present == 0) throw NoValidCategoryError("no valid category in the denominator set");
    mu /= present;
    for (const auto& [g, I] : pm.I)
        if (cm.in_denominator(g)) pm.R[g] = I / mu;
    return pm;
}

std::pair<double, double> living_metrics(const CategoryProfile& pm, const CategoryMap& cm) {
    auto it = pm.R.find(Category::Living);
    if (it == pm.R.end()) throw MissingLivingError("living category missing from profile");
    const double living_room = it->second;
    bool has_other = false;
    double other_max = 0;
    for (const auto& [g, r] : pm.R) {
        if (g == Category::Living || !cm.in_visible(g)) continue;
        if (!has_other || r > other_max) other_max = r;
        has_other = true;
    }
    if (!has_other) throw MissingOtherError("no non-living visible category in profile");
    return {living_room, living_room - other_max};
}

std::map<Category, double> cwri(const std::vector<std::map<Category, double>>& plan_R) {
    std::map<Category, double> out;
    if (plan_R.empty()) return out;
    const double total = static_cast<double>(plan_R.size());
    for (Category g : category_order()) {
        double sum = 0;
        int count = 0;
        for (const auto& R : plan_R) {
            auto it = R.find(g);
            if (it == R.end()) continue;
            sum += it->second;
            ++count;
        }
        out[g] = count == 0 ? 0.0 : (sum / count) * (count / total);
    }
    return out;
}

double profile_distance(const std::map<Category, double>& Y, const std::map<Category, double>& Y_ref) {
    if (Y.size() != Y_ref.size()) throw CategoryMismatchError("profile category sets differ");
    double sum = 0;
    for (const auto& [g, y] : Y) {
        auto it = Y_ref.find(g);
        if (it == Y_ref.end()) throw CategoryMismatchError("category missing from reference");
        sum += std::fabs(y - it->second);
    }
    return sum / static_cast<double>(Y.size());
}

SummaryStats summarize(const std::vector<double>& samples) {
    if (samples.empty()) throw EmptyError("summarize of empty sample");
    SummaryStats s;
    s.mean = mean_of(samples);
    s.median = median_of(samples);
    s.std = sample_std(samples);
    s.q25 = quantile_type7(samples, 0.25);
    s.q75 = quantile_type7(samples, 0.75);
    s.iqr = s.q75 - s.q25;
    return s;
}

} // namespace ssx
