#ifndef SSX_SCREENING_HPP
#define SSX_SCREENING_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

namespace ssx {

// Validity gates and non-compensatory penalty weights. Weights are <= 0 and
// sized so that a single active gate outweighs any plausible advantage.
struct GateConfig {
    double lambda_miss = -10.0;
    double lambda_rooms = -10.0;
    double lambda_area = -10.0;
    double lambda_share = -10.0;
    int m_min = 3;           // minimum room count
    double a_min = 1000.0;   // minimum total room area, px^2
    double rho_min = 0.15;   // living area-share band
    double rho_max = 0.50;
    double eps = 1e-8;
    int living_type = 0;
    std::set<int> ignore_types{13, 14, 15, 16, 17};  // structural labels
};

GateConfig load_gate_config(const std::string& path);

// The facts the gates look at, extracted from a plan report.
struct PlanFacts {
    bool living_present = false;
    int total_rooms = 0;
    double total_area = 0.0;
    double living_share = 0.0;
    bool hard_invalid = false;  // no usable graph at all
    double living_mean = 0.0;   // type-level mean integration of the living type
    std::vector<double> other_type_means;  // non-ignored, non-living type means
};

struct SelectionScore {
    double z = 0.0;
    double p = 0.0;
    double s = 0.0;  // z + p, or -inf for hard-invalid plans
    bool hard_invalid = false;
};

// (mu_L - median(others)) / (MAD(others) + eps); MAD = 0 falls back to the
// population std, and a zero std leaves eps alone in the denominator.
double robust_advantage(double mu_living, const std::vector<double>& others, double eps);

double penalty(const PlanFacts& facts, const GateConfig& cfg);

SelectionScore selection_score(const PlanFacts& facts, const GateConfig& cfg);

// K highest-scoring ids over the union of both sets; duplicate ids keep the
// higher score; ties by ascending id.
std::vector<std::string> top_k(const std::vector<std::pair<std::string, double>>& candidates,
                               const std::vector<std::pair<std::string, double>>& base, size_t k);

enum class PlanOutcome { Usable, ParseFailed, BuildOrg, BuildHouse, SynSkip };

struct CleaningLedger {
    std::size_t total = 0;
    std::size_t parse_failed = 0;
    std::size_t build_org = 0;
    std::size_t build_house = 0;
    std::size_t syn_skip = 0;
    std::size_t usable = 0;

    double pct(std::size_t n) const { return total == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(total); }
    double usable_pct() const { return pct(usable); }

    static CleaningLedger from_counts(std::size_t total, std::size_t parse_failed, std::size_t build_org,
                                      std::size_t build_house, std::size_t syn_skip);
    std::string to_csv() const;
};

CleaningLedger clean_dataset(const std::vector<PlanOutcome>& records);

} // namespace ssx

#endif
