#include "ssx/screening.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ssx/errors.hpp"
#include "ssx/stats.hpp"

namespace ssx {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

GateConfig load_gate_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open gate config: " + path);
    GateConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "lambda_miss") cfg.lambda_miss = std::stod(val);
        else if (key == "lambda_rooms") cfg.lambda_rooms = std::stod(val);
        else if (key == "lambda_area") cfg.lambda_area = std::stod(val);
        else if (key == "lambda_share") cfg.lambda_share = std::stod(val);
        else if (key == "m_min") cfg.m_min = std::stoi(val);
        else if (key == "a_min") cfg.a_min = std::stod(val);
        else if (key == "rho_min") cfg.rho_min = std::stod(val);
        else if (key == "rho_max") cfg.rho_max = std::stod(val);
        else if (key == "eps") cfg.eps = std::stod(val);
        else if (key == "living_type") cfg.living_type = std::stoi(val);
        else if (key == "ignore_types") {
            cfg.ignore_types.clear();
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!trim(tok).empty()) cfg.ignore_types.insert(std::stoi(trim(tok)));
        } else {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (cfg.lambda_miss > 0 || cfg.lambda_rooms > 0 || cfg.lambda_area > 0 || cfg.lambda_share > 0)
        throw ConfigError(path + ": penalty weights must be non-positive");
    if (!(cfg.rho_min >= 0 && cfg.rho_min < cfg.rho_max && cfg.rho_max <= 1))
        throw ConfigError(path + ": rho band must satisfy 0 <= rho_min < rho_max <= 1");
    return cfg;
}

double robust_advantage(double mu_living, const std::vector<double>& others, double eps) {
    if (others.empty()) throw EmptyOthersError("robust advantage needs a non-empty comparison set");
    const double med = median_of(others);
    double scale = mad_of(others);
    if (scale == 0.0) scale = population_std(others);
    return (mu_living - med) / (scale + eps);
}

double penalty(const PlanFacts& facts, const GateConfig& cfg) {
    double p = 0.0;
    if (!facts.living_present) p += cfg.lambda_miss;
    if (facts.total_rooms < cfg.m_min) p += cfg.lambda_rooms;
    if (facts.total_area < cfg.a_min) p += cfg.lambda_area;
    if (facts.living_share < cfg.rho_min || facts.living_share > cfg.rho_max) p += cfg.lambda_share;
    return p;
}

SelectionScore selection_score(const PlanFacts& facts, const GateConfig& cfg) {
    SelectionScore s;
    if (facts.hard_invalid) {
        s.hard_invalid = true;
        s.s = -std::numeric_limits<double>::infinity();
        return s;
    }
    if (facts.living_present && !facts.other_type_means.empty())
        s.z = robust_advantage(facts.living_mean, facts.other_type_means, cfg.eps);
    s.p = penalty(facts, cfg);
    s.s = s.z + s.p;
    return s;
}

std::vector<std::string> top_k(const std::vector<std::pair<std::string, double>>& candidates,
                               const std::vector<std::pair<std::string, double>>& base, size_t k) {
    if (k < 1) throw ConfigError("top_k requires k >= 1");
    std::map<std::string, double> pool;
    auto absorb = [&](const std::vector<std::pair<std::string, double>>& xs) {
        for (const auto& [id, s] : xs) {
            auto it = pool.find(id);
            if (it == pool.end() || s > it->second) pool[id] = s;
        }
    };
    absorb(candidates);
    absorb(base);
    std::vector<std::pair<std::string, double>> rows(pool.begin(), pool.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (rows.size() > k) rows.resize(k);
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& [id, s] : rows) {
        (void)s;
        out.push_back(id);
    }
    return out;
}

CleaningLedger CleaningLedger::from_counts(std::size_t total, std::size_t parse_failed, std::size_t build_org,
                                           std::size_t build_house, std::size_t syn_skip) {
    CleaningLedger l;
    l.total = total;
    l.parse_failed = parse_failed;
    l.build_org = build_org;
    l.build_house = build_house;
    l.syn_skip = syn_skip;
    const std::size_t excluded = parse_failed + build_org + build_house + syn_skip;
    if (excluded > total) throw ConfigError("cleaning ledger: failures exceed total");
    l.usable = total - excluded;
    return l;
}

CleaningLedger clean_dataset(const std::vector<PlanOutcome>& records) {
    CleaningLedger l;
    l.total = records.size();
    for (auto r : records) {
        switch (r) {
            case PlanOutcome::Usable: l.usable++; break;
            case PlanOutcome::ParseFailed: l.parse_failed++; break;
            case PlanOutcome::BuildOrg: l.build_org++; break;
            case PlanOutcome::BuildHouse: l.build_house++; break;
            case PlanOutcome::SynSkip: l.syn_skip++; break;
        }
    }
    return l;
}

std::string CleaningLedger::to_csv() const {
    std::ostringstream os;
    char buf[64];
    os << "stage,count,percent\n";
    auto row = [&](const char* name, std::size_t n) {
        std::snprintf(buf, sizeof(buf), "%.2f", pct(n));
        os << name << "," << n << "," << buf << "\n";
    };
    os << "total," << total << ",100.00\n";
    row("parse_failed", parse_failed);
    row("build_org", build_org);
    row("build_house", build_house);
    row("syn_skip", syn_skip);
    row("usable", usable);
    return os.str();
}

} // namespace ssx
