#include "ssx/integration.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "ssx/errors.hpp"
#include "ssx/stats.hpp"

namespace ssx {

double diamond_value(int k) {
    const double kd = static_cast<double>(k);
    return 2.0 * (kd * (std::log2((kd + 2.0) / 3.0) - 1.0) + 1.0) / ((kd - 1.0) * (kd - 2.0));
}

namespace {

std::vector<int> component_of(const std::vector<std::vector<int>>& adj) {
    std::vector<int> comp(adj.size(), -1);
    int next = 0;
    for (size_t s = 0; s < adj.size(); ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> q;
        q.push(static_cast<int>(s));
        comp[s] = next;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int v : adj[u]) {
                if (comp[v] < 0) {
                    comp[v] = next;
                    q.push(v);
                }
            }
        }
        ++next;
    }
    return comp;
}

} // namespace

DepthTable all_pairs_depth(const RectGraph& g, bool strict) {
    if (g.nodes.empty()) throw EmptyPlanError("depth table of empty graph");
    const auto adj = g.adjacency();
    const auto comp = component_of(adj);
    const int n_comp = *std::max_element(comp.begin(), comp.end()) + 1;

    DepthTable dt;
    if (n_comp > 1) {
        if (strict) throw DisconnectedError("graph has " + std::to_string(n_comp) + " components");
        std::vector<int> sizes(n_comp, 0);
        for (int c : comp) sizes[c]++;
        // largest component; ties resolve to the lowest component id, which is
        // the one containing the smallest node id (components are discovered
        // in node-id order)
        int keep = 0;
        for (int c = 1; c < n_comp; ++c)
            if (sizes[c] > sizes[keep]) keep = c;
        for (size_t i = 0; i < comp.size(); ++i)
            if (comp[i] == keep) dt.node_ids.push_back(static_cast<int>(i));
        dt.restricted = true;
    } else {
        dt.node_ids.resize(g.nodes.size());
        for (size_t i = 0; i < g.nodes.size(); ++i) dt.node_ids[i] = static_cast<int>(i);
    }
    dt.k = static_cast<int>(dt.node_ids.size());

    // membership test for the analyzed set
    std::vector<char> in_set(g.nodes.size(), 0);
    for (int id : dt.node_ids) in_set[id] = 1;

    dt.td.resize(dt.node_ids.size());
    std::vector<int> dist(g.nodes.size());
    for (size_t si = 0; si < dt.node_ids.size(); ++si) {
        const int src = dt.node_ids[si];
        std::fill(dist.begin(), dist.end(), -1);
        dist[src] = 0;
        std::queue<int> q;
        q.push(src);
        std::int64_t total = 0;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            total += dist[u];
            for (int v : adj[u]) {
                if (in_set[v] && dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
            }
        }
        dt.td[si] = total;
    }
    return dt;
}

NodeScores node_integration(const DepthTable& dt, Method method, bool raw_ra, double eps_ra) {
    NodeScores ns;
    ns.method = method;
    ns.node_ids = dt.node_ids;
    const int k = dt.k;
    if (method == Method::HH) {
        if (k < 3) throw TooFewNodesError("hh integration needs k >= 3, got " + std::to_string(k));
        const double dk = diamond_value(k);
        for (auto td : dt.td) {
            const double md = static_cast<double>(td) / (k - 1);
            const double ra = 2.0 * (md - 1.0) / (k - 2);
            const double rra = raw_ra ? ra : ra / dk;
            ns.score.push_back(1.0 / std::max(rra, eps_ra));
        }
    } else {
        if (k < 2) throw TooFewNodesError("closeness needs k >= 2, got " + std::to_string(k));
        for (auto td : dt.td) ns.score.push_back(static_cast<double>(k - 1) / static_cast<double>(td));
    }
    return ns;
}

RoomScores room_mean_integration(const NodeScores& ns, const RectGraph& g) {
    RoomScores rs;
    std::map<int, std::pair<double, int>> acc;  // instance -> (sum, count)
    for (size_t i = 0; i < ns.node_ids.size(); ++i) {
        const auto& node = g.nodes[ns.node_ids[i]];
        auto& a = acc[node.instance_id];
        a.first += ns.score[i];
        a.second += 1;
        rs.nodes_by_instance[node.instance_id].push_back(node.node_id);
    }
    for (const auto& [inst, a] : acc) rs.mean_by_instance[inst] = a.first / a.second;
    return rs;
}

double plan_integration(const NodeScores& ns) {
    if (ns.score.empty()) throw EmptyError("plan integration of empty score set");
    return mean_of(ns.score);
}

} // namespace ssx
