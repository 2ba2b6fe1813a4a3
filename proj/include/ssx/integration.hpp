#ifndef SSX_INTEGRATION_HPP
#define SSX_INTEGRATION_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "ssx/syntax_graph.hpp"

namespace ssx {

enum class Method { HH, Closeness };

struct DepthTable {
    int k = 0;                       // analyzed node count
    std::vector<int> node_ids;       // graph node ids in analysis order
    std::vector<std::int64_t> td;    // total depth per analyzed node
    bool restricted = false;         // true when reduced to the largest component
};

struct NodeScores {
    Method method = Method::HH;
    std::vector<int> node_ids;
    std::vector<double> score;
};

struct RoomScores {
    std::map<int, double> mean_by_instance;           // s-bar per room instance
    std::map<int, std::vector<int>> nodes_by_instance;  // analyzed node ids per instance
};

// D-value normalization constant for a k-node system.
double diamond_value(int k);

// Unit-weight BFS from every node. Disconnected graphs: strict mode throws
// DisconnectedError; otherwise the largest component is analyzed (tie to the
// component holding the smallest node id) and the table is marked restricted.
DepthTable all_pairs_depth(const RectGraph& g, bool strict = false);

// hh: MD = td/(k-1), RA = 2(MD-1)/(k-2), RRA = RA/D_k (or RA when raw_ra),
// score = 1/max(RRA, eps_ra). closeness: (k-1)/td.
NodeScores node_integration(const DepthTable& dt, Method method, bool raw_ra = false,
                            double eps_ra = 1e-6);

RoomScores room_mean_integration(const NodeScores& ns, const RectGraph& g);

double plan_integration(const NodeScores& ns);

} // namespace ssx

#endif
