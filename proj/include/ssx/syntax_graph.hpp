#ifndef SSX_SYNTAX_GRAPH_HPP
#define SSX_SYNTAX_GRAPH_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ssx/mask_io.hpp"
#include "ssx/rect_cover.hpp"

namespace ssx {

enum class EdgeTag { WithinRoom, Bridge, CrossRoom };

struct RectNode {
    int node_id = 0;
    Rect rect;
    int instance_id = 0;
    int room_type = 0;
};

struct GraphEdge {
    int a = 0;  // a < b
    int b = 0;
    EdgeTag tag = EdgeTag::WithinRoom;
};

struct RectGraph {
    std::vector<RectNode> nodes;
    std::vector<GraphEdge> edges;

    std::vector<std::vector<int>> adjacency() const;
    size_t edge_count(EdgeTag tag) const;
};

// Room-instance pairs made mutually accessible by interior-door components.
struct DoorAdjacency {
    std::vector<std::pair<int, int>> pairs;       // instance id pairs, a < b, sorted
    std::map<std::pair<int, int>, int> provenance;  // pair -> smallest door component id
    int dropped_components = 0;                   // components touching < 2 rooms
};

struct GraphParams {
    int a_min = 50;       // min rectangle area, px^2
    int touch_dist = 2;   // max pixel gap for within-room edges
    int door_reach = 2;   // Chebyshev reach from door pixels to room cores
};

// For each 4-connected door component, collects the room instances whose cores
// lie within Chebyshev distance <= reach and emits every pair among them.
DoorAdjacency door_adjacency(const DerivedMasks& d, const std::vector<RoomCore>& cores, int reach);

// Rectangle-space graph: greedy-cover nodes per room core, within-room edges
// by proximity, bridge edges until each room is internally connected, one
// cross-room edge per door-adjacent room pair (nearest rect pair).
// Throws EmptyPlanError when no rectangle survives decomposition.
RectGraph build_graph(const LayoutMask& m, const DerivedMasks& d, const GraphParams& params);

std::string graph_to_json(const RectGraph& g);

} // namespace ssx

#endif
