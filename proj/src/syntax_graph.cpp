#include "ssx/syntax_graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include "ssx/errors.hpp"

namespace ssx {

std::vector<std::vector<int>> RectGraph::adjacency() const {
    std::vector<std::vector<int>> adj(nodes.size());
    for (const auto& e : edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());
    return adj;
}

size_t RectGraph::edge_count(EdgeTag tag) const {
    size_t n = 0;
    for (const auto& e : edges) n += (e.tag == tag);
    return n;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(size_t n) : parent(n) {
        for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);  // keep the smaller id as root
        parent[b] = a;
        return true;
    }
};

// 4-connected components of the door mask, labels starting at 1.
Grid<int> label_door_components(const BinaryGrid& door, int& n_components) {
    Grid<int> labels(door.width, door.height, 0);
    int next = 0;
    for (int y = 0; y < door.height; ++y) {
        for (int x = 0; x < door.width; ++x) {
            if (!door.at(x, y) || labels.at(x, y)) continue;
            ++next;
            std::queue<std::pair<int, int>> q;
            q.push({x, y});
            labels.at(x, y) = next;
            while (!q.empty()) {
                auto [cx, cy] = q.front();
                q.pop();
                const int dx[4] = {1, -1, 0, 0};
                const int dy[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int nx = cx + dx[k];
                    const int ny = cy + dy[k];
                    if (!door.in_bounds(nx, ny) || !door.at(nx, ny) || labels.at(nx, ny)) continue;
                    labels.at(nx, ny) = next;
                    q.push({nx, ny});
                }
            }
        }
    }
    n_components = next;
    return labels;
}

} // namespace

DoorAdjacency door_adjacency(const DerivedMasks& d, const std::vector<RoomCore>& cores, int reach) {
    if (reach < 1) throw ConfigError("door_adjacency requires reach >= 1");
    DoorAdjacency out;

    Grid<int> core_label(d.door.width, d.door.height, 0);
    for (const auto& rc : cores)
        for (int y = 0; y < rc.core.height; ++y)
            for (int x = 0; x < rc.core.width; ++x)
                if (rc.core.at(x, y)) core_label.at(x, y) = rc.instance_id;

    int n_components = 0;
    const auto labels = label_door_components(d.door, n_components);

    std::vector<std::set<int>> touched(static_cast<size_t>(n_components) + 1);
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const int comp = labels.at(x, y);
            if (!comp) continue;
            for (int ny = y - reach; ny <= y + reach; ++ny) {
                for (int nx = x - reach; nx <= x + reach; ++nx) {
                    if (!core_label.in_bounds(nx, ny)) continue;
                    const int inst = core_label.at(nx, ny);
                    if (inst > 0) touched[comp].insert(inst);
                }
            }
        }
    }

    std::set<std::pair<int, int>> pair_set;
    for (int comp = 1; comp <= n_components; ++comp) {
        const auto& rooms = touched[comp];
        if (rooms.size() < 2) {
            out.dropped_components++;
            continue;
        }
        for (auto it = rooms.begin(); it != rooms.end(); ++it) {
            auto jt = it;
            for (++jt; jt != rooms.end(); ++jt) {
                const std::pair<int, int> p{*it, *jt};
                pair_set.insert(p);
                auto found = out.provenance.find(p);
                if (found == out.provenance.end()) out.provenance[p] = comp;
            }
        }
    }
    out.pairs.assign(pair_set.begin(), pair_set.end());
    return out;
}

RectGraph build_graph(const LayoutMask& m, const DerivedMasks& d, const GraphParams& params) {
    if (params.touch_dist < 0 || params.a_min < 1) throw ConfigError("bad graph params");

    const auto cores = room_cores(m, d);

    RectGraph g;
    std::map<int, std::vector<int>> nodes_of_instance;
    for (const auto& rc : cores) {
        for (const auto& r : greedy_cover(rc.core, params.a_min)) {
            RectNode n;
            n.node_id = static_cast<int>(g.nodes.size());
            n.rect = r;
            n.instance_id = rc.instance_id;
            n.room_type = rc.room_type;
            nodes_of_instance[rc.instance_id].push_back(n.node_id);
            g.nodes.push_back(n);
        }
    }
    if (g.nodes.empty()) throw EmptyPlanError("no rectangles survive decomposition");

    std::set<std::pair<int, int>> edge_set;
    auto add_edge = [&](int a, int b, EdgeTag tag) {
        if (a == b) return;
        if (b < a) std::swap(a, b);
        if (!edge_set.insert({a, b}).second) return;
        g.edges.push_back({a, b, tag});
    };

    // within-room proximity edges
    for (const auto& [inst, ids] : nodes_of_instance) {
        (void)inst;
        for (size_t i = 0; i < ids.size(); ++i)
            for (size_t j = i + 1; j < ids.size(); ++j)
                if (rect_gap(g.nodes[ids[i]].rect, g.nodes[ids[j]].rect) <= params.touch_dist)
                    add_edge(ids[i], ids[j], EdgeTag::WithinRoom);
    }

    // bridge edges until each room's induced subgraph is connected
    for (const auto& [inst, ids] : nodes_of_instance) {
        (void)inst;
        if (ids.size() < 2) continue;
        std::map<int, int> local;  // node id -> local index
        for (size_t i = 0; i < ids.size(); ++i) local[ids[i]] = static_cast<int>(i);
        UnionFind uf(ids.size());
        for (const auto& e : g.edges) {
            auto ia = local.find(e.a);
            auto ib = local.find(e.b);
            if (ia != local.end() && ib != local.end()) uf.unite(ia->second, ib->second);
        }
        for (;;) {
            int best_gap = std::numeric_limits<int>::max();
            std::pair<int, int> best_pair{-1, -1};
            for (size_t i = 0; i < ids.size(); ++i) {
                for (size_t j = i + 1; j < ids.size(); ++j) {
                    if (uf.find(static_cast<int>(i)) == uf.find(static_cast<int>(j))) continue;
                    const int gap = rect_gap(g.nodes[ids[i]].rect, g.nodes[ids[j]].rect);
                    const std::pair<int, int> p{ids[i], ids[j]};
                    if (gap < best_gap || (gap == best_gap && p < best_pair)) {
                        best_gap = gap;
                        best_pair = p;
                    }
                }
            }
            if (best_pair.first < 0) break;  // connected
            add_edge(best_pair.first, best_pair.second, EdgeTag::Bridge);
            uf.unite(local[best_pair.first], local[best_pair.second]);
        }
    }

    // door-mediated cross-room edges: nearest rect pair per adjacent room pair
    const auto doors = door_adjacency(d, cores, params.door_reach);
    for (const auto& [ia, ib] : doors.pairs) {
        auto na = nodes_of_instance.find(ia);
        auto nb = nodes_of_instance.find(ib);
        if (na == nodes_of_instance.end() || nb == nodes_of_instance.end()) continue;
        int best_gap = std::numeric_limits<int>::max();
        std::pair<int, int> best_pair{-1, -1};
        for (int u : na->second) {
            for (int v : nb->second) {
                const int gap = rect_gap(g.nodes[u].rect, g.nodes[v].rect);
                std::pair<int, int> p{std::min(u, v), std::max(u, v)};
                if (gap < best_gap || (gap == best_gap && p < best_pair)) {
                    best_gap = gap;
                    best_pair = p;
                }
            }
        }
        if (best_pair.first >= 0) add_edge(best_pair.first, best_pair.second, EdgeTag::CrossRoom);
    }

    return g;
}

std::string graph_to_json(const RectGraph& g) {
    std::ostringstream os;
    os << "{\"nodes\":[";
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        const auto& n = g.nodes[i];
        if (i) os << ",";
        os << "{\"id\":" << n.node_id << ",\"x0\":" << n.rect.x0 << ",\"y0\":" << n.rect.y0
           << ",\"w\":" << n.rect.w << ",\"h\":" << n.rect.h << ",\"instance\":" << n.instance_id
           << ",\"type\":" << n.room_type << "}";
    }
    os << "],\"edges\":[";
    for (size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        if (i) os << ",";
        const char* tag = e.tag == EdgeTag::WithinRoom ? "within_room"
                          : e.tag == EdgeTag::Bridge   ? "bridge"
                                                       : "cross_room";
        os << "{\"a\":" << e.a << ",\"b\":" << e.b << ",\"tag\":\"" << tag << "\"}";
    }
    os << "]}";
    return os.str();
}

} // namespace ssx
