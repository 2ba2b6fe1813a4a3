#include "ssx/toy_generator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "ssx/errors.hpp"

namespace ssx {

using json = nlohmann::json;

void GenConfig::validate() const {
    if (max_rooms < 1 || max_rooms > 32) throw ConfigError("max_rooms out of range");
    if (canvas < 16 || canvas > 1024) throw ConfigError("canvas out of range");
    if (t_embed_dim < 2 || t_embed_dim % 2 != 0) throw ConfigError("t_embed_dim must be even and >= 2");
    if (t_base < 2) throw ConfigError("t_base must be >= 2");
    if (n_types < 1 || n_types > 256) throw ConfigError("n_types out of range");
}

void Condition::canonicalize() {
    std::vector<int> order(room_types.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return room_types[a] < room_types[b]; });
    std::vector<int> remap(room_types.size());
    std::vector<int> sorted_types(room_types.size());
    for (size_t pos = 0; pos < order.size(); ++pos) {
        remap[order[pos]] = static_cast<int>(pos);
        sorted_types[pos] = room_types[order[pos]];
    }
    room_types = std::move(sorted_types);
    std::set<std::pair<int, int>> edges;
    for (auto [a, b] : adjacencies) {
        int na = remap[a];
        int nb = remap[b];
        if (na == nb) continue;
        if (nb < na) std::swap(na, nb);
        edges.insert({na, nb});
    }
    adjacencies.assign(edges.begin(), edges.end());
}

PolicyGrad PolicyGrad::zero(const GenConfig& cfg) {
    PolicyGrad g;
    const int d = cfg.state_dim();
    g.W_x = Mat(d, d);
    g.W_t = Mat(d, cfg.t_embed_dim);
    g.W_c = Mat(d, cfg.cond_dim());
    g.b = Vec(static_cast<size_t>(d), 0.0);
    return g;
}

void PolicyGrad::scale(double a) {
    for (auto& v : W_x.data) v *= a;
    for (auto& v : W_t.data) v *= a;
    for (auto& v : W_c.data) v *= a;
    for (auto& v : b) v *= a;
}

double PolicyGrad::max_abs() const {
    double m = 0.0;
    for (auto v : W_x.data) m = std::max(m, std::fabs(v));
    for (auto v : W_t.data) m = std::max(m, std::fabs(v));
    for (auto v : W_c.data) m = std::max(m, std::fabs(v));
    for (auto v : b) m = std::max(m, std::fabs(v));
    return m;
}

Policy init_policy(const GenConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Policy pol;
    pol.cfg = cfg;
    const int d = cfg.state_dim();
    pol.W_x = Mat(d, d);
    pol.W_t = Mat(d, cfg.t_embed_dim);
    pol.W_c = Mat(d, cfg.cond_dim());
    pol.b = Vec(static_cast<size_t>(d), 0.0);
    Rng rng(seed);
    const double s = cfg.init_scale;
    for (auto& v : pol.W_x.data) v = rng.uniform(-s, s);
    for (auto& v : pol.W_t.data) v = rng.uniform(-s, s);
    for (auto& v : pol.W_c.data) v = rng.uniform(-s, s);
    return pol;
}

void apply_gradient(Policy& pol, const PolicyGrad& grad, double step) {
    mat_axpy(pol.W_x, grad.W_x, step);
    mat_axpy(pol.W_t, grad.W_t, step);
    mat_axpy(pol.W_c, grad.W_c, step);
    axpy(pol.b, grad.b, step);
}

namespace {

void write_mat(std::FILE* f, const char* name, const Mat& m) {
    std::fprintf(f, "%s %d %d\n", name, m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c)
            std::fprintf(f, "%s%.17g", c ? " " : "", m.at(r, c));
        std::fprintf(f, "\n");
    }
}

Mat read_mat(std::ifstream& in, const std::string& expect) {
    std::string name;
    int rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols) || name != expect)
        throw IOError("checkpoint: expected matrix '" + expect + "'");
    Mat m(rows, cols);
    for (auto& v : m.data)
        if (!(in >> v)) throw IOError("checkpoint: truncated matrix " + expect);
    return m;
}

} // namespace

void save_policy(const Policy& pol, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IOError("cannot write checkpoint " + path);
    std::fprintf(f, "ssx-policy v1\n");
    std::fprintf(f, "max_rooms %d canvas %d t_embed_dim %d n_types %d t_base %d\n", pol.cfg.max_rooms,
                 pol.cfg.canvas, pol.cfg.t_embed_dim, pol.cfg.n_types, pol.cfg.t_base);
    write_mat(f, "W_x", pol.W_x);
    write_mat(f, "W_t", pol.W_t);
    write_mat(f, "W_c", pol.W_c);
    std::fprintf(f, "b %d\n", static_cast<int>(pol.b.size()));
    for (size_t i = 0; i < pol.b.size(); ++i) std::fprintf(f, "%s%.17g", i ? " " : "", pol.b[i]);
    std::fprintf(f, "\n");
    std::fclose(f);
}

Policy load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open checkpoint " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "ssx-policy" || version != "v1") throw IOError("bad checkpoint header in " + path);
    Policy pol;
    std::string key;
    for (int i = 0; i < 5; ++i) {
        int value = 0;
        if (!(in >> key >> value)) throw IOError("bad checkpoint config in " + path);
        if (key == "max_rooms") pol.cfg.max_rooms = value;
        else if (key == "canvas") pol.cfg.canvas = value;
        else if (key == "t_embed_dim") pol.cfg.t_embed_dim = value;
        else if (key == "n_types") pol.cfg.n_types = value;
        else if (key == "t_base") pol.cfg.t_base = value;
        else throw IOError("unknown checkpoint key '" + key + "'");
    }
    pol.cfg.validate();
    pol.W_x = read_mat(in, "W_x");
    pol.W_t = read_mat(in, "W_t");
    pol.W_c = read_mat(in, "W_c");
    std::string bname;
    int bn = 0;
    if (!(in >> bname >> bn) || bname != "b") throw IOError("checkpoint: expected bias vector");
    pol.b.resize(static_cast<size_t>(bn));
    for (auto& v : pol.b)
        if (!(in >> v)) throw IOError("checkpoint: truncated bias");
    const int d = pol.cfg.state_dim();
    if (pol.W_x.rows != d || pol.W_x.cols != d || pol.W_t.rows != d ||
        pol.W_t.cols != pol.cfg.t_embed_dim || pol.W_c.rows != d ||
        pol.W_c.cols != pol.cfg.cond_dim() || bn != d)
        throw ConfigError("checkpoint dimensions inconsistent with config");
    return pol;
}

Vec time_embedding(int t, int dim, int t_base) {
    (void)t_base;
    Vec e(static_cast<size_t>(dim));
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::pow(10000.0, -static_cast<double>(i) / half);
        e[2 * i] = std::sin(t * freq);
        e[2 * i + 1] = std::cos(t * freq);
    }
    return e;
}

Vec encode_condition(const Condition& cond, const GenConfig& cfg) {
    Vec e(static_cast<size_t>(cfg.cond_dim()), 0.0);
    for (int t : cond.room_types)
        if (t >= 0 && t < cfg.n_types) e[static_cast<size_t>(t)] += 0.25;
    for (int i = 0; i < 4; ++i) e[static_cast<size_t>(cfg.n_types + i)] = cond.bbox[static_cast<size_t>(i)];
    e[static_cast<size_t>(cfg.n_types + 4)] =
        static_cast<double>(cond.room_count()) / static_cast<double>(cfg.max_rooms);
    return e;
}

MeanVar p_mean_variance(const Policy& pol, const Vec& x_t, int chain_index,
                        const DiffusionSchedule& sched, const Condition& cond) {
    if (static_cast<int>(x_t.size()) != pol.cfg.state_dim())
        throw DimensionError("state dimension mismatch");
    if (chain_index < 0 || chain_index >= sched.length())
        throw ConfigError("chain index outside active schedule");
    MeanVar mv;
    mv.mu = matvec(pol.W_x, x_t);
    const Vec te = time_embedding(sched.timesteps[static_cast<size_t>(chain_index)],
                                  pol.cfg.t_embed_dim, pol.cfg.t_base);
    axpy(mv.mu, matvec(pol.W_t, te), 1.0);
    axpy(mv.mu, matvec(pol.W_c, encode_condition(cond, pol.cfg)), 1.0);
    axpy(mv.mu, pol.b, 1.0);
    const double var = sched.posterior_var[static_cast<size_t>(chain_index)];
    mv.log_var = var > 0 ? std::log(var) : -std::numeric_limits<double>::infinity();
    return mv;
}

// gauss_logprob lives in post_training.cpp; declared here to avoid a cycle.
double gauss_logprob(const Vec& a, const Vec& mu, double var);

std::pair<Vec, double> sample_step(const Policy& pol, const Vec& x_t, int chain_index,
                                   const DiffusionSchedule& sched, const Condition& cond, Rng& rng,
                                   bool deterministic) {
    const MeanVar mv = p_mean_variance(pol, x_t, chain_index, sched, cond);
    if (deterministic) return {mv.mu, 0.0};
    const double var = sched.posterior_var[static_cast<size_t>(chain_index)];
    const double sd = std::sqrt(var);
    Vec x(mv.mu.size());
    for (size_t i = 0; i < x.size(); ++i) x[i] = mv.mu[i] + sd * rng.normal();
    const double logp = gauss_logprob(x, mv.mu, var);
    return {x, logp};
}

Trajectory rollout(const Policy& pol, const Condition& cond, const DiffusionSchedule& sched, Rng& rng) {
    Trajectory traj;
    traj.cond = cond;
    const int L = sched.length();
    Vec x(static_cast<size_t>(pol.cfg.state_dim()));
    for (auto& v : x) v = rng.normal();
    if (L == 1) {
        // single-entry chain: only the projection remains
        auto [x0, logp] = sample_step(pol, x, 0, sched, cond, rng, true);
        (void)logp;
        traj.x0 = std::move(x0);
        return traj;
    }
    // stochastic transitions from chain position L-1 down to 0; the final
    // action is the layout itself. The closing projection onto the raster
    // grid is parameter-free and therefore excluded from the step records.
    for (int j = L - 1; j >= 1; --j) {
        auto [next, logp] = sample_step(pol, x, j, sched, cond, rng, false);
        TrajStep step;
        step.chain_index = j;
        step.timestep = sched.timesteps[static_cast<size_t>(j)];
        step.state = x;
        step.action = next;
        step.logp = logp;
        traj.steps.push_back(std::move(step));
        x = std::move(next);
    }
    traj.x0 = std::move(x);
    return traj;
}

namespace {

struct PixelRect {
    int x0, y0, x1, y1;  // inclusive
    bool empty() const { return x0 > x1 || y0 > y1; }
};

int to_px(double v, int canvas) {
    const double p = (v + 1.0) * 0.5 * (canvas - 1);
    int i = static_cast<int>(std::lround(p));
    if (i < 0) i = 0;
    if (i > canvas - 1) i = canvas - 1;
    return i;
}

// boundary pixels of one instance (8-neighbourhood definition)
std::vector<std::pair<int, int>> instance_boundary(const ByteGrid& inst, int id) {
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < inst.height; ++y) {
        for (int x = 0; x < inst.width; ++x) {
            if (inst.at(x, y) != id) continue;
            bool edge = false;
            for (int dy = -1; dy <= 1 && !edge; ++dy)
                for (int dx = -1; dx <= 1 && !edge; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (!inst.in_bounds(nx, ny) || inst.at(nx, ny) != id) edge = true;
                }
            if (edge) out.push_back({x, y});
        }
    }
    return out;
}

int cheb(std::pair<int, int> a, std::pair<int, int> b) {
    return std::max(std::abs(a.first - b.first), std::abs(a.second - b.second));
}

} // namespace

LayoutMask render_layout(const LayoutVector& lv, const GenConfig& cfg, const ChannelCodeTable& codes) {
    cfg.validate();
    if (static_cast<int>(lv.coords.size()) != cfg.state_dim())
        throw DimensionError("coords size mismatch");
    for (double v : lv.coords)
        if (!std::isfinite(v)) throw DegeneratePolygonError("non-finite coordinate");
    const int m = lv.cond.room_count();
    if (m < 1 || m > cfg.max_rooms) throw ConfigError("room count outside config");

    const int C = cfg.canvas;
    const int wall_code = codes.boundary_code(BoundaryRole::Wall);
    const int door_code = codes.boundary_code(BoundaryRole::DoorInterior);
    const int none_code = codes.boundary_code(BoundaryRole::None);
    const int sem_external = codes.semantic_code("external");
    const int sem_wall = codes.semantic_code("interior_wall");
    const int sem_door = codes.semantic_code("interior_door");

    LayoutMask mask;
    mask.width = C;
    mask.height = C;
    mask.ch_boundary = ByteGrid(C, C, static_cast<std::uint8_t>(none_code));
    mask.ch_semantic = ByteGrid(C, C, static_cast<std::uint8_t>(sem_external));
    mask.ch_instance = ByteGrid(C, C, 0);
    mask.ch_interior = ByteGrid(C, C, 0);

    // envelope from the condition's bounding box
    PixelRect env{to_px(lv.cond.bbox[0], C), to_px(lv.cond.bbox[1], C), to_px(lv.cond.bbox[2], C),
                  to_px(lv.cond.bbox[3], C)};
    if (env.x1 < env.x0) std::swap(env.x0, env.x1);
    if (env.y1 < env.y0) std::swap(env.y0, env.y1);
    for (int y = env.y0; y <= env.y1; ++y)
        for (int x = env.x0; x <= env.x1; ++x)
            mask.ch_interior.at(x, y) = static_cast<std::uint8_t>(codes.interior_inside);

    // room rects clamped to the envelope minus the outer wall ring
    const PixelRect inner{env.x0 + cfg.wall_thickness, env.y0 + cfg.wall_thickness,
                          env.x1 - cfg.wall_thickness, env.y1 - cfg.wall_thickness};
    bool overlap = false;
    for (int i = 0; i < m; ++i) {
        const double* c = lv.coords.data() + 4 * i;
        PixelRect r{std::min(to_px(c[0], C), to_px(c[2], C)), std::min(to_px(c[1], C), to_px(c[3], C)),
                    std::max(to_px(c[0], C), to_px(c[2], C)), std::max(to_px(c[1], C), to_px(c[3], C))};
        r.x0 = std::max(r.x0, inner.x0);
        r.y0 = std::max(r.y0, inner.y0);
        r.x1 = std::min(r.x1, inner.x1);
        r.y1 = std::min(r.y1, inner.y1);
        if (r.empty())
            throw DegeneratePolygonError("room " + std::to_string(i) + " has zero area after snapping");
        for (int y = r.y0; y <= r.y1; ++y) {
            for (int x = r.x0; x <= r.x1; ++x) {
                if (mask.ch_instance.at(x, y) != 0) overlap = true;
                mask.ch_instance.at(x, y) = static_cast<std::uint8_t>(i + 1);
                mask.ch_semantic.at(x, y) = static_cast<std::uint8_t>(lv.cond.room_types[static_cast<size_t>(i)]);
            }
        }
    }
    if (overlap) mask.flags.push_back("overlapping_rooms");

    // shave one pixel on each side of inter-room interfaces into wall
    std::vector<std::pair<int, int>> shave;
    for (int y = env.y0; y <= env.y1; ++y) {
        for (int x = env.x0; x <= env.x1; ++x) {
            const int a = mask.ch_instance.at(x, y);
            if (a == 0) continue;
            bool contact = false;
            for (int dy = -1; dy <= 1 && !contact; ++dy)
                for (int dx = -1; dx <= 1 && !contact; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (!mask.ch_instance.in_bounds(nx, ny)) continue;
                    const int b = mask.ch_instance.at(nx, ny);
                    if (b != 0 && b != a) contact = true;
                }
            if (contact) shave.push_back({x, y});
        }
    }
    for (auto [x, y] : shave) mask.ch_instance.at(x, y) = 0;

    // everything inside the envelope that is not a room is structure
    for (int y = env.y0; y <= env.y1; ++y) {
        for (int x = env.x0; x <= env.x1; ++x) {
            if (mask.ch_instance.at(x, y) != 0) continue;
            mask.ch_boundary.at(x, y) = static_cast<std::uint8_t>(wall_code);
            mask.ch_semantic.at(x, y) = static_cast<std::uint8_t>(sem_wall);
        }
    }

    // instance survival check
    std::vector<size_t> pixels(static_cast<size_t>(m) + 1, 0);
    for (auto v : mask.ch_instance.data) pixels[v]++;
    for (int i = 1; i <= m; ++i)
        if (pixels[static_cast<size_t>(i)] == 0) mask.flags.push_back("room_vanished:" + std::to_string(i - 1));

    // door band per program adjacency
    for (auto [ra, rb] : lv.cond.adjacencies) {
        if (ra >= m || rb >= m) continue;
        const auto ba = instance_boundary(mask.ch_instance, ra + 1);
        const auto bb = instance_boundary(mask.ch_instance, rb + 1);
        if (ba.empty() || bb.empty()) {
            mask.flags.push_back("door_skipped_vanished");
            continue;
        }
        int best = std::numeric_limits<int>::max();
        for (const auto& pa : ba)
            for (const auto& pb : bb) best = std::min(best, cheb(pa, pb));
        if (best > cfg.max_door_span) {
            mask.flags.push_back("door_skipped_span");
            continue;
        }
        // candidates on the a-side at min distance; door centred on the contact span
        std::vector<std::pair<int, int>> cand;
        for (const auto& pa : ba)
            for (const auto& pb : bb)
                if (cheb(pa, pb) == best) {
                    cand.push_back(pa);
                    break;
                }
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;  // by y then x
            return a.first < b.first;
        });
        const auto pa = cand[cand.size() / 2];
        std::pair<int, int> pb{-1, -1};
        for (const auto& q : bb)
            if (cheb(pa, q) == best && (pb.first < 0 || std::make_pair(q.second, q.first) <
                                                            std::make_pair(pb.second, pb.first)))
                pb = q;
        // straight line pa -> pb, thickened to door_span across the travel axis
        const int dx = pb.first - pa.first;
        const int dy = pb.second - pa.second;
        const int steps = std::max(std::abs(dx), std::abs(dy));
        const bool horizontal = std::abs(dx) >= std::abs(dy);
        const int half = cfg.door_span / 2;
        for (int s = 0; s <= steps; ++s) {
            const double f = steps ? static_cast<double>(s) / steps : 0.0;
            const int x = static_cast<int>(std::lround(pa.first + dx * f));
            const int y = static_cast<int>(std::lround(pa.second + dy * f));
            for (int off = -half; off <= half; ++off) {
                const int px = horizontal ? x : x + off;
                const int py = horizontal ? y + off : y;
                if (px < env.x0 || px > env.x1 || py < env.y0 || py > env.y1) continue;
                mask.ch_boundary.at(px, py) = static_cast<std::uint8_t>(door_code);
                if (mask.ch_instance.at(px, py) == 0)
                    mask.ch_semantic.at(px, py) = static_cast<std::uint8_t>(sem_door);
            }
        }
    }

    // fill the bookkeeping a parse would produce
    std::map<int, std::map<int, size_t>> hist;
    for (int y = 0; y < C; ++y)
        for (int x = 0; x < C; ++x) {
            const int inst = mask.ch_instance.at(x, y);
            if (inst) hist[inst][mask.ch_semantic.at(x, y)]++;
        }
    for (const auto& [inst, labels] : hist) {
        size_t total = 0;
        int modal = -1;
        size_t modal_count = 0;
        for (const auto& [code, count] : labels) {
            total += count;
            if (count > modal_count) {
                modal = code;
                modal_count = count;
            }
        }
        mask.instance_labels[inst] = modal;
        mask.instance_pixels[inst] = total;
    }
    return mask;
}

LayoutVector program_layout(const Condition& cond, const GenConfig& cfg) {
    cfg.validate();
    const int m = cond.room_count();
    if (m < 1 || m > cfg.max_rooms) throw ConfigError("room count outside config");
    const int C = cfg.canvas;
    auto to_norm = [&](int p) { return 2.0 * p / (C - 1) - 1.0; };

    const int ex0 = to_px(cond.bbox[0], C) + cfg.wall_thickness;
    const int ey0 = to_px(cond.bbox[1], C) + cfg.wall_thickness;
    const int ex1 = to_px(cond.bbox[2], C) - cfg.wall_thickness;
    const int ey1 = to_px(cond.bbox[3], C) - cfg.wall_thickness;
    if (ex1 - ex0 < 8 || ey1 - ey0 < 8) throw ConfigError("bounding box too small for a template layout");

    LayoutVector lv;
    lv.cond = cond;
    lv.coords.assign(static_cast<size_t>(cfg.state_dim()), 0.0);
    auto set_room = [&](int slot, int x0, int y0, int x1, int y1) {
        double* c = lv.coords.data() + 4 * slot;
        c[0] = to_norm(x0);
        c[1] = to_norm(y0);
        c[2] = to_norm(x1);
        c[3] = to_norm(y1);
    };

    if (m == 1) {
        set_room(0, ex0, ey0, ex1, ey1);
        return lv;
    }
    // living room: full-height column on the left; others stacked on the right.
    // Strips follow depth-first order over the adjacency tree so rooms hanging
    // off a non-living parent end up bordering it where possible.
    const int xs = ex0 + static_cast<int>(std::lround(0.38 * (ex1 - ex0)));
    set_room(0, ex0, ey0, xs, ey1);

    std::vector<std::vector<int>> children(static_cast<size_t>(m));
    for (auto [a, b] : cond.adjacencies) {
        if (a >= m || b >= m) continue;
        children[static_cast<size_t>(a)].push_back(b);
    }
    std::vector<int> order;
    std::vector<char> seen(static_cast<size_t>(m), 0);
    seen[0] = 1;
    std::vector<int> stack;
    for (auto it = children[0].rbegin(); it != children[0].rend(); ++it) stack.push_back(*it);
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (seen[static_cast<size_t>(v)]) continue;
        seen[static_cast<size_t>(v)] = 1;
        order.push_back(v);
        for (auto it = children[static_cast<size_t>(v)].rbegin(); it != children[static_cast<size_t>(v)].rend(); ++it)
            if (!seen[static_cast<size_t>(*it)]) stack.push_back(*it);
    }
    for (int v = 1; v < m; ++v)
        if (!seen[static_cast<size_t>(v)]) order.push_back(v);

    const int others = m - 1;
    const int height = ey1 - ey0 + 1;
    for (int i = 0; i < others; ++i) {
        const int slot = order[static_cast<size_t>(i)];
        const int ya = ey0 + static_cast<int>(static_cast<long long>(i) * height / others);
        const int yb = ey0 + static_cast<int>(static_cast<long long>(i + 1) * height / others) - 1;
        set_room(slot, xs + 1, ya, ex1, yb);
    }
    return lv;
}

Condition sample_program(Rng& rng, const GenConfig& cfg, int n_rooms) {
    if (n_rooms < 1 || n_rooms > cfg.max_rooms) throw ConfigError("room count outside config");
    Condition cond;
    cond.room_types.push_back(0);  // living room always present
    if (n_rooms >= 2) cond.room_types.push_back(2);   // kitchen
    if (n_rooms >= 3) cond.room_types.push_back(3);   // bathroom
    static const int pool[] = {1, 5, 7, 8, 4, 6, 9, 10, 11};
    for (int i = 3; i < n_rooms; ++i)
        cond.room_types.push_back(pool[rng.uniform_int(sizeof(pool) / sizeof(pool[0]))]);
    // spanning tree over rooms: mostly hub-and-spoke around the living room,
    // with some rooms hanging off earlier non-living rooms
    for (int i = 1; i < n_rooms; ++i) {
        int parent = 0;
        if (i >= 2 && rng.uniform() < 0.15)
            parent = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i - 1)));
        cond.adjacencies.push_back({parent, i});
    }
    if (n_rooms >= 4 && rng.uniform() < 0.3) {
        const int a = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_rooms - 1)));
        const int b = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_rooms - 1)));
        if (a != b) cond.adjacencies.push_back({std::min(a, b), std::max(a, b)});
    }
    cond.canonicalize();
    return cond;
}

std::vector<Condition> load_programs_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open program file " + path);
    std::vector<Condition> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        Condition c;
        c.room_types = j.at("rooms").get<std::vector<int>>();
        if (j.contains("adjacencies"))
            for (const auto& p : j.at("adjacencies"))
                c.adjacencies.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        if (j.contains("bbox")) {
            auto b = j.at("bbox").get<std::vector<double>>();
            if (b.size() != 4) throw ConfigError(path + ": bbox needs 4 values");
            std::copy(b.begin(), b.end(), c.bbox.begin());
        }
        c.canonicalize();
        out.push_back(std::move(c));
    }
    return out;
}

void save_programs_jsonl(const std::string& path, const std::vector<Condition>& programs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write program file " + path);
    for (const auto& c : programs) {
        json j;
        j["rooms"] = c.room_types;
        json adj = json::array();
        for (auto [a, b] : c.adjacencies) adj.push_back(json::array({a, b}));
        j["adjacencies"] = adj;
        j["bbox"] = std::vector<double>(c.bbox.begin(), c.bbox.end());
        out << j.dump() << "\n";
    }
}

ConditionSampler::ConditionSampler(GenConfig cfg, int room_cap) : cfg_(std::move(cfg)), cap_(room_cap) {
    if (cap_ < 2 || cap_ > cfg_.max_rooms) throw ConfigError("room cap must be in [2, max_rooms]");
}

Condition ConditionSampler::sample(Rng& rng) const {
    const int m_lo = std::min(3, cap_);
    const int m = m_lo + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(cap_ - m_lo + 1)));
    Condition c = sample_program(rng, cfg_, m);
    sampled_.fetch_add(1);
    if (c.room_count() > cap_) violations_.fetch_add(1);
    return c;
}

DenoisingBatch prepare_denoising_batch(const std::vector<LayoutVector>& data,
                                       const DiffusionSchedule& sched, Rng& rng) {
    if (data.empty()) throw EmptyError("empty denoising batch");
    DenoisingBatch b;
    // transition indices: the reverse chain steps j -> j-1 exist for j >= 1
    const int lo = sched.length() > 1 ? 1 : 0;
    const int span = sched.length() - lo;
    for (const auto& lv : data) {
        b.x0.push_back(lv.coords);
        b.cond.push_back(lv.cond);
        b.chain_index.push_back(lo + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(span))));
        Vec noise(lv.coords.size());
        for (auto& v : noise) v = rng.normal();
        b.noise.push_back(std::move(noise));
    }
    return b;
}

double denoising_loss(const Policy& pol, const DenoisingBatch& batch, const DiffusionSchedule& sched,
                      PolicyGrad* grad_out) {
    const size_t B = batch.x0.size();
    const int D = pol.cfg.state_dim();
    double loss = 0.0;
    const double norm = 1.0 / (static_cast<double>(B) * D);
    for (size_t i = 0; i < B; ++i) {
        const int j = batch.chain_index[i];
        const double abar = sched.alpha_bar[static_cast<size_t>(j)];
        Vec x_t(batch.x0[i].size());
        for (size_t d = 0; d < x_t.size(); ++d)
            x_t[d] = std::sqrt(abar) * batch.x0[i][d] + std::sqrt(1.0 - abar) * batch.noise[i][d];
        const MeanVar mv = p_mean_variance(pol, x_t, j, sched, batch.cond[i]);
        const double c0 = sched.posterior_coef_x0[static_cast<size_t>(j)];
        const double ct = sched.posterior_coef_xt[static_cast<size_t>(j)];
        Vec g(static_cast<size_t>(D));
        for (int d = 0; d < D; ++d) {
            const double target = c0 * batch.x0[i][static_cast<size_t>(d)] + ct * x_t[static_cast<size_t>(d)];
            const double r = mv.mu[static_cast<size_t>(d)] - target;
            loss += r * r * norm;
            g[static_cast<size_t>(d)] = 2.0 * r * norm;
        }
        if (grad_out) {
            add_outer(grad_out->W_x, g, x_t, 1.0);
            add_outer(grad_out->W_t, g,
                      time_embedding(sched.timesteps[static_cast<size_t>(j)], pol.cfg.t_embed_dim,
                                     pol.cfg.t_base),
                      1.0);
            add_outer(grad_out->W_c, g, encode_condition(batch.cond[i], pol.cfg), 1.0);
            axpy(grad_out->b, g, 1.0);
        }
    }
    return loss;
}

std::pair<double, Policy> denoising_step(const Policy& pol, const std::vector<LayoutVector>& data,
                                         const DiffusionSchedule& sched, Rng& rng, double lr) {
    const DenoisingBatch batch = prepare_denoising_batch(data, sched, rng);
    PolicyGrad grad = PolicyGrad::zero(pol.cfg);
    const double loss = denoising_loss(pol, batch, sched, &grad);
    Policy next = pol;
    apply_gradient(next, grad, -lr);
    return {loss, next};
}

} // namespace ssx
