#ifndef SSX_TOY_GENERATOR_HPP
#define SSX_TOY_GENERATOR_HPP

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ssx/channel_codes.hpp"
#include "ssx/linalg.hpp"
#include "ssx/mask_io.hpp"
#include "ssx/rng.hpp"
#include "ssx/schedule.hpp"

namespace ssx {

struct GenConfig {
    int max_rooms = 8;      // coordinate slots; 2 corners per room
    int canvas = 64;        // square canvas, px
    int t_embed_dim = 8;    // sinusoidal timestep embedding size
    double init_scale = 0.02;
    int wall_thickness = 2;  // band created by interface shaving
    int door_span = 3;       // door band width along the wall
    int max_door_span = 8;   // widest gap a door may cross, px
    int n_types = 13;        // room type codes 0..n_types-1 usable in programs
    int t_base = 1000;

    int state_dim() const { return 4 * max_rooms; }      // (x0,y0,x1,y1) per room slot
    int cond_dim() const { return n_types + 5; }         // type histogram + bbox + count
    void validate() const;
};

// Room program: what to generate. Canonical form sorts rooms by type code so
// coordinate slots carry stable semantics (slot 0 is always the living room).
struct Condition {
    std::vector<int> room_types;
    std::vector<std::pair<int, int>> adjacencies;  // slot index pairs, a < b
    std::array<double, 4> bbox{-0.9, -0.9, 0.9, 0.9};

    int room_count() const { return static_cast<int>(room_types.size()); }
    void canonicalize();
};

// Flattened polygon-corner coordinates in [-1,1] plus the condition bundle.
struct LayoutVector {
    Vec coords;  // size = GenConfig::state_dim()
    Condition cond;
};

// Affine Gaussian reverse-diffusion policy with a fixed variance schedule:
// mu = W_x*x_t + W_t*emb(t) + W_c*enc(cond) + b.
struct Policy {
    GenConfig cfg;
    Mat W_x, W_t, W_c;
    Vec b;
};

struct PolicyGrad {
    Mat W_x, W_t, W_c;
    Vec b;
    static PolicyGrad zero(const GenConfig& cfg);
    void scale(double a);
    double max_abs() const;
};

Policy init_policy(const GenConfig& cfg, std::uint64_t seed);
void apply_gradient(Policy& pol, const PolicyGrad& grad, double step);

void save_policy(const Policy& pol, const std::string& path);
Policy load_policy(const std::string& path);

Vec time_embedding(int t, int dim, int t_base);
Vec encode_condition(const Condition& cond, const GenConfig& cfg);

struct MeanVar {
    Vec mu;
    double log_var = 0.0;
};

MeanVar p_mean_variance(const Policy& pol, const Vec& x_t, int chain_index,
                        const DiffusionSchedule& sched, const Condition& cond);

// One stochastic reverse transition; deterministic = true takes the zero-noise
// limit (x_{t-1} = mu) used for the final projection.
std::pair<Vec, double> sample_step(const Policy& pol, const Vec& x_t, int chain_index,
                                   const DiffusionSchedule& sched, const Condition& cond, Rng& rng,
                                   bool deterministic = false);

struct TrajStep {
    int chain_index = 0;  // index of the state's position in the respaced chain
    int timestep = 0;     // base timestep
    Vec state;
    Vec action;
    double logp = 0.0;
};

struct Trajectory {
    Condition cond;
    std::vector<TrajStep> steps;  // stochastic steps only; final projection excluded
    Vec x0;
    double reward = 0.0;
    bool oracle_ok = true;
};

Trajectory rollout(const Policy& pol, const Condition& cond, const DiffusionSchedule& sched, Rng& rng);

// Rasterizes room rects, shaves 1 px on each side of inter-room interfaces
// into wall, fills remaining envelope pixels as wall, and cuts a door band per
// program adjacency. Throws DegeneratePolygonError on a zero-area room.
LayoutMask render_layout(const LayoutVector& lv, const GenConfig& cfg, const ChannelCodeTable& codes);

// Deterministic template layout for a program: living room as a full-height
// column, remaining rooms stacked beside it. Used as the base/reference set.
LayoutVector program_layout(const Condition& cond, const GenConfig& cfg);

Condition sample_program(Rng& rng, const GenConfig& cfg, int n_rooms);

std::vector<Condition> load_programs_jsonl(const std::string& path);
void save_programs_jsonl(const std::string& path, const std::vector<Condition>& programs);

// Train-condition sampler with an out-of-distribution guard: every sampled
// program stays within room_cap, and the counters make that checkable.
class ConditionSampler {
public:
    ConditionSampler(GenConfig cfg, int room_cap);
    Condition sample(Rng& rng) const;
    std::uint64_t sampled_count() const { return sampled_.load(); }
    std::uint64_t cap_violations() const { return violations_.load(); }
    int room_cap() const { return cap_; }

private:
    GenConfig cfg_;
    int cap_;
    mutable std::atomic<std::uint64_t> sampled_{0};
    mutable std::atomic<std::uint64_t> violations_{0};
};

// Denoising fine-tune machinery. The batch freezes the sampled chain indices
// and noise draws so gradients can be checked against finite differences.
struct DenoisingBatch {
    std::vector<Vec> x0;
    std::vector<Condition> cond;
    std::vector<int> chain_index;
    std::vector<Vec> noise;
};

DenoisingBatch prepare_denoising_batch(const std::vector<LayoutVector>& data,
                                       const DiffusionSchedule& sched, Rng& rng);

// Mean squared error between the posterior-mean target and the policy output;
// accumulates analytic gradients into grad_out when non-null.
double denoising_loss(const Policy& pol, const DenoisingBatch& batch, const DiffusionSchedule& sched,
                      PolicyGrad* grad_out);

// One SGD step on a freshly prepared batch; returns (loss, updated policy).
std::pair<double, Policy> denoising_step(const Policy& pol, const std::vector<LayoutVector>& data,
                                         const DiffusionSchedule& sched, Rng& rng, double lr);

} // namespace ssx

#endif
