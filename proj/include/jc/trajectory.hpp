#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "jc/lindblad.hpp"
#include "jc/qstate.hpp"
#include "jc/rng.hpp"

namespace jc {

struct JumpEvent {
    double t = 0.0;
    int alpha = 0;                       // actual jump position
    std::optional<int> reported;         // detected position, if any
    std::optional<double> recovered_at;  // when a recovery unitary was applied
};

struct TrajectoryRecord {
    std::vector<JumpEvent> events; // ordered by time
    StateVector final_state;
    bool survived = false;
};

// Table of recovery unitaries indexed by position (entry alpha-1); entries
// may be empty when no recovery exists for that position.
using RecoveryTable = std::vector<Eigen::MatrixXcd>;

// Presented to the handler right after a jump has been applied and the state
// renormalized. The handler may mutate psi (immediate unitary recovery),
// set the reported position, mark the event recovered, or schedule a future
// unitary.
struct JumpContext {
    double t;
    int alpha;
    Eigen::VectorXcd& psi;
    RngStream& rng;

    std::optional<int> reported;
    bool recovered_now = false;
    std::optional<std::pair<double, const Eigen::MatrixXcd*>> scheduled;
};

class JumpHandler {
public:
    virtual ~JumpHandler() = default;
    virtual void on_jump(JumpContext& ctx) = 0;
    // fresh per-trajectory instance (handlers may carry per-run state)
    virtual std::unique_ptr<JumpHandler> clone() const = 0;
};

// Detection without any reaction: jumps happen, nothing is reported.
class IdentityHandler : public JumpHandler {
public:
    void on_jump(JumpContext&) override {}
    std::unique_ptr<JumpHandler> clone() const override {
        return std::make_unique<IdentityHandler>();
    }
};

struct TrajectoryOptions {
    double dt = 0.0;       // between-jump substep; 0 => 1e-2 / frequency scale
    double time_tol = 0.0; // jump-time resolution; 0 => 1e-9 / kappa_max
};

// Cached dyadic propagators exp(-i H_eff dt / 2^j). H_eff is decomposed into
// independent index blocks (connected components of its coupling graph), so
// stepping costs O(sum of block sizes squared) rather than a full dense
// matvec; purely diagonal parts advance by scalar factors.
class StepPropagator {
public:
    StepPropagator(const SparseOperator& h_eff, double dt, double time_tol);

    double dt() const { return dt_; }
    int levels() const { return levels_; }
    void step(Eigen::VectorXcd& psi) const { step_level(psi, 0); }
    void step_level(Eigen::VectorXcd& psi, int level) const;
    void advance(Eigen::VectorXcd& psi, double tau) const; // any tau in [0, dt]

private:
    struct Block {
        std::vector<Eigen::Index> indices;
        Eigen::MatrixXcd generator;          // -i H_eff restricted to the block
        std::vector<Eigen::MatrixXcd> prop;  // per level
    };

    double dt_ = 0.0;
    int levels_ = 0;
    Eigen::Index dim_ = 0;
    std::vector<Eigen::Index> scalar_indices_;
    Eigen::VectorXcd scalar_gen_;               // -i H_eff diagonal on scalars
    std::vector<Eigen::VectorXcd> scalar_prop_; // per level, aligned with scalar_indices_
    std::vector<Block> blocks_;
};

// Shared immutable context for sampling trajectories of one physical setup.
class TrajectoryEngine {
public:
    TrajectoryEngine(StateVector psi0, const SparseOperator& h, DecayModel model,
                     double t_final, const TrajectoryOptions& opts = {});

    TrajectoryRecord run(JumpHandler& handler, RngStream& rng) const;

    const StateVector& psi0() const { return psi0_; }
    double t_final() const { return t_final_; }

private:
    void do_jump(double t, Eigen::VectorXcd& psi, JumpHandler& handler, RngStream& rng,
                 std::vector<JumpEvent>& events,
                 std::vector<std::pair<double, const Eigen::MatrixXcd*>>& pending) const;

    StateVector psi0_;
    DecayModel model_;
    double t_final_;
    int n_;
    std::vector<std::uint32_t> jump_bits_; // per alpha
    std::vector<double> jump_rates_;
    std::unique_ptr<StepPropagator> prop_;
};

// One trajectory of the waiting-time unraveling.
TrajectoryRecord sample_trajectory(const StateVector& psi0, const SparseOperator& h,
                                   const DecayModel& model, double t_final, JumpHandler& handler,
                                   RngStream& rng, const TrajectoryOptions& opts = {});

struct EnsembleOptions {
    std::optional<StateVector> fidelity_target; // default: psi0
    bool accumulate_rho = false;
    int threads = 0; // 0 => hardware concurrency
    TrajectoryOptions trajectory;
};

struct EnsembleResult {
    long n_traj = 0;
    long n_failed = 0;
    double mean_fidelity = 0.0;
    double std_error = 0.0;
    double mean_jump_count = 0.0;
    double jump_count_std_error = 0.0;
    std::optional<DensityMatrix> rho_estimate;
    // per-entry standard error of rho_estimate from batch means
    std::optional<Eigen::MatrixXd> rho_std_error;
};

// n_traj independent trajectories with per-index random streams derived from
// master_seed; the reduction is bit-identical for any thread count.
EnsembleResult ensemble_average(const StateVector& psi0, const SparseOperator& h,
                                const DecayModel& model, double t_final,
                                const JumpHandler& handler_proto, long n_traj,
                                std::uint64_t master_seed, const EnsembleOptions& opts = {});

// Probability density of a complete measurement record on [0, t].
double record_probability(const StateVector& psi0, const SparseOperator& h,
                          const DecayModel& model, const TrajectoryRecord& record, double t);

// Deterministic fixed-chunk parallel loop: fn(begin, end) over [0, n).
void parallel_chunks(long n_items, long chunk_size, int threads,
                     const std::function<void(long, long)>& fn);

} // namespace jc
