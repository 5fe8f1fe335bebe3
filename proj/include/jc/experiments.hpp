#pragma once

#include <iosfwd>
#include <string>

#include "jc/jumpcodes.hpp"
#include "jc/recovery.hpp"
#include "jc/trajectory.hpp"

namespace jc {

// Two-level Rabi Hamiltonian H = i Omega (|x0><v| - |v><x0|) on the full
// 2^N space, with |v> the uniform superposition of the codewords.
struct GroverModel {
    JumpCode code;
    int target_index = 0;
    double omega = 0.0;
    StateVector v_state;
    StateVector x0;
    SparseOperator hamiltonian;
};

GroverModel grover_model(const JumpCode& code, int target_index, double omega);

// |v> rotates onto |x0> under H; with s = <v|x0> = 1/sqrt(K) the overlap at
// tau = pi/(2 Omega) is cos(arccos(s) - (pi/2) sqrt(1 - s^2)).
double grover_ideal_fidelity(int dimension);

struct ImperfectionConfig {
    double q = 0.0;
    double delta_kappa = 0.0;
    double delay = 0.0;
    double dead_time = 0.0;
    double kappa_mean = 0.0;

    std::string to_json() const;
};

struct ExperimentResult {
    std::string experiment;
    double parameter = 0.0;   // the swept imperfection value
    double kappa = 0.0;
    double mean_fidelity = 0.0;
    double std_error = 0.0;
    double mean_jump_count = 0.0;
    long n = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

// K^{-1/2} sum_i |c_i>
StateVector uniform_code_state(const JumpCode& code);

// Unencoded comparison: the lexicographically smaller support ket of each
// codeword as a bare basis-state "codeword"; no recovery applies.
JumpCode bare_code(const JumpCode& code);

struct RunOptions {
    int threads = 0;
    double dt = 0.0; // 0 => module default
};

// Quantum memory (H = 0) with misdetected jump positions: the reported qubit
// beta is drawn with weight q^{|beta-alpha|}, renormalized over 1..N, and
// U_beta is applied immediately. Fidelity against psi(0) at t_final.
ExperimentResult memory_misdetection(const JumpCode& code, double q, double kappa,
                                     double t_final, long n_traj, std::uint64_t master_seed,
                                     const RunOptions& opts = {});

// Rabi dynamics with per-qubit rates drawn from a Gaussian (mean kappa_mean,
// s.d. delta_kappa, negative draws resampled); master-equation integration
// with perfect immediate recovery folded into the dissipator. encoded=false
// runs the bare-basis comparison without recovery.
ExperimentResult grover_unequal_rates(const JumpCode& code, double kappa_mean,
                                      double delta_kappa, long n_samples,
                                      std::uint64_t master_seed, bool encoded,
                                      const RunOptions& opts = {});

// Rabi dynamics where each detected jump schedules its recovery at
// detection time + delay.
ExperimentResult grover_delay(const JumpCode& code, double kappa, double delay, long n_traj,
                              std::uint64_t master_seed, const RunOptions& opts = {});

// Rabi dynamics with a global detector dead time: jumps during the blind
// window act on the state but are never reported or recovered.
ExperimentResult grover_deadtime(const JumpCode& code, double kappa_mean, double dead_time,
                                 long n_traj, std::uint64_t master_seed,
                                 const RunOptions& opts = {});

// ---- trajectory handlers used by the experiments ----

class PerfectRecoveryHandler : public JumpHandler {
public:
    explicit PerfectRecoveryHandler(const RecoveryTable* table) : table_(table) {}
    void on_jump(JumpContext& ctx) override;
    std::unique_ptr<JumpHandler> clone() const override {
        return std::make_unique<PerfectRecoveryHandler>(table_);
    }

private:
    const RecoveryTable* table_;
};

class MisdetectionHandler : public JumpHandler {
public:
    MisdetectionHandler(const RecoveryTable* table, double q, int n_qubits);
    void on_jump(JumpContext& ctx) override;
    std::unique_ptr<JumpHandler> clone() const override {
        return std::make_unique<MisdetectionHandler>(*this);
    }

private:
    const RecoveryTable* table_;
    double q_;
    int n_;
};

class DelayedRecoveryHandler : public JumpHandler {
public:
    DelayedRecoveryHandler(const RecoveryTable* table, double delay)
        : table_(table), delay_(delay) {}
    void on_jump(JumpContext& ctx) override;
    std::unique_ptr<JumpHandler> clone() const override {
        return std::make_unique<DelayedRecoveryHandler>(*this);
    }

private:
    const RecoveryTable* table_;
    double delay_;
};

class DeadtimeHandler : public JumpHandler {
public:
    DeadtimeHandler(const RecoveryTable* table, double dead_time)
        : table_(table), dead_time_(dead_time) {}
    void on_jump(JumpContext& ctx) override;
    std::unique_ptr<JumpHandler> clone() const override {
        auto h = std::make_unique<DeadtimeHandler>(table_, dead_time_);
        return h;
    }

private:
    const RecoveryTable* table_;
    double dead_time_;
    double blind_until_ = -1.0;
};

// CSV with a fixed column order and a provenance header; floats printed with
// 12 significant digits.
void write_sweep_csv(std::ostream& os, const std::vector<ExperimentResult>& rows,
                     const std::string& tool_version, const std::string& config_hash,
                     std::uint64_t seed, bool with_timing);
std::string sweep_json(const std::vector<ExperimentResult>& rows,
                       const std::string& tool_version, const std::string& config_hash,
                       std::uint64_t seed, bool with_timing);

} // namespace jc
