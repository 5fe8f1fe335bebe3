#include "jc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace jc {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fmt12(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace

GroverModel grover_model(const JumpCode& code, int target_index, double omega) {
    if (code.dimension < 2) throw std::domain_error("grover_model: need at least two codewords");
    if (target_index < 0 || target_index >= code.dimension)
        throw std::domain_error("grover_model: target index out of range");
    GroverModel m;
    m.code = code;
    m.target_index = target_index;
    m.omega = omega;
    m.x0 = code.codewords[static_cast<std::size_t>(target_index)];
    m.v_state = uniform_code_state(code);
    const Eigen::MatrixXcd h =
        cplx(0.0, omega) * (m.x0.amps * m.v_state.amps.adjoint() -
                            m.v_state.amps * m.x0.amps.adjoint());
    m.hamiltonian = SparseOperator::from_dense(code.n_qubits, h, 0.0);
    return m;
}

double grover_ideal_fidelity(int dimension) {
    const double s = 1.0 / std::sqrt(static_cast<double>(dimension));
    const double c = std::sqrt(1.0 - s * s);
    const double overlap = std::cos(std::acos(s) - 0.5 * std::numbers::pi * c);
    return overlap * overlap;
}

StateVector uniform_code_state(const JumpCode& code) {
    StateVector v(code.n_qubits);
    v.amps.setZero();
    for (const auto& c : code.codewords) v.amps += c.amps;
    v.amps /= std::sqrt(static_cast<double>(code.dimension));
    return v;
}

JumpCode bare_code(const JumpCode& code) {
    JumpCode bare;
    bare.n_qubits = code.n_qubits;
    bare.weight = code.weight;
    bare.order = 0;
    bare.dimension = code.dimension;
    for (const auto& c : code.codewords) {
        Eigen::Index first = -1;
        for (Eigen::Index x = 0; x < c.dim(); ++x)
            if (std::abs(c[x]) > 1e-14) {
                first = x;
                break;
            }
        if (first < 0) throw std::domain_error("bare_code: empty codeword");
        bare.codewords.push_back(
            StateVector::basis(code.n_qubits, static_cast<std::uint32_t>(first)));
    }
    bare.check_invariants();
    return bare;
}

std::string ImperfectionConfig::to_json() const {
    nlohmann::json j;
    j["q"] = q;
    j["delta_kappa"] = delta_kappa;
    j["delay"] = delay;
    j["dead_time"] = dead_time;
    j["kappa_mean"] = kappa_mean;
    return j.dump(2);
}

void PerfectRecoveryHandler::on_jump(JumpContext& ctx) {
    ctx.reported = ctx.alpha;
    const Eigen::MatrixXcd& u = (*table_)[static_cast<std::size_t>(ctx.alpha - 1)];
    ctx.psi = u * ctx.psi;
    ctx.recovered_now = true;
}

MisdetectionHandler::MisdetectionHandler(const RecoveryTable* table, double q, int n_qubits)
    : table_(table), q_(q), n_(n_qubits) {
    if (q_ < 0.0 || q_ >= 1.0) throw std::domain_error("misdetection: need 0 <= q < 1");
}

void MisdetectionHandler::on_jump(JumpContext& ctx) {
    // report beta with weight q^{|beta-alpha|}, candidates ordered by distance
    // so that a shared uniform draw degrades monotonically in q
    int beta = ctx.alpha;
    if (q_ > 0.0) {
        std::vector<std::pair<int, int>> candidates; // (distance, beta)
        for (int b = 1; b <= n_; ++b) candidates.emplace_back(std::abs(b - ctx.alpha), b);
        std::sort(candidates.begin(), candidates.end());
        double total = 0.0;
        for (const auto& cand : candidates) total += std::pow(q_, cand.first);
        double u = ctx.rng.uniform() * total;
        beta = candidates.back().second;
        for (const auto& cand : candidates) {
            u -= std::pow(q_, cand.first);
            if (u < 0.0) {
                beta = cand.second;
                break;
            }
        }
    }
    ctx.reported = beta;
    const Eigen::MatrixXcd& u_beta = (*table_)[static_cast<std::size_t>(beta - 1)];
    ctx.psi = u_beta * ctx.psi;
    ctx.recovered_now = true;
}

void DelayedRecoveryHandler::on_jump(JumpContext& ctx) {
    ctx.reported = ctx.alpha;
    const Eigen::MatrixXcd& u = (*table_)[static_cast<std::size_t>(ctx.alpha - 1)];
    if (delay_ <= 0.0) {
        ctx.psi = u * ctx.psi;
        ctx.recovered_now = true;
    } else {
        ctx.scheduled = {ctx.t + delay_, &u};
    }
}

void DeadtimeHandler::on_jump(JumpContext& ctx) {
    if (ctx.t < blind_until_) return; // unreported, unrecovered
    ctx.reported = ctx.alpha;
    const Eigen::MatrixXcd& u = (*table_)[static_cast<std::size_t>(ctx.alpha - 1)];
    ctx.psi = u * ctx.psi;
    ctx.recovered_now = true;
    blind_until_ = ctx.t + dead_time_;
}

ExperimentResult memory_misdetection(const JumpCode& code, double q, double kappa,
                                     double t_final, long n_traj, std::uint64_t master_seed,
                                     const RunOptions& opts) {
    if (q < 0.0 || q >= 1.0) throw std::domain_error("memory_misdetection: need 0 <= q < 1");
    const double t0 = now_seconds();
    const DecayModel model = DecayModel::uniform(code.n_qubits, kappa);
    const RecoveryTable table = build_recovery_table(code, model);
    const StateVector psi0 = uniform_code_state(code);
    const SparseOperator h0(code.n_qubits); // H = 0
    if (t_final <= 0.0) t_final = 0.5 * std::numbers::pi / kappa;

    MisdetectionHandler handler(&table, q, code.n_qubits);
    EnsembleOptions eopts;
    eopts.threads = opts.threads;
    eopts.trajectory.dt = opts.dt;
    const EnsembleResult res =
        ensemble_average(psi0, h0, model, t_final, handler, n_traj, master_seed, eopts);

    ExperimentResult out;
    out.experiment = "memory";
    out.parameter = q;
    out.kappa = kappa;
    out.mean_fidelity = res.mean_fidelity;
    out.std_error = res.std_error;
    out.mean_jump_count = res.mean_jump_count;
    out.n = res.n_traj;
    out.seed = master_seed;
    out.wall_time_s = now_seconds() - t0;
    return out;
}

ExperimentResult grover_unequal_rates(const JumpCode& code, double kappa_mean,
                                      double delta_kappa, long n_samples,
                                      std::uint64_t master_seed, bool encoded,
                                      const RunOptions& opts) {
    if (delta_kappa < 0.0)
        throw std::domain_error("grover_unequal_rates: negative rate spread");
    if (n_samples < 1) throw std::domain_error("grover_unequal_rates: need samples");
    const double t0 = now_seconds();
    const double omega = 1.0; // everything in units of the Rabi frequency
    const JumpCode working = encoded ? code : bare_code(code);
    const GroverModel gm = grover_model(working, 0, omega);
    const double tau = 0.5 * std::numbers::pi / omega;
    const DensityMatrix rho0 = DensityMatrix::pure(gm.v_state);

    std::optional<JumpDressing> dressing;
    if (encoded) {
        // recovery directions do not depend on rate magnitudes, so one table
        // serves every sample
        dressing = recovery_dressing(working, DecayModel::uniform(code.n_qubits, 1.0));
    }

    std::vector<double> fid(static_cast<std::size_t>(n_samples), 0.0);
    parallel_chunks(n_samples, 1, opts.threads, [&](long begin, long end) {
        for (long s = begin; s < end; ++s) {
            RngStream rng(master_seed, static_cast<std::uint64_t>(s));
            std::vector<double> kappas(static_cast<std::size_t>(code.n_qubits));
            for (auto& kv : kappas) {
                do {
                    kv = kappa_mean + delta_kappa * rng.normal();
                } while (kv < 0.0);
            }
            const DecayModel model(code.n_qubits, kappas);
            const double dt =
                opts.dt > 0.0 ? opts.dt
                              : 1e-2 / std::max({omega, model.kappa_max(), 1.0});
            const DensityMatrix rho = integrate_master(
                rho0, gm.hamiltonian, model, dressing ? &*dressing : nullptr, tau, dt);
            fid[static_cast<std::size_t>(s)] = fidelity(rho, gm.x0);
        }
    });

    double mean = 0.0;
    for (double f : fid) mean += f;
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (double f : fid) var += (f - mean) * (f - mean);

    ExperimentResult out;
    out.experiment = encoded ? "grover-rates" : "grover-rates-bare";
    out.parameter = delta_kappa;
    out.kappa = kappa_mean;
    out.mean_fidelity = mean;
    out.std_error = n_samples > 1 ? std::sqrt(var / static_cast<double>(n_samples - 1)) /
                                        std::sqrt(static_cast<double>(n_samples))
                                  : 0.0;
    out.n = n_samples;
    out.seed = master_seed;
    out.wall_time_s = now_seconds() - t0;
    return out;
}

namespace {

ExperimentResult run_grover_trajectories(const char* name, const JumpCode& code, double kappa,
                                         double parameter, const JumpHandler& handler,
                                         long n_traj, std::uint64_t master_seed,
                                         const RunOptions& opts) {
    const double t0 = now_seconds();
    const double omega = 1.0;
    const GroverModel gm = grover_model(code, 0, omega);
    const double tau = 0.5 * std::numbers::pi / omega;
    const DecayModel model = DecayModel::uniform(code.n_qubits, kappa);

    EnsembleOptions eopts;
    eopts.threads = opts.threads;
    eopts.trajectory.dt = opts.dt;
    eopts.fidelity_target = gm.x0;
    const EnsembleResult res =
        ensemble_average(gm.v_state, gm.hamiltonian, model, tau, handler, n_traj, master_seed,
                         eopts);

    ExperimentResult out;
    out.experiment = name;
    out.parameter = parameter;
    out.kappa = kappa;
    out.mean_fidelity = res.mean_fidelity;
    out.std_error = res.std_error;
    out.mean_jump_count = res.mean_jump_count;
    out.n = res.n_traj;
    out.seed = master_seed;
    out.wall_time_s = now_seconds() - t0;
    return out;
}

} // namespace

ExperimentResult grover_delay(const JumpCode& code, double kappa, double delay, long n_traj,
                              std::uint64_t master_seed, const RunOptions& opts) {
    if (delay < 0.0) throw std::domain_error("grover_delay: negative delay");
    const DecayModel model = DecayModel::uniform(code.n_qubits, kappa);
    const RecoveryTable table = build_recovery_table(code, model);
    DelayedRecoveryHandler handler(&table, delay);
    return run_grover_trajectories("grover-delay", code, kappa, delay, handler, n_traj,
                                   master_seed, opts);
}

ExperimentResult grover_deadtime(const JumpCode& code, double kappa_mean, double dead_time,
                                 long n_traj, std::uint64_t master_seed,
                                 const RunOptions& opts) {
    if (dead_time < 0.0) throw std::domain_error("grover_deadtime: negative dead time");
    const DecayModel model = DecayModel::uniform(code.n_qubits, kappa_mean);
    const RecoveryTable table = build_recovery_table(code, model);
    DeadtimeHandler handler(&table, dead_time);
    return run_grover_trajectories("grover-deadtime", code, kappa_mean, dead_time, handler,
                                   n_traj, master_seed, opts);
}

void write_sweep_csv(std::ostream& os, const std::vector<ExperimentResult>& rows,
                     const std::string& tool_version, const std::string& config_hash,
                     std::uint64_t seed, bool with_timing) {
    os << "# jumpcode " << tool_version << "\n";
    os << "# config-hash " << config_hash << "\n";
    os << "# seed " << seed << "\n";
    os << "experiment,kappa,parameter,mean_fidelity,std_error,mean_jump_count,n,seed,wall_time_s\n";
    for (const auto& r : rows) {
        os << r.experiment << "," << fmt12(r.kappa) << "," << fmt12(r.parameter) << ","
           << fmt12(r.mean_fidelity) << "," << fmt12(r.std_error) << ","
           << fmt12(r.mean_jump_count) << "," << r.n << "," << r.seed << ","
           << (with_timing ? fmt12(r.wall_time_s) : std::string("0")) << "\n";
    }
}

std::string sweep_json(const std::vector<ExperimentResult>& rows,
                       const std::string& tool_version, const std::string& config_hash,
                       std::uint64_t seed, bool with_timing) {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row;
        row["experiment"] = r.experiment;
        row["kappa"] = r.kappa;
        row["parameter"] = r.parameter;
        row["mean_fidelity"] = r.mean_fidelity;
        row["std_error"] = r.std_error;
        row["mean_jump_count"] = r.mean_jump_count;
        row["n"] = r.n;
        row["seed"] = r.seed;
        row["wall_time_s"] = with_timing ? r.wall_time_s : 0.0;
        arr.push_back(row);
    }
    j["rows"] = arr;
    return j.dump(2);
}

} // namespace jc
