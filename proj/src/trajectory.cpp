#include "jc/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace jc {

namespace {

constexpr double kNormFloor = 1e-300;
constexpr long kChunk = 512; // fixed reduction granule, independent of thread count

// frequency scale for step-size defaults: decay rates plus the magnitude of H
double frequency_scale(const SparseOperator& h, const DecayModel& model) {
    double scale = model.kappa_max();
    const SparseMat& m = h.matrix();
    Eigen::VectorXd col = Eigen::VectorXd::Zero(m.cols());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it) col[it.col()] += std::abs(it.value());
    if (m.nonZeros() > 0) scale = std::max(scale, col.maxCoeff());
    return std::max(scale, 1e-12);
}

struct UnionFind {
    std::vector<Eigen::Index> parent;
    explicit UnionFind(Eigen::Index n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    Eigen::Index find(Eigen::Index i) {
        while (parent[static_cast<std::size_t>(i)] != i)
            i = parent[static_cast<std::size_t>(i)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        return i;
    }
    void unite(Eigen::Index a, Eigen::Index b) {
        parent[static_cast<std::size_t>(find(a))] = find(b);
    }
};

} // namespace

StepPropagator::StepPropagator(const SparseOperator& h_eff, double dt, double time_tol) {
    if (!(dt > 0.0)) throw std::domain_error("StepPropagator: dt must be positive");
    if (!(time_tol > 0.0)) throw std::domain_error("StepPropagator: time_tol must be positive");
    dt_ = dt;
    dim_ = h_eff.dim();
    levels_ = 1;
    while (dt_ / std::pow(2.0, levels_) > time_tol && levels_ < 40) ++levels_;

    // group indices into connected components of the off-diagonal coupling graph
    const SparseMat& m = h_eff.matrix();
    UnionFind uf(dim_);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it)
            if (it.row() != it.col() && std::abs(it.value()) > 0.0) uf.unite(it.row(), it.col());

    std::vector<std::vector<Eigen::Index>> groups(static_cast<std::size_t>(dim_));
    for (Eigen::Index i = 0; i < dim_; ++i)
        groups[static_cast<std::size_t>(uf.find(i))].push_back(i);

    scalar_gen_ = Eigen::VectorXcd::Zero(dim_);
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(dim_);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it)
            if (it.row() == it.col()) diag[it.row()] = it.value();

    for (auto& g : groups) {
        if (g.empty()) continue;
        if (g.size() == 1) {
            scalar_indices_.push_back(g[0]);
            continue;
        }
        Block blk;
        blk.indices = g;
        const Eigen::Index bd = static_cast<Eigen::Index>(g.size());
        blk.generator = Eigen::MatrixXcd::Zero(bd, bd);
        std::vector<Eigen::Index> pos_of(static_cast<std::size_t>(dim_), -1);
        for (Eigen::Index p = 0; p < bd; ++p) pos_of[static_cast<std::size_t>(g[static_cast<std::size_t>(p)])] = p;
        for (Eigen::Index p = 0; p < bd; ++p) {
            const Eigen::Index col = g[static_cast<std::size_t>(p)];
            for (SparseMat::InnerIterator it(m, static_cast<int>(col)); it; ++it) {
                const Eigen::Index rp = pos_of[static_cast<std::size_t>(it.row())];
                if (rp >= 0) blk.generator(rp, p) = cplx(0.0, -1.0) * it.value();
            }
        }
        blocks_.push_back(std::move(blk));
    }

    const std::size_t nscal = scalar_indices_.size();
    Eigen::VectorXcd sg(nscal);
    for (std::size_t i = 0; i < nscal; ++i)
        sg[static_cast<Eigen::Index>(i)] = cplx(0.0, -1.0) * diag[scalar_indices_[i]];
    scalar_gen_ = sg;

    // finest level by direct series, coarser levels by squaring
    scalar_prop_.assign(static_cast<std::size_t>(levels_) + 1, Eigen::VectorXcd());
    const double tau_min = dt_ / std::pow(2.0, levels_);
    for (int lv = levels_; lv >= 0; --lv) {
        const double tau = dt_ / std::pow(2.0, lv);
        scalar_prop_[static_cast<std::size_t>(lv)] = (sg * tau).array().exp();
    }
    for (auto& blk : blocks_) {
        blk.prop.assign(static_cast<std::size_t>(levels_) + 1, Eigen::MatrixXcd());
        const Eigen::Index bd = blk.generator.rows();
        blk.prop[static_cast<std::size_t>(levels_)] =
            expm_action(Eigen::MatrixXcd(blk.generator * tau_min),
                        Eigen::MatrixXcd(Eigen::MatrixXcd::Identity(bd, bd)));
        for (int lv = levels_ - 1; lv >= 0; --lv)
            blk.prop[static_cast<std::size_t>(lv)] =
                blk.prop[static_cast<std::size_t>(lv + 1)] * blk.prop[static_cast<std::size_t>(lv + 1)];
    }
}

void StepPropagator::step_level(Eigen::VectorXcd& psi, int level) const {
    const auto lv = static_cast<std::size_t>(level);
    const Eigen::VectorXcd& sp = scalar_prop_[lv];
    for (std::size_t i = 0; i < scalar_indices_.size(); ++i)
        psi[scalar_indices_[i]] *= sp[static_cast<Eigen::Index>(i)];
    for (const auto& blk : blocks_) {
        const Eigen::Index bd = static_cast<Eigen::Index>(blk.indices.size());
        Eigen::VectorXcd sub(bd);
        for (Eigen::Index p = 0; p < bd; ++p) sub[p] = psi[blk.indices[static_cast<std::size_t>(p)]];
        sub = blk.prop[lv] * sub;
        for (Eigen::Index p = 0; p < bd; ++p) psi[blk.indices[static_cast<std::size_t>(p)]] = sub[p];
    }
}

void StepPropagator::advance(Eigen::VectorXcd& psi, double tau) const {
    if (tau < 0.0 || tau > dt_ * (1.0 + 1e-12))
        throw std::domain_error("StepPropagator::advance: tau outside [0, dt]");
    if (tau == 0.0) return;
    for (std::size_t i = 0; i < scalar_indices_.size(); ++i)
        psi[scalar_indices_[i]] *= std::exp(scalar_gen_[static_cast<Eigen::Index>(i)] * tau);
    for (const auto& blk : blocks_) {
        const Eigen::Index bd = static_cast<Eigen::Index>(blk.indices.size());
        Eigen::VectorXcd sub(bd);
        for (Eigen::Index p = 0; p < bd; ++p) sub[p] = psi[blk.indices[static_cast<std::size_t>(p)]];
        sub = expm_action(Eigen::MatrixXcd(blk.generator * tau), Eigen::MatrixXcd(sub));
        for (Eigen::Index p = 0; p < bd; ++p) psi[blk.indices[static_cast<std::size_t>(p)]] = sub[p];
    }
}

TrajectoryEngine::TrajectoryEngine(StateVector psi0, const SparseOperator& h, DecayModel model,
                                   double t_final, const TrajectoryOptions& opts)
    : psi0_(std::move(psi0)), model_(std::move(model)), t_final_(t_final), n_(model_.n_qubits) {
    if (psi0_.n_qubits != model_.n_qubits || h.n_qubits() != model_.n_qubits)
        throw std::domain_error("TrajectoryEngine: qubit count mismatch");
    if (t_final_ < 0.0) throw std::domain_error("TrajectoryEngine: negative final time");
    if (std::abs(psi0_.norm2() - 1.0) > 1e-6)
        throw std::domain_error("TrajectoryEngine: initial state not normalized");

    const double scale = frequency_scale(h, model_);
    double dt = opts.dt > 0.0 ? opts.dt : 1e-2 / scale;
    if (t_final_ > 0.0) dt = std::min(dt, t_final_);
    const double tol =
        opts.time_tol > 0.0 ? opts.time_tol : 1e-9 / std::max(model_.kappa_max(), 1e-12);

    prop_ = std::make_unique<StepPropagator>(effective_hamiltonian(h, model_), dt, tol);

    for (int alpha = 1; alpha <= n_; ++alpha) {
        jump_bits_.push_back(1u << (n_ - alpha));
        jump_rates_.push_back(model_.kappa(alpha));
    }
}

void TrajectoryEngine::do_jump(double t, Eigen::VectorXcd& psi, JumpHandler& handler,
                               RngStream& rng, std::vector<JumpEvent>& events,
                               std::vector<std::pair<double, const Eigen::MatrixXcd*>>& pending)
    const {
    // channel weights ||L_alpha psi||^2 = kappa_alpha * sum_{x excited at alpha} |psi_x|^2
    std::vector<double> weights(static_cast<std::size_t>(n_), 0.0);
    const Eigen::Index d = psi.size();
    for (int a = 0; a < n_; ++a) {
        if (jump_rates_[static_cast<std::size_t>(a)] == 0.0) continue;
        const std::uint32_t bit = jump_bits_[static_cast<std::size_t>(a)];
        double s = 0.0;
        for (Eigen::Index x = 0; x < d; ++x)
            if (static_cast<std::uint32_t>(x) & bit) s += std::norm(psi[x]);
        weights[static_cast<std::size_t>(a)] = jump_rates_[static_cast<std::size_t>(a)] * s;
    }
    const int choice = rng.weighted_choice(weights);
    if (choice < 0) throw numeric_error("sample_trajectory: no jump channel has weight");
    const int alpha = choice + 1;

    // apply L_alpha and renormalize
    const std::uint32_t bit = jump_bits_[static_cast<std::size_t>(choice)];
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(d);
    for (Eigen::Index x = 0; x < d; ++x)
        if (static_cast<std::uint32_t>(x) & bit)
            out[x & static_cast<Eigen::Index>(~bit)] = psi[x];
    const double n2 = out.squaredNorm();
    if (n2 < kNormFloor) throw numeric_error("sample_trajectory: norm underflow at jump");
    psi = out / std::sqrt(n2);

    JumpContext ctx{t, alpha, psi, rng, std::nullopt, false, std::nullopt};
    handler.on_jump(ctx);

    JumpEvent ev;
    ev.t = t;
    ev.alpha = alpha;
    ev.reported = ctx.reported;
    if (ctx.recovered_now) ev.recovered_at = t;
    events.push_back(ev);
    if (ctx.scheduled) {
        pending.push_back(*ctx.scheduled);
        std::push_heap(pending.begin(), pending.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
    }
}

TrajectoryRecord TrajectoryEngine::run(JumpHandler& handler, RngStream& rng) const {
    Eigen::VectorXcd psi = psi0_.amps;
    double t = 0.0;
    double u = rng.uniform_pos();

    std::vector<JumpEvent> events;
    // min-heap of (time, unitary); recovered_at is filled on application by
    // matching the earliest unrecovered reported event
    std::vector<std::pair<double, const Eigen::MatrixXcd*>> pending;
    auto heap_less = [](const auto& a, const auto& b) { return a.first > b.first; };

    const double eps = 1e-12 * std::max(1.0, t_final_);
    // the stop time is re-derived every segment: a jump may schedule a new
    // recovery that lands before anything previously known
    while (true) {
        const double t_sched = pending.empty() ? std::numeric_limits<double>::infinity()
                                               : pending.front().first;

        if (t_sched <= t + eps && t_sched <= t_final_ + eps) {
            // apply the due unitary (norm-preserving, jump statistics unaffected)
            std::pop_heap(pending.begin(), pending.end(), heap_less);
            const auto [t_apply, unitary] = pending.back();
            pending.pop_back();
            psi = (*unitary) * psi;
            for (auto& ev : events)
                if (ev.reported && !ev.recovered_at) {
                    ev.recovered_at = t_apply;
                    break;
                }
            continue;
        }

        const double t_stop = std::min(t_final_, t_sched);
        if (t >= t_stop - eps) {
            if (t >= t_final_ - eps) break;
            t = t_stop;
            continue;
        }

        const double tau = std::min(prop_->dt(), t_stop - t);
        Eigen::VectorXcd trial = psi;
        if (tau == prop_->dt())
            prop_->step(trial);
        else
            prop_->advance(trial, tau);

        if (trial.squaredNorm() >= u) {
            psi = std::move(trial);
            t += tau;
            continue;
        }

        // crossing inside (t, t+tau]: refine to the propagator resolution
        if (tau == prop_->dt()) {
            double t_loc = 0.0;
            for (int lv = 1; lv <= prop_->levels(); ++lv) {
                Eigen::VectorXcd probe = psi;
                prop_->step_level(probe, lv);
                if (probe.squaredNorm() >= u) {
                    psi = std::move(probe);
                    t_loc += prop_->dt() / std::pow(2.0, lv);
                }
            }
            t += t_loc;
        } else {
            double lo = 0.0, hi = tau;
            for (int it = 0; it < prop_->levels(); ++it) {
                const double mid = 0.5 * (lo + hi);
                Eigen::VectorXcd probe = psi;
                prop_->advance(probe, mid - lo);
                if (probe.squaredNorm() >= u) {
                    psi = std::move(probe);
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            t += lo;
        }
        if (psi.squaredNorm() < kNormFloor)
            throw numeric_error("sample_trajectory: norm underflow");
        do_jump(t, psi, handler, rng, events, pending);
        u = rng.uniform_pos();
    }

    TrajectoryRecord rec;
    rec.events = std::move(events);
    rec.final_state = psi0_;
    rec.final_state.amps = psi;
    rec.final_state.normalize();
    rec.survived = true;
    return rec;
}

TrajectoryRecord sample_trajectory(const StateVector& psi0, const SparseOperator& h,
                                   const DecayModel& model, double t_final, JumpHandler& handler,
                                   RngStream& rng, const TrajectoryOptions& opts) {
    TrajectoryEngine engine(psi0, h, model, t_final, opts);
    return engine.run(handler, rng);
}

void parallel_chunks(long n_items, long chunk_size, int threads,
                     const std::function<void(long, long)>& fn) {
    if (n_items <= 0) return;
    const long n_chunks = (n_items + chunk_size - 1) / chunk_size;
    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = static_cast<int>(std::min<long>(n_threads, n_chunks));
    if (n_threads == 1) {
        for (long c = 0; c < n_chunks; ++c)
            fn(c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const long c = next.fetch_add(1);
                if (c >= n_chunks) return;
                try {
                    fn(c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

EnsembleResult ensemble_average(const StateVector& psi0, const SparseOperator& h,
                                const DecayModel& model, double t_final,
                                const JumpHandler& handler_proto, long n_traj,
                                std::uint64_t master_seed, const EnsembleOptions& opts) {
    if (n_traj < 1) throw std::domain_error("ensemble_average: need at least one trajectory");
    TrajectoryEngine engine(psi0, h, model, t_final, opts.trajectory);
    const StateVector& target = opts.fidelity_target ? *opts.fidelity_target : psi0;
    if (target.n_qubits != psi0.n_qubits)
        throw std::domain_error("ensemble_average: fidelity target dimension mismatch");

    const long n_chunks = (n_traj + kChunk - 1) / kChunk;
    std::vector<double> fid(static_cast<std::size_t>(n_traj), 0.0);
    std::vector<double> jumps(static_cast<std::size_t>(n_traj), 0.0);
    std::vector<char> ok(static_cast<std::size_t>(n_traj), 0);
    const Eigen::Index d = psi0.amps.size();
    std::vector<Eigen::MatrixXcd> chunk_rho;
    std::vector<long> chunk_count;
    if (opts.accumulate_rho) {
        chunk_rho.assign(static_cast<std::size_t>(n_chunks), Eigen::MatrixXcd::Zero(d, d));
        chunk_count.assign(static_cast<std::size_t>(n_chunks), 0);
    }

    parallel_chunks(n_traj, kChunk, opts.threads, [&](long begin, long end) {
        const long c = begin / kChunk;
        for (long i = begin; i < end; ++i) {
            RngStream rng(master_seed, static_cast<std::uint64_t>(i));
            auto handler = handler_proto.clone();
            try {
                TrajectoryRecord rec = engine.run(*handler, rng);
                const auto idx = static_cast<std::size_t>(i);
                fid[idx] = fidelity(rec.final_state, target);
                jumps[idx] = static_cast<double>(rec.events.size());
                ok[idx] = 1;
                if (opts.accumulate_rho) {
                    chunk_rho[static_cast<std::size_t>(c)] +=
                        rec.final_state.amps * rec.final_state.amps.adjoint();
                    ++chunk_count[static_cast<std::size_t>(c)];
                }
            } catch (const numeric_error&) {
                ok[static_cast<std::size_t>(i)] = 0;
            }
        }
    });

    EnsembleResult res;
    res.n_traj = n_traj;
    long n_ok = 0;
    double sum_f = 0.0, sum_j = 0.0;
    for (long i = 0; i < n_traj; ++i) {
        if (!ok[static_cast<std::size_t>(i)]) continue;
        ++n_ok;
        sum_f += fid[static_cast<std::size_t>(i)];
        sum_j += jumps[static_cast<std::size_t>(i)];
    }
    res.n_failed = n_traj - n_ok;
    if (n_ok == 0) throw numeric_error("ensemble_average: every trajectory failed");
    res.mean_fidelity = sum_f / static_cast<double>(n_ok);
    res.mean_jump_count = sum_j / static_cast<double>(n_ok);
    double var_f = 0.0, var_j = 0.0;
    for (long i = 0; i < n_traj; ++i) {
        if (!ok[static_cast<std::size_t>(i)]) continue;
        const double df = fid[static_cast<std::size_t>(i)] - res.mean_fidelity;
        const double dj = jumps[static_cast<std::size_t>(i)] - res.mean_jump_count;
        var_f += df * df;
        var_j += dj * dj;
    }
    if (n_ok > 1) {
        res.std_error = std::sqrt(var_f / static_cast<double>(n_ok - 1)) /
                        std::sqrt(static_cast<double>(n_ok));
        res.jump_count_std_error = std::sqrt(var_j / static_cast<double>(n_ok - 1)) /
                                   std::sqrt(static_cast<double>(n_ok));
    }

    if (opts.accumulate_rho) {
        Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(d, d);
        long total_count = 0;
        for (long c = 0; c < n_chunks; ++c) {
            total += chunk_rho[static_cast<std::size_t>(c)];
            total_count += chunk_count[static_cast<std::size_t>(c)];
        }
        DensityMatrix rho(psi0.n_qubits);
        rho.mat = total / static_cast<double>(total_count);
        // per-entry standard error from batch (chunk) means
        Eigen::MatrixXd var = Eigen::MatrixXd::Zero(d, d);
        long batches = 0;
        for (long c = 0; c < n_chunks; ++c) {
            if (chunk_count[static_cast<std::size_t>(c)] == 0) continue;
            ++batches;
            Eigen::MatrixXcd dm =
                chunk_rho[static_cast<std::size_t>(c)] /
                    static_cast<double>(chunk_count[static_cast<std::size_t>(c)]) -
                rho.mat;
            var += dm.cwiseAbs2().real();
        }
        Eigen::MatrixXd se = Eigen::MatrixXd::Zero(d, d);
        if (batches > 1)
            se = (var / static_cast<double>(batches - 1)).cwiseSqrt() /
                 std::sqrt(static_cast<double>(batches));
        res.rho_estimate = std::move(rho);
        res.rho_std_error = std::move(se);
    }
    return res;
}

double record_probability(const StateVector& psi0, const SparseOperator& h,
                          const DecayModel& model, const TrajectoryRecord& record, double t) {
    if (psi0.n_qubits != model.n_qubits || h.n_qubits() != model.n_qubits)
        throw std::domain_error("record_probability: qubit count mismatch");
    double prev = 0.0;
    for (const auto& ev : record.events) {
        if (ev.t < prev || ev.t > t)
            throw std::domain_error("record_probability: record times must be sorted within [0, t]");
        prev = ev.t;
    }
    const SparseOperator h_eff = effective_hamiltonian(h, model);
    StateVector psi = psi0;
    double t_prev = 0.0;
    for (const auto& ev : record.events) {
        psi = expm_apply(h_eff, psi, ev.t - t_prev);
        psi = apply(lindblad_op(model, ev.alpha), psi);
        t_prev = ev.t;
    }
    psi = expm_apply(h_eff, psi, t - t_prev);
    return psi.norm2();
}

} // namespace jc
