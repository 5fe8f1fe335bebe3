#include "jc/lindblad.hpp"

#include <algorithm>
#include <cmath>

namespace jc {

DecayModel::DecayModel(int n_qubits_, std::vector<double> kappas_)
    : n_qubits(n_qubits_), kappas(std::move(kappas_)) {
    if (n_qubits <= 0 || n_qubits > 24)
        throw std::domain_error("DecayModel: qubit count must be in 1..24");
    if (static_cast<int>(kappas.size()) != n_qubits)
        throw std::domain_error("DecayModel: need one rate per qubit");
    for (double k : kappas)
        if (!(k >= 0.0) || !std::isfinite(k))
            throw std::domain_error("DecayModel: rates must be finite and non-negative");
}

DecayModel DecayModel::uniform(int n_qubits, double kappa) {
    return DecayModel(n_qubits, std::vector<double>(static_cast<std::size_t>(n_qubits), kappa));
}

double DecayModel::kappa_max() const {
    return *std::max_element(kappas.begin(), kappas.end());
}

bool DecayModel::equal_rates() const {
    const auto [lo, hi] = std::minmax_element(kappas.begin(), kappas.end());
    return *hi - *lo < 1e-12;
}

JumpSet::JumpSet(std::vector<int> positions, int n_qubits) : positions_(std::move(positions)) {
    std::sort(positions_.begin(), positions_.end());
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (positions_[i] < 1 || positions_[i] > n_qubits)
            throw std::domain_error("JumpSet: position out of range");
        if (i > 0 && positions_[i] == positions_[i - 1])
            throw std::domain_error("JumpSet: repeated position");
    }
}

JumpSet JumpSet::from_mask(std::uint32_t mask, int n_qubits) {
    std::vector<int> pos;
    for (int alpha = 1; alpha <= n_qubits; ++alpha)
        if ((mask >> (n_qubits - alpha)) & 1u) pos.push_back(alpha);
    return JumpSet(std::move(pos), n_qubits);
}

std::uint32_t JumpSet::mask(int n_qubits) const {
    std::uint32_t m = 0;
    for (int alpha : positions_) m |= 1u << (n_qubits - alpha);
    return m;
}

SparseOperator lindblad_op(const DecayModel& model, int alpha) {
    if (alpha < 1 || alpha > model.n_qubits)
        throw std::domain_error("lindblad_op: position out of range");
    const int n = model.n_qubits;
    const std::uint32_t bit = 1u << (n - alpha);
    const double amp = std::sqrt(model.kappa(alpha));
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(std::size_t(1) << (n - 1));
    const std::uint32_t end = 1u << n;
    for (std::uint32_t x = 0; x < end; ++x)
        if (x & bit) trips.emplace_back(static_cast<int>(x ^ bit), static_cast<int>(x), amp);
    return SparseOperator(n, trips);
}

SparseOperator effective_hamiltonian(const SparseOperator& h, const DecayModel& model) {
    if (h.n_qubits() != model.n_qubits)
        throw std::domain_error("effective_hamiltonian: qubit count mismatch");
    if (!h.is_hermitian(1e-10))
        throw std::domain_error("effective_hamiltonian: H is not Hermitian");
    const int n = model.n_qubits;
    std::vector<Eigen::Triplet<cplx>> trips;
    const std::uint32_t end = 1u << n;
    for (std::uint32_t x = 0; x < end; ++x) {
        double rate = 0.0;
        for (int alpha = 1; alpha <= n; ++alpha)
            if ((x >> (n - alpha)) & 1u) rate += model.kappa(alpha);
        if (rate != 0.0)
            trips.emplace_back(static_cast<int>(x), static_cast<int>(x), cplx(0.0, -0.5 * rate));
    }
    return h + SparseOperator(n, trips);
}

SparseOperator jump_product(const DecayModel& model, const JumpSet& e) {
    SparseOperator prod = SparseOperator::identity(model.n_qubits);
    for (int alpha : e.positions()) prod = lindblad_op(model, alpha) * prod;
    return prod;
}

double default_master_dt(double omega_scale, const DecayModel& model) {
    return 1e-3 / std::max({omega_scale, model.kappa_max(), 1e-12});
}

namespace {

struct MasterWorkspace {
    SparseMat h_eff;                 // H - (i/2) sum L^dag L
    std::vector<SparseMat> collapse; // A_k
    std::vector<SparseMat> collapse_adj;
};

Eigen::MatrixXcd master_rhs(const MasterWorkspace& ws, const Eigen::MatrixXcd& rho) {
    const cplx mi(0.0, -1.0);
    Eigen::MatrixXcd drho = mi * (ws.h_eff * rho);
    drho -= mi * (rho * SparseMat(ws.h_eff.adjoint()));
    for (std::size_t k = 0; k < ws.collapse.size(); ++k) {
        Eigen::MatrixXcd tmp = ws.collapse[k] * rho;
        drho += tmp * ws.collapse_adj[k];
    }
    return drho;
}

DensityMatrix run_rk4(const MasterWorkspace& ws, const DensityMatrix& rho0, double t_final,
                      double dt) {
    if (!(dt > 0.0)) throw std::domain_error("integrate_master: dt must be positive");
    if (t_final < 0.0) throw std::domain_error("integrate_master: negative final time");
    DensityMatrix rho = rho0;
    const double trace0 = rho.trace_real();
    double t = 0.0;
    while (t < t_final - 1e-15 * std::max(1.0, t_final)) {
        const double h = std::min(dt, t_final - t);
        const Eigen::MatrixXcd k1 = master_rhs(ws, rho.mat);
        const Eigen::MatrixXcd k2 = master_rhs(ws, rho.mat + 0.5 * h * k1);
        const Eigen::MatrixXcd k3 = master_rhs(ws, rho.mat + 0.5 * h * k2);
        const Eigen::MatrixXcd k4 = master_rhs(ws, rho.mat + h * k3);
        rho.mat += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        const double drift = std::abs(rho.trace_real() - trace0);
        if (!std::isfinite(drift) || drift > 1e-4)
            throw numeric_error("integrate_master: trace drift " + std::to_string(drift) +
                                " at t=" + std::to_string(t) + "; reduce dt");
        // a density matrix has entries bounded by its trace; runaway growth
        // means the step is outside the stability region
        const double peak = rho.mat.cwiseAbs().maxCoeff();
        if (!std::isfinite(peak) || peak > 10.0)
            throw numeric_error("integrate_master: solution diverging (|rho|_max=" +
                                std::to_string(peak) + ") at t=" + std::to_string(t) +
                                "; reduce dt");
    }
    return rho;
}

void check_dissipation_budget(const MasterWorkspace& ws, const DecayModel& model) {
    SparseMat total(ws.h_eff.rows(), ws.h_eff.cols());
    for (std::size_t k = 0; k < ws.collapse.size(); ++k)
        total = total + SparseMat(ws.collapse_adj[k] * ws.collapse[k]);
    const int n = model.n_qubits;
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(total.rows());
    for (std::uint32_t x = 0; x < (1u << n); ++x)
        for (int alpha = 1; alpha <= n; ++alpha)
            if ((x >> (n - alpha)) & 1u) expected[x] += model.kappa(alpha);
    Eigen::MatrixXcd diff = Eigen::MatrixXcd(total);
    diff -= expected.cast<cplx>().asDiagonal().toDenseMatrix();
    if (diff.cwiseAbs().maxCoeff() > 1e-9)
        throw std::domain_error(
            "integrate_generalized: collapse operators do not match the model's dissipation");
}

} // namespace

DensityMatrix integrate_master(const DensityMatrix& rho0, const SparseOperator& h,
                               const DecayModel& model, const JumpDressing* jump_dressing,
                               double t_final, double dt) {
    if (rho0.n_qubits != model.n_qubits || h.n_qubits() != model.n_qubits)
        throw std::domain_error("integrate_master: qubit count mismatch");
    MasterWorkspace ws;
    ws.h_eff = effective_hamiltonian(h, model).matrix();
    for (int alpha = 1; alpha <= model.n_qubits; ++alpha) {
        if (model.kappa(alpha) == 0.0) continue;
        SparseMat a = lindblad_op(model, alpha).matrix();
        if (jump_dressing) {
            auto it = jump_dressing->find(alpha);
            if (it != jump_dressing->end()) a = it->second.matrix() * a;
        }
        ws.collapse.push_back(a);
        ws.collapse_adj.emplace_back(a.adjoint());
    }
    return run_rk4(ws, rho0, t_final, dt);
}

DensityMatrix integrate_generalized(const DensityMatrix& rho0, const SparseOperator& h,
                                    const DecayModel& model,
                                    const std::vector<SparseOperator>& collapse_ops,
                                    double t_final, double dt) {
    if (rho0.n_qubits != model.n_qubits || h.n_qubits() != model.n_qubits)
        throw std::domain_error("integrate_generalized: qubit count mismatch");
    MasterWorkspace ws;
    ws.h_eff = effective_hamiltonian(h, model).matrix();
    for (const SparseOperator& a : collapse_ops) {
        if (a.n_qubits() != model.n_qubits)
            throw std::domain_error("integrate_generalized: qubit count mismatch");
        ws.collapse.push_back(a.matrix());
        ws.collapse_adj.emplace_back(a.matrix().adjoint());
    }
    check_dissipation_budget(ws, model);
    return run_rk4(ws, rho0, t_final, dt);
}

} // namespace jc
