#include "jc/qstate.hpp"

#include <algorithm>
#include <cmath>

namespace jc {

BasisState::BasisState(std::uint32_t bits_, int n_qubits_) : bits(bits_), n_qubits(n_qubits_) {
    if (n_qubits <= 0 || n_qubits > 24)
        throw std::domain_error("BasisState: qubit count must be in 1..24");
    if (n_qubits < 32 && (bits >> n_qubits) != 0)
        throw std::domain_error("BasisState: bits outside the lowest N positions");
}

std::string BasisState::ket() const {
    std::string s(static_cast<std::size_t>(n_qubits), '0');
    for (int alpha = 1; alpha <= n_qubits; ++alpha)
        if (excited(alpha)) s[static_cast<std::size_t>(alpha - 1)] = '1';
    return s;
}

BasisState BasisState::from_ket(const std::string& ket) {
    const int n = static_cast<int>(ket.size());
    std::uint32_t bits = 0;
    for (int i = 0; i < n; ++i) {
        const char c = ket[static_cast<std::size_t>(i)];
        if (c != '0' && c != '1') throw std::domain_error("BasisState: ket must be 0/1 string");
        if (c == '1') bits |= 1u << (n - 1 - i);
    }
    return BasisState(bits, n);
}

std::uint64_t detail::binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

std::vector<BasisState> weight_subspace(int n_qubits, int w) {
    if (n_qubits <= 0 || n_qubits > 24)
        throw std::domain_error("weight_subspace: qubit count must be in 1..24");
    if (w < 0 || w > n_qubits)
        throw std::domain_error("weight_subspace: excitation count outside 0..N");
    std::vector<BasisState> out;
    out.reserve(static_cast<std::size_t>(detail::binomial(n_qubits, w)));
    const std::uint32_t end = 1u << n_qubits;
    for (std::uint32_t x = 0; x < end; ++x)
        if (std::popcount(x) == w) out.emplace_back(x, n_qubits);
    return out;
}

StateVector::StateVector(int n_qubits_) : n_qubits(n_qubits_) {
    if (n_qubits <= 0 || n_qubits > 24)
        throw std::domain_error("StateVector: qubit count must be in 1..24");
    amps = Eigen::VectorXcd::Zero(Eigen::Index(1) << n_qubits);
    amps[0] = 1.0;
}

StateVector StateVector::basis(int n_qubits, std::uint32_t bits) {
    StateVector psi(n_qubits);
    BasisState x(bits, n_qubits); // validates range
    psi.amps[0] = 0.0;
    psi.amps[x.bits] = 1.0;
    return psi;
}

void StateVector::normalize() {
    const double n = std::sqrt(norm2());
    if (n <= 0.0 || !std::isfinite(n)) throw numeric_error("StateVector: cannot normalize");
    amps /= n;
}

cplx StateVector::inner(const StateVector& other) const {
    if (n_qubits != other.n_qubits) throw std::domain_error("inner: qubit count mismatch");
    return amps.dot(other.amps);
}

DensityMatrix::DensityMatrix(int n_qubits_) : n_qubits(n_qubits_) {
    if (n_qubits <= 0 || n_qubits > 24)
        throw std::domain_error("DensityMatrix: qubit count must be in 1..24");
    const Eigen::Index d = Eigen::Index(1) << n_qubits;
    mat = Eigen::MatrixXcd::Zero(d, d);
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    DensityMatrix rho(psi.n_qubits);
    rho.mat = psi.amps * psi.amps.adjoint();
    return rho;
}

double DensityMatrix::hermiticity_defect() const {
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
}

SparseOperator::SparseOperator(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits <= 0 || n_qubits > 24)
        throw std::domain_error("SparseOperator: qubit count must be in 1..24");
    const Eigen::Index d = Eigen::Index(1) << n_qubits;
    mat_.resize(d, d);
}

SparseOperator::SparseOperator(int n_qubits, const std::vector<Eigen::Triplet<cplx>>& entries)
    : SparseOperator(n_qubits) {
    mat_.setFromTriplets(entries.begin(), entries.end());
}

SparseOperator SparseOperator::identity(int n_qubits) {
    SparseOperator op(n_qubits);
    op.mat_.setIdentity();
    return op;
}

SparseOperator SparseOperator::from_dense(int n_qubits, const Eigen::MatrixXcd& m, double drop_tol) {
    SparseOperator op(n_qubits);
    if (m.rows() != op.dim() || m.cols() != op.dim())
        throw std::domain_error("SparseOperator: dense matrix dimension mismatch");
    std::vector<Eigen::Triplet<cplx>> trips;
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            if (std::abs(m(r, c)) > drop_tol)
                trips.emplace_back(static_cast<int>(r), static_cast<int>(c), m(r, c));
    op.mat_.setFromTriplets(trips.begin(), trips.end());
    return op;
}

void SparseOperator::set(std::uint32_t row, std::uint32_t col, cplx value) {
    if (row >= static_cast<std::uint32_t>(dim()) || col >= static_cast<std::uint32_t>(dim()))
        throw std::domain_error("SparseOperator::set: index out of range");
    mat_.coeffRef(row, col) = value;
}

SparseOperator SparseOperator::adjoint() const {
    SparseOperator out(n_qubits_);
    out.mat_ = mat_.adjoint();
    return out;
}

SparseOperator SparseOperator::operator*(const SparseOperator& rhs) const {
    if (n_qubits_ != rhs.n_qubits_) throw std::domain_error("SparseOperator: qubit count mismatch");
    SparseOperator out(n_qubits_);
    out.mat_ = mat_ * rhs.mat_;
    return out;
}

SparseOperator SparseOperator::operator+(const SparseOperator& rhs) const {
    if (n_qubits_ != rhs.n_qubits_) throw std::domain_error("SparseOperator: qubit count mismatch");
    SparseOperator out(n_qubits_);
    out.mat_ = mat_ + rhs.mat_;
    return out;
}

SparseOperator SparseOperator::scaled(cplx factor) const {
    SparseOperator out(n_qubits_);
    out.mat_ = mat_ * factor;
    return out;
}

bool SparseOperator::is_hermitian(double tol) const {
    SparseMat diff = SparseMat(mat_.adjoint()) - mat_;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SparseMat::InnerIterator it(diff, k); it; ++it)
            if (std::abs(it.value()) > tol) return false;
    return true;
}

bool SparseOperator::is_diagonal() const {
    for (int k = 0; k < mat_.outerSize(); ++k)
        for (SparseMat::InnerIterator it(mat_, k); it; ++it)
            if (it.row() != it.col() && std::abs(it.value()) != 0.0) return false;
    return true;
}

bool SparseOperator::all_finite() const {
    for (int k = 0; k < mat_.outerSize(); ++k)
        for (SparseMat::InnerIterator it(mat_, k); it; ++it)
            if (!std::isfinite(it.value().real()) || !std::isfinite(it.value().imag()))
                return false;
    return true;
}

StateVector apply(const SparseOperator& op, const StateVector& psi) {
    if (op.n_qubits() != psi.n_qubits) throw std::domain_error("apply: qubit count mismatch");
    StateVector out(psi.n_qubits);
    out.amps = op.matrix() * psi.amps;
    return out;
}

namespace {

// exp(A) * V by repeated scaled Taylor evaluation; generic in the operand so
// the same kernel serves vectors and matrices.
template <class AMat, class VMat>
VMat expm_action_impl(const AMat& a, VMat v, double one_norm) {
    const int s = std::max(1, static_cast<int>(std::ceil(one_norm)));
    const double inv_s = 1.0 / static_cast<double>(s);
    for (int block = 0; block < s; ++block) {
        VMat term = v;
        VMat acc = v;
        for (int j = 1; j <= 80; ++j) {
            term = (a * term * (inv_s / static_cast<double>(j))).eval();
            acc += term;
            const double tn = term.cwiseAbs().maxCoeff();
            const double an = acc.cwiseAbs().maxCoeff();
            if (!(std::isfinite(tn) && std::isfinite(an)))
                throw numeric_error("expm_action: non-finite value in Taylor series");
            if (tn <= an * 1e-17) break;
        }
        v = acc;
    }
    return v;
}

double one_norm(const Eigen::MatrixXcd& a) {
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

double one_norm(const SparseMat& a) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(a.cols());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseMat::InnerIterator it(a, k); it; ++it) col[it.col()] += std::abs(it.value());
    return a.nonZeros() == 0 ? 0.0 : col.maxCoeff();
}

} // namespace

Eigen::MatrixXcd expm_action(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& v) {
    return expm_action_impl(a, v, one_norm(a));
}

Eigen::VectorXcd expm_action(const SparseMat& a, const Eigen::VectorXcd& v) {
    return expm_action_impl(a, v, one_norm(a));
}

StateVector expm_apply(const SparseOperator& op, const StateVector& psi, double t) {
    if (op.n_qubits() != psi.n_qubits) throw std::domain_error("expm_apply: qubit count mismatch");
    if (t < 0.0) throw std::domain_error("expm_apply: negative time");
    if (!op.all_finite()) throw numeric_error("expm_apply: operator has non-finite entries");
    StateVector out = psi;
    if (t == 0.0) return out;
    if (op.is_diagonal()) {
        // closed form: amp_x *= exp(-i a_xx t)
        Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(op.dim());
        const SparseMat& m = op.matrix();
        for (int k = 0; k < m.outerSize(); ++k)
            for (SparseMat::InnerIterator it(m, k); it; ++it) diag[it.row()] = it.value();
        for (Eigen::Index i = 0; i < out.dim(); ++i)
            out.amps[i] *= std::exp(cplx(0.0, -t) * diag[i]);
        return out;
    }
    SparseMat a = op.matrix() * cplx(0.0, -t);
    out.amps = expm_action(a, psi.amps);
    if (!out.amps.allFinite()) throw numeric_error("expm_apply: non-finite result");
    return out;
}

double fidelity(const StateVector& a, const StateVector& b) {
    if (a.n_qubits != b.n_qubits) throw std::domain_error("fidelity: qubit count mismatch");
    return std::norm(b.inner(a));
}

double fidelity(const DensityMatrix& rho, const StateVector& b) {
    if (rho.n_qubits != b.n_qubits) throw std::domain_error("fidelity: qubit count mismatch");
    return (b.amps.adjoint() * rho.mat * b.amps)(0).real();
}

} // namespace jc
