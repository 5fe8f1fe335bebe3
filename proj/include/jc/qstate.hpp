#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "jc/errors.hpp"

namespace jc {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx>;

// Computational basis state of N qubits. Qubit positions run 1..N left to
// right in ket notation, so position 1 is the most significant bit and the
// ket string |1100> is the word 0b1100.
struct BasisState {
    std::uint32_t bits = 0;
    int n_qubits = 0;

    BasisState() = default;
    BasisState(std::uint32_t bits_, int n_qubits_);

    bool excited(int alpha) const { return (bits >> (n_qubits - alpha)) & 1u; }
    int weight() const { return std::popcount(bits); }
    std::string ket() const;

    static BasisState from_ket(const std::string& ket);

    friend bool operator==(const BasisState&, const BasisState&) = default;
};

// All weight-w basis states of N qubits in ascending numeric order.
std::vector<BasisState> weight_subspace(int n_qubits, int w);

// Dense complex amplitude vector over the 2^N computational basis.
struct StateVector {
    int n_qubits = 0;
    Eigen::VectorXcd amps;

    StateVector() = default;
    explicit StateVector(int n_qubits_);

    static StateVector basis(int n_qubits, std::uint32_t bits);
    static StateVector basis(const BasisState& x) { return basis(x.n_qubits, x.bits); }

    Eigen::Index dim() const { return amps.size(); }
    cplx& operator[](Eigen::Index i) { return amps[i]; }
    const cplx& operator[](Eigen::Index i) const { return amps[i]; }

    double norm2() const { return amps.squaredNorm(); }
    void normalize();
    // <this|other>
    cplx inner(const StateVector& other) const;
};

struct DensityMatrix {
    int n_qubits = 0;
    Eigen::MatrixXcd mat;

    DensityMatrix() = default;
    explicit DensityMatrix(int n_qubits_);

    static DensityMatrix pure(const StateVector& psi);

    Eigen::Index dim() const { return mat.rows(); }
    double trace_real() const { return mat.trace().real(); }
    double purity() const { return (mat * mat).trace().real(); }
    double hermiticity_defect() const;
};

// Sparse operator on the 2^N-dimensional space. Built from (row, col, value)
// entries; compressed on first use.
class SparseOperator {
public:
    SparseOperator() = default;
    explicit SparseOperator(int n_qubits);
    SparseOperator(int n_qubits, const std::vector<Eigen::Triplet<cplx>>& entries);

    static SparseOperator identity(int n_qubits);
    static SparseOperator from_dense(int n_qubits, const Eigen::MatrixXcd& m,
                                     double drop_tol = 0.0);

    int n_qubits() const { return n_qubits_; }
    Eigen::Index dim() const { return mat_.rows(); }
    std::size_t nnz() const { return static_cast<std::size_t>(mat_.nonZeros()); }

    void set(std::uint32_t row, std::uint32_t col, cplx value);
    cplx coeff(std::uint32_t row, std::uint32_t col) const { return mat_.coeff(row, col); }

    const SparseMat& matrix() const { return mat_; }
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(mat_); }

    SparseOperator adjoint() const;
    SparseOperator operator*(const SparseOperator& rhs) const;
    SparseOperator operator+(const SparseOperator& rhs) const;
    SparseOperator scaled(cplx factor) const;

    bool is_hermitian(double tol) const;
    bool is_diagonal() const;
    bool all_finite() const;

private:
    int n_qubits_ = 0;
    SparseMat mat_;
};

// op |psi>; output may be unnormalized
StateVector apply(const SparseOperator& op, const StateVector& psi);

// exp(-i op t) |psi> for t >= 0; op may be non-Hermitian.
StateVector expm_apply(const SparseOperator& op, const StateVector& psi, double t);

// |<b|a>|^2, resp. <b|rho|b>
double fidelity(const StateVector& a, const StateVector& b);
double fidelity(const DensityMatrix& rho, const StateVector& b);

// exp(A) * V for a square complex matrix A, by scaling and squaring with a
// truncated Taylor series applied directly to the operand. V may be a vector
// or a matrix (pass the identity to obtain the full exponential).
Eigen::MatrixXcd expm_action(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& v);
Eigen::VectorXcd expm_action(const SparseMat& a, const Eigen::VectorXcd& v);

namespace detail {
std::uint64_t binomial(int n, int k);
} // namespace detail

} // namespace jc
