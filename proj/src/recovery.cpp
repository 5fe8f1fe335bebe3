#include "jc/recovery.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace jc {

std::string code_identifier(const JumpCode& code) {
    std::ostringstream os;
    os << "(" << code.n_qubits << "," << code.dimension << "," << code.order << ")_"
       << code.weight;
    if (code.phase != 0.0) os << "@phi=" << code.phase;
    return os.str();
}

RecoveryOp synthesize_recovery(const JumpCode& code, int alpha, const DecayModel& model) {
    if (alpha < 1 || alpha > code.n_qubits)
        throw std::domain_error("synthesize_recovery: position out of range");
    if (code.n_qubits != model.n_qubits)
        throw std::domain_error("synthesize_recovery: qubit count mismatch");
    const int k = code.dimension;
    const Eigen::Index dim = code.codewords.front().dim();
    const SparseOperator l_alpha = lindblad_op(model, alpha);

    // lambda({alpha}) must be positive and codeword-independent
    std::vector<Eigen::VectorXcd> jumped;
    double lambda = -1.0;
    for (const auto& c : code.codewords) {
        Eigen::VectorXcd v = l_alpha.matrix() * c.amps;
        const double n2 = v.squaredNorm();
        if (lambda < 0.0)
            lambda = n2;
        else if (std::abs(n2 - lambda) > 1e-10)
            throw condition_violation(
                "synthesize_recovery: ||L|c_i>||^2 depends on the codeword");
        jumped.push_back(std::move(v));
    }
    if (lambda <= 1e-12)
        throw condition_violation("synthesize_recovery: lambda({alpha}) vanishes");
    const double inv = 1.0 / std::sqrt(lambda);
    for (auto& v : jumped) v *= inv;

    // the jumped images must be orthonormal for a recovery to exist
    for (int i = 0; i < k; ++i)
        for (int j = i; j < k; ++j) {
            const cplx g = jumped[static_cast<std::size_t>(i)].dot(
                jumped[static_cast<std::size_t>(j)]);
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(g - want) > 1e-10)
                throw condition_violation(
                    "synthesize_recovery: jumped codewords are not orthonormal; the code is "
                    "not one-jump correcting at this position");
        }

    // orthonormal basis [d_1..d_K, c_1..c_K, e_1..e_M] with the e_k obtained
    // by Gram-Schmidt over computational basis vectors in ascending order
    std::vector<Eigen::VectorXcd> basis = jumped;
    for (const auto& c : code.codewords) basis.push_back(c.amps);
    std::vector<Eigen::VectorXcd> completion;
    for (Eigen::Index x = 0; x < dim && basis.size() < static_cast<std::size_t>(dim); ++x) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
        v[x] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) v -= b.dot(v) * b;
        const double n = v.norm();
        if (n > 1e-8) {
            v /= n;
            basis.push_back(v);
            completion.push_back(std::move(v));
        }
    }
    if (basis.size() != static_cast<std::size_t>(dim))
        throw numeric_error("synthesize_recovery: basis completion failed");

    // U = sum c d^dag + sum d c^dag + sum e e^dag (an involution)
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(dim, dim);
    for (int i = 0; i < k; ++i) {
        u += code.codewords[static_cast<std::size_t>(i)].amps *
             jumped[static_cast<std::size_t>(i)].adjoint();
        u += jumped[static_cast<std::size_t>(i)] *
             code.codewords[static_cast<std::size_t>(i)].amps.adjoint();
    }
    for (const auto& e : completion) u += e * e.adjoint();

    RecoveryOp rec;
    rec.alpha = alpha;
    rec.unitary = SparseOperator::from_dense(code.n_qubits, u, 1e-14);
    rec.code_ref = code_identifier(code);
    return rec;
}

double unitarity_defect(const RecoveryOp& rec) {
    const Eigen::MatrixXcd u = rec.unitary.dense();
    return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols()))
        .cwiseAbs()
        .maxCoeff();
}

double verify_recovery(const RecoveryOp& rec, const JumpCode& code, const DecayModel& model) {
    if (rec.unitary.n_qubits() != code.n_qubits || code.n_qubits != model.n_qubits)
        throw std::domain_error("verify_recovery: qubit count mismatch");
    const SparseOperator l_alpha = lindblad_op(model, rec.alpha);
    double lambda = 0.0;
    for (const auto& c : code.codewords)
        lambda += (l_alpha.matrix() * c.amps).squaredNorm();
    lambda /= static_cast<double>(code.dimension);
    if (lambda <= 0.0) return std::numeric_limits<double>::infinity();
    const double inv = 1.0 / std::sqrt(lambda);
    double residual = 0.0;
    for (const auto& c : code.codewords) {
        Eigen::VectorXcd restored = rec.unitary.matrix() * (l_alpha.matrix() * c.amps) * inv;
        residual = std::max(residual, (restored - c.amps).norm());
    }
    return residual;
}

RecoveryTable build_recovery_table(const JumpCode& code, const DecayModel& model) {
    RecoveryTable table(static_cast<std::size_t>(code.n_qubits));
    for (int alpha = 1; alpha <= code.n_qubits; ++alpha)
        table[static_cast<std::size_t>(alpha - 1)] =
            synthesize_recovery(code, alpha, model).unitary.dense();
    return table;
}

JumpDressing recovery_dressing(const JumpCode& code, const DecayModel& model) {
    JumpDressing dressing;
    for (int alpha = 1; alpha <= code.n_qubits; ++alpha)
        dressing.emplace(alpha, synthesize_recovery(code, alpha, model).unitary);
    return dressing;
}

} // namespace jc
