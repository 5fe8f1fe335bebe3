#pragma once

#include <map>
#include <optional>
#include <vector>

#include "jc/qstate.hpp"

namespace jc {

// Per-qubit spontaneous decay rates.
struct DecayModel {
    int n_qubits = 0;
    std::vector<double> kappas;

    DecayModel() = default;
    DecayModel(int n_qubits_, std::vector<double> kappas_);
    static DecayModel uniform(int n_qubits, double kappa);

    double kappa(int alpha) const { return kappas[static_cast<std::size_t>(alpha - 1)]; }
    double kappa_max() const;
    bool equal_rates() const;
};

// A set of distinct jump positions, kept strictly increasing. Repeated
// positions are rejected: a record with two jumps at the same qubit has
// probability zero.
class JumpSet {
public:
    JumpSet() = default;
    explicit JumpSet(std::vector<int> positions, int n_qubits);
    static JumpSet from_mask(std::uint32_t mask, int n_qubits);

    const std::vector<int>& positions() const { return positions_; }
    std::size_t size() const { return positions_.size(); }
    std::uint32_t mask(int n_qubits) const;

    friend auto operator<=>(const JumpSet&, const JumpSet&) = default;

private:
    std::vector<int> positions_;
};

// L_alpha = sqrt(kappa_alpha) |0><1| on qubit alpha, identity elsewhere.
SparseOperator lindblad_op(const DecayModel& model, int alpha);

// H - (i/2) sum_alpha L_alpha^dag L_alpha; H must be Hermitian.
SparseOperator effective_hamiltonian(const SparseOperator& h, const DecayModel& model);

// Ordered product L_{a1} L_{a2} ... over the positions of E (the factors act
// on disjoint qubits and commute).
SparseOperator jump_product(const DecayModel& model, const JumpSet& e);

using JumpDressing = std::map<int, SparseOperator>; // alpha -> recovery unitary

// Fixed-step RK4 integration of
//   drho/dt = -i (H_eff rho - rho H_eff^dag) + sum_alpha A_alpha rho A_alpha^dag
// with A_alpha = U_alpha L_alpha when the dressing supplies U_alpha, else
// A_alpha = L_alpha. Throws numeric_error when the trace drifts by more
// than 1e-4.
DensityMatrix integrate_master(const DensityMatrix& rho0, const SparseOperator& h,
                               const DecayModel& model, const JumpDressing* jump_dressing,
                               double t_final, double dt);

// Same integrator with an arbitrary collapse-operator list. The operators
// must resolve the same total dissipation as the model's Lindblad set,
// sum_k A_k^dag A_k = sum_alpha L_alpha^dag L_alpha (checked once).
DensityMatrix integrate_generalized(const DensityMatrix& rho0, const SparseOperator& h,
                                    const DecayModel& model,
                                    const std::vector<SparseOperator>& collapse_ops,
                                    double t_final, double dt);

double default_master_dt(double omega_scale, const DecayModel& model);

} // namespace jc
