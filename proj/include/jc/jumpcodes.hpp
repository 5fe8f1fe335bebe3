#pragma once

#include <optional>
#include <vector>

#include "jc/designs.hpp"
#include "jc/lindblad.hpp"
#include "jc/qstate.hpp"

namespace jc {

// A (N, K, d)_w jump code: K orthonormal codewords supported on the
// weight-w excitation class.
struct JumpCode {
    int n_qubits = 0;
    int weight = 0;
    int order = 0;     // detection order d the code is claimed to correct
    int dimension = 0; // K
    double phase = 0.0;
    std::vector<StateVector> codewords;
    std::optional<SeedFamily> families;

    // throws when a codeword leaves the weight class or orthonormality fails
    void check_invariants() const;

    std::string to_json() const;
    static JumpCode from_json(const std::string& text);
};

struct LambdaEntry {
    std::uint32_t e = 0;                // position-set mask
    double scaled = 0.0;                // includes the rate factors
    std::optional<Rational> fraction;   // exact count ratio for equal-amplitude codes
};

struct CodeViolation {
    int i = 0, j = 0;
    std::uint32_t e = 0;
    double value = 0.0; // offending off-diagonal magnitude or diagonal spread
};

struct KnillCrossViolation {
    int alpha = 0, beta = 0;
    int i = 0, j = 0;
    double value = 0.0;
};

struct VerificationReport {
    bool passed = false;
    std::vector<LambdaEntry> lambda_table;
    std::vector<CodeViolation> violations;
    bool knill_cross_ok = false; // full cross-condition over alpha != beta
    std::optional<KnillCrossViolation> knill_cross_witness;
};

// Equal-amplitude encoding of a block family set; families must be disjoint.
JumpCode encode(const SeedFamily& seed);

// Checks <c_i| J_E^dag J_E |c_j> = delta_ij lambda(E) for all |E| <= d, and
// additionally evaluates the cross-terms <c_i| L_alpha^dag L_beta |c_j> for
// alpha != beta.
VerificationReport verify_code(const JumpCode& code, int d, const DecayModel& model);

// Complementary-pairing family: codewords (|x> + e^{i phi} |x_bar>)/sqrt(2)
// over all complement pairs of weight-N/2 words; K = C(N-1, N/2-1).
JumpCode pairing_code(int n_qubits, double phi = 0.0);

// Flip every bit of every support ket; a (N,K,d)_w code becomes (N,K,d)_{N-w}.
JumpCode complement_code(const JumpCode& code);

// K <= min{ C(N-d, w-d), C(N-d, w) }
std::uint64_t upper_bound(int n_qubits, int w, int d);
// the bound at the maximizing weight w = floor(N/2)
std::uint64_t max_upper_bound(int n_qubits, int d);

} // namespace jc
