#pragma once

#include "jc/jumpcodes.hpp"
#include "jc/trajectory.hpp"

namespace jc {

struct RecoveryOp {
    int alpha = 0;
    SparseOperator unitary;
    std::string code_ref; // identifier of the code the op was built for
};

// Unitary with U L_alpha / sqrt(lambda_alpha) acting as the identity on the
// code space: maps the jumped images d_i = L_alpha |c_i> / sqrt(lambda) back
// onto |c_i>, swaps the two subspaces, and fixes a deterministic Gram-Schmidt
// completion of the remaining directions.
RecoveryOp synthesize_recovery(const JumpCode& code, int alpha, const DecayModel& model);

// max_i || (U L_alpha / sqrt(lambda) - 1) |c_i> ||; also validates unitarity
double verify_recovery(const RecoveryOp& rec, const JumpCode& code, const DecayModel& model);

double unitarity_defect(const RecoveryOp& rec);

// All positions with lambda({alpha}) > 0, cached as dense matrices for use
// inside trajectory handlers and master-equation dressing.
RecoveryTable build_recovery_table(const JumpCode& code, const DecayModel& model);

// The same table as a jump dressing for integrate_master.
JumpDressing recovery_dressing(const JumpCode& code, const DecayModel& model);

std::string code_identifier(const JumpCode& code);

} // namespace jc
