// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace mimo {

// Runs the built-in invariant suites (interference nulling, offset search
// optimality, water-filling optimality, rate identities, noiseless
// loopback, modulo arithmetic), writing one PASS/FAIL line per suite.
// Returns true when every suite passes.
bool run_invariant_suites(std::ostream& out);

}  // namespace mimo
