#pragma once

#include <string>

#include "pmi/conic.hpp"

namespace pmi {

// Writes the problem in SDPA sparse format (.dat-s). The conic problem
//   min <C,X> + c^T u  s.t.  <A_i,X> + d_i^T u = b_i,  X PSD, u free
// is exported as the SDPA dual pair: c_i = b_i, F_i = A_i, F_0 = -C, with
// free variables split into a trailing diagonal block (negative block size)
// of side 2*num_free holding u+ and u-. Writing is byte-deterministic.
void export_sdpa(const ConicProblem& p, const std::string& path);

std::string sdpa_text(const ConicProblem& p);

// Reads a solver .result file with the xVec / xMat / yMat layout and maps it
// back onto the problem's structure (our y = -xVec, Z = xMat, X = yMat).
// All residuals are recomputed locally; nothing from the file is trusted.
SolveReport import_solution(const ConicProblem& p, const std::string& path,
                            double accept_tol = 1e-6);

}  // namespace pmi
