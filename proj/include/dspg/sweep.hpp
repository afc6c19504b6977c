#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dspg/model.hpp"
#include "dspg/solver.hpp"

namespace dspg {

struct SweepRow {
  double rho = 0.0;
  double time_s = 0.0;
  int iterations = 0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  std::int64_t nnz = 0;
  std::string status;  ///< solve status, or "Error: ..." when the row threw
  bool ok() const { return status == "Converged"; }
};

/// Solves `base` once per uniform rho value. Rows come back in grid order
/// whatever the number of worker threads.
std::vector<SweepRow> run_sweep(const ProblemInstance& base, const std::vector<double>& grid,
                                const SolverConfig& cfg, double threshold, int parallel);

/// rho,time_s,iters,primal_obj,dual_obj,gap,nnz,status. time_s is left empty
/// unless `with_timing`, which keeps the file a pure function of its inputs.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_timing);

/// Parses "r1,r2,..."; throws std::invalid_argument.
std::vector<double> parse_grid(const std::string& text);

}  // namespace dspg
