#include "dspg/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dspg/io.hpp"

namespace dspg {

namespace {

SweepRow solve_row(const ProblemInstance& base, double rho, const SolverConfig& cfg,
                   double threshold) {
  SweepRow row;
  row.rho = rho;
  try {
    const ProblemInstance inst = base.with_rho(SymMat::constant(base.n(), rho));
    const SolveReport report = solve(inst, cfg);
    row.time_s = report.wall_time;
    row.iterations = report.iterations;
    row.status = std::string(to_string(report.status));
    if (report.status != SolveStatus::Infeasible) {
      row.primal_obj = report.primal_obj;
      row.dual_obj = report.dual_obj;
      row.gap = report.gap;
      row.nnz = (report.x.dense().array().abs() >= threshold).count();
    }
  } catch (const std::exception& e) {
    row.status = std::string("Error: ") + e.what();
  }
  return row;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::vector<SweepRow> run_sweep(const ProblemInstance& base, const std::vector<double>& grid,
                                const SolverConfig& cfg, double threshold, int parallel) {
  std::vector<SweepRow> rows(grid.size());
  const int workers = std::max(1, std::min<int>(parallel, static_cast<int>(grid.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      rows[i] = solve_row(base, grid[i], cfg, threshold);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_timing) {
  out << "rho,time_s,iters,primal_obj,dual_obj,gap,nnz,status\n";
  for (const auto& r : rows) {
    out << format_exact(r.rho) << ',' << (with_timing ? format_display(r.time_s) : "") << ','
        << r.iterations << ',' << format_display(r.primal_obj) << ','
        << format_display(r.dual_obj) << ',' << format_display(r.gap) << ',' << r.nnz << ','
        << csv_field(r.status) << '\n';
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string token = text.substr(start, comma - start);
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    if (first == std::string::npos) throw std::invalid_argument("empty rho grid entry");
    token = token.substr(first, last - first + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("invalid rho grid entry '" + token + "'");
    }
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

}  // namespace dspg
