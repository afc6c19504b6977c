#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dspg/model.hpp"
#include "dspg/solver.hpp"

namespace dspg {

/// Malformed input file; `line` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string file, std::size_t line, const std::string& message);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string file_;
  std::size_t line_;
};

/// Shortest decimal that parses back to the identical double.
std::string format_exact(double v);
/// 12 significant digits, for human-facing objective values.
std::string format_display(double v);
/// `v` rounded to 12 significant digits.
double round_display(double v);

// Symmetric coordinate files:
//   %%SymCoord n nnz
//   i j v        (nnz lines, 1 <= i <= j <= n, unique)
SymMat parse_matrix(std::istream& in, const std::string& name);
SymMat read_matrix_file(const std::filesystem::path& path);
void write_matrix(std::ostream& out, const SymMat& m);
void write_matrix_file(const std::filesystem::path& path, const SymMat& m);

struct GeneralConstraint {
  std::string matrix_path;
  double rhs = 0.0;
};

struct InstanceManifest {
  int schema_version = 1;
  Index n = 0;
  double mu = 1.0;
  std::optional<double> rho_uniform;
  std::string rho_matrix_path;
  std::string c_path;
  std::optional<std::vector<IndexPair>> zero_pattern;  ///< 0-based in memory, 1-based on disk
  std::vector<GeneralConstraint> general;
  std::optional<std::string> truth_path;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::filesystem::path base_dir;  ///< relative paths resolve against this
};

inline constexpr int kManifestSchemaVersion = 1;

InstanceManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const InstanceManifest& manifest);

/// Builds and validates the instance; `rho_override` replaces a uniform rho.
ProblemInstance load_instance(const InstanceManifest& manifest,
                              std::optional<double> rho_override = std::nullopt);
ProblemInstance read_instance(const std::filesystem::path& manifest_path);

/// Writes the report JSON at `path` plus `<path>.W.mtx` and `<path>.X.mtx`.
void write_report(const std::filesystem::path& path, const SolveReport& report,
                  const ProblemInstance& inst, const SolverConfig& cfg);

/// Reads {"y": [...], "W_path": "..."}; a solve report qualifies.
std::pair<Vector, SymMat> read_init(const std::filesystem::path& path,
                                    const ProblemInstance& inst);

/// k,g,direction_inf,alpha,lambda,inner_steps
void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);

}  // namespace dspg
