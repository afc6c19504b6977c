#include "dspg/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace dspg {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ParseError::ParseError(std::string file, std::size_t line, const std::string& message)
    : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         message),
      file_(std::move(file)),
      line_(line) {}

std::string format_exact(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_display(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round_display(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_display(v).c_str(), nullptr);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view token) {
  T value{};
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

bool is_blank(std::string_view line) { return split_ws(line).empty(); }

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return in;
}

std::string resolve(const fs::path& base, const std::string& rel) {
  const fs::path p(rel);
  return (p.is_absolute() ? p : base / p).string();
}

}  // namespace

SymMat parse_matrix(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  ++lineno;
  const auto header = split_ws(line);
  if (header.size() != 3 || header[0] != "%%SymCoord") {
    throw ParseError(name, lineno, "expected header '%%SymCoord n nnz'");
  }
  const auto n = parse_number<long long>(header[1]);
  const auto nnz = parse_number<long long>(header[2]);
  if (!n || *n < 1) throw ParseError(name, lineno, "dimension must be a positive integer");
  if (!nnz || *nnz < 0) throw ParseError(name, lineno, "nnz must be a non-negative integer");
  if (*nnz > *n * (*n + 1) / 2) throw ParseError(name, lineno, "nnz exceeds the upper triangle");

  Matrix m = Matrix::Zero(*n, *n);
  std::set<std::pair<long long, long long>> seen;
  long long count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto tok = split_ws(line);
    if (tok.size() != 3) throw ParseError(name, lineno, "expected 'i j v'");
    const auto i = parse_number<long long>(tok[0]);
    const auto j = parse_number<long long>(tok[1]);
    const auto v = parse_number<double>(tok[2]);
    if (!i || !j) throw ParseError(name, lineno, "indices must be integers");
    if (!v || !std::isfinite(*v)) throw ParseError(name, lineno, "value is not a finite real");
    if (*i < 1 || *j > *n || *i > *j) {
      throw ParseError(name, lineno, "index outside the upper triangle (1 <= i <= j <= n)");
    }
    if (!seen.emplace(*i, *j).second) {
      throw ParseError(name, lineno,
                       "duplicate entry (" + std::to_string(*i) + "," + std::to_string(*j) + ")");
    }
    if (++count > *nnz) throw ParseError(name, lineno, "more entries than declared nnz");
    m(*i - 1, *j - 1) = *v;
  }
  if (count != *nnz) {
    throw ParseError(name, lineno,
                     "declared " + std::to_string(*nnz) + " entries, found " + std::to_string(count));
  }
  return SymMat::from_upper(m);
}

SymMat read_matrix_file(const fs::path& path) {
  auto in = open_input(path);
  return parse_matrix(in, path.string());
}

void write_matrix(std::ostream& out, const SymMat& m) {
  const Index n = m.n();
  Index nnz = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) nnz += m(i, j) != 0.0;
  }
  out << "%%SymCoord " << n << ' ' << nnz << '\n';
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      if (m(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << format_exact(m(i, j)) << '\n';
    }
  }
}

void write_matrix_file(const fs::path& path, const SymMat& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matrix(out, m);
}

InstanceManifest read_manifest(const fs::path& path) {
  auto in = open_input(path);
  const std::string name = path.string();
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(name, 0, std::string("invalid JSON: ") + e.what());
  }

  auto fail = [&](const std::string& what) -> ParseError { return ParseError(name, 0, what); };
  InstanceManifest m;
  m.base_dir = path.parent_path();
  try {
    m.schema_version = doc.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion) {
      throw fail("unsupported schema_version " + std::to_string(m.schema_version));
    }
    m.n = doc.at("n").get<Index>();
    if (m.n < 1) throw fail("n must be positive");
    m.mu = doc.value("mu", 1.0);
    m.c_path = doc.at("c_path").get<std::string>();

    const auto& rho = doc.at("rho");
    if (rho.contains("uniform")) {
      m.rho_uniform = rho.at("uniform").get<double>();
      if (!(*m.rho_uniform >= 0.0)) throw ValidationError("rho.uniform must be >= 0");
    } else if (rho.contains("matrix")) {
      m.rho_matrix_path = rho.at("matrix").get<std::string>();
    } else {
      throw fail("rho needs 'uniform' or 'matrix'");
    }

    if (doc.contains("constraints") && !doc.at("constraints").is_null()) {
      const auto& cons = doc.at("constraints");
      if (cons.contains("zero_pattern")) {
        std::vector<IndexPair> pattern;
        std::set<IndexPair> unique;
        for (const auto& pair : cons.at("zero_pattern")) {
          if (!pair.is_array() || pair.size() != 2) throw fail("zero_pattern entries are [i, j]");
          const auto i = pair.at(0).get<Index>();
          const auto j = pair.at(1).get<Index>();
          if (i < 1 || j > m.n || i > j) {
            throw ValidationError("zero_pattern entry [" + std::to_string(i) + "," +
                                  std::to_string(j) + "] outside 1 <= i <= j <= n");
          }
          if (!unique.emplace(i - 1, j - 1).second) {
            throw ValidationError("duplicate zero_pattern entry [" + std::to_string(i) + "," +
                                  std::to_string(j) + "]");
          }
          pattern.emplace_back(i - 1, j - 1);
        }
        m.zero_pattern = std::move(pattern);
      } else if (cons.contains("general")) {
        for (const auto& g : cons.at("general")) {
          m.general.push_back({g.at("matrix").get<std::string>(), g.at("b").get<double>()});
        }
      } else {
        throw fail("constraints need 'zero_pattern' or 'general'");
      }
    }
    if (doc.contains("truth_path")) m.truth_path = doc.at("truth_path").get<std::string>();
    if (doc.contains("metadata")) m.metadata = doc.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const fs::path& path, const InstanceManifest& m) {
  ordered_json doc;
  doc["schema_version"] = m.schema_version;
  doc["n"] = m.n;
  doc["mu"] = m.mu;
  if (m.rho_uniform) doc["rho"] = {{"uniform", *m.rho_uniform}};
  else doc["rho"] = {{"matrix", m.rho_matrix_path}};
  doc["c_path"] = m.c_path;
  if (m.zero_pattern) {
    ordered_json pairs = ordered_json::array();
    for (const auto& [i, j] : *m.zero_pattern) pairs.push_back({i + 1, j + 1});
    doc["constraints"] = {{"zero_pattern", std::move(pairs)}};
  } else if (!m.general.empty()) {
    ordered_json list = ordered_json::array();
    for (const auto& g : m.general) list.push_back({{"matrix", g.matrix_path}, {"b", g.rhs}});
    doc["constraints"] = {{"general", std::move(list)}};
  }
  if (m.truth_path) doc["truth_path"] = *m.truth_path;
  doc["metadata"] = m.metadata;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

ProblemInstance load_instance(const InstanceManifest& m, std::optional<double> rho_override) {
  SymMat c = read_matrix_file(resolve(m.base_dir, m.c_path));
  if (c.n() != m.n) throw ValidationError("C dimension does not match manifest n");

  SymMat rho;
  if (rho_override) {
    if (!m.rho_uniform) throw ValidationError("rho override requires a uniform rho manifest");
    rho = SymMat::constant(m.n, *rho_override);
  } else if (m.rho_uniform) {
    rho = SymMat::constant(m.n, *m.rho_uniform);
  } else {
    rho = read_matrix_file(resolve(m.base_dir, m.rho_matrix_path));
    if (rho.n() != m.n) throw ValidationError("rho dimension does not match manifest n");
  }

  ConstraintMap map;
  std::optional<std::vector<IndexPair>> pattern;
  if (m.zero_pattern) {
    std::vector<SparseSym> coeffs;
    for (const auto& [i, j] : *m.zero_pattern) coeffs.push_back({CoordEntry{i, j, 1.0}});
    map = ConstraintMap(m.n, std::move(coeffs), Vector::Zero(static_cast<Index>(m.zero_pattern->size())));
    pattern = m.zero_pattern;
  } else if (!m.general.empty()) {
    std::vector<SparseSym> coeffs;
    Vector rhs(static_cast<Index>(m.general.size()));
    for (std::size_t p = 0; p < m.general.size(); ++p) {
      const SymMat a = read_matrix_file(resolve(m.base_dir, m.general[p].matrix_path));
      if (a.n() != m.n) throw ValidationError("constraint matrix dimension does not match n");
      SparseSym entries;
      for (Index i = 0; i < m.n; ++i) {
        for (Index j = i; j < m.n; ++j) {
          if (a(i, j) != 0.0) entries.push_back({i, j, a(i, j)});
        }
      }
      coeffs.push_back(std::move(entries));
      rhs(static_cast<Index>(p)) = m.general[p].rhs;
    }
    map = ConstraintMap(m.n, std::move(coeffs), std::move(rhs));
  }
  return ProblemInstance(std::move(c), std::move(rho), m.mu, std::move(map), std::move(pattern));
}

ProblemInstance read_instance(const fs::path& manifest_path) {
  return load_instance(read_manifest(manifest_path));
}

void write_report(const fs::path& path, const SolveReport& report, const ProblemInstance& inst,
                  const SolverConfig& cfg) {
  const std::string w_name = path.filename().string() + ".W.mtx";
  const std::string x_name = path.filename().string() + ".X.mtx";
  const bool has_point = report.w.n() == inst.n();

  ordered_json doc;
  doc["status"] = std::string(to_string(report.status));
  doc["message"] = report.message;
  doc["n"] = inst.n();
  doc["m"] = inst.m();
  doc["iterations"] = report.iterations;
  if (has_point) {
    doc["primal_obj"] = round_display(report.primal_obj);
    doc["dual_obj"] = round_display(report.dual_obj);
    doc["gap"] = round_display(report.gap);
    doc["min_eig_x"] = round_display(report.min_eig_x);
    doc["min_lambda"] = round_display(report.min_lambda);
    doc["cleanup_applied"] = report.cleanup_applied;
    doc["kkt"] = {{"direction_inf", round_display(report.kkt.direction_inf)},
                  {"primal_feas", round_display(report.kkt.primal_feas)},
                  {"gap", round_display(report.kkt.gap)},
                  {"compl", round_display(report.kkt.compl_slack)}};
  }
  doc["wall_time_s"] = report.wall_time;
  doc["config"] = {{"eps", cfg.eps},         {"gamma", cfg.gamma},
                   {"tau", cfg.tau},         {"sigma1", cfg.sigma1},
                   {"sigma2", cfg.sigma2},   {"alpha_min", cfg.alpha_min},
                   {"alpha_max", cfg.alpha_max}, {"alpha0", cfg.alpha0},
                   {"window_m", cfg.window_m}, {"max_outer", cfg.max_outer},
                   {"max_inner", cfg.max_inner}, {"cleanup", cfg.cleanup}};
  if (has_point) {
    // Full precision so the report can seed a warm start.
    ordered_json y = ordered_json::array();
    for (Index p = 0; p < report.y.size(); ++p) y.push_back(report.y(p));
    doc["y"] = std::move(y);
    doc["W_path"] = w_name;
    doc["X_path"] = x_name;
    write_matrix_file(path.parent_path() / w_name, report.w);
    write_matrix_file(path.parent_path() / x_name, report.x);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::pair<Vector, SymMat> read_init(const fs::path& path, const ProblemInstance& inst) {
  auto in = open_input(path);
  const std::string name = path.string();
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(name, 0, std::string("invalid JSON: ") + e.what());
  }
  try {
    const auto& ys = doc.at("y");
    Vector y(static_cast<Index>(ys.size()));
    for (std::size_t p = 0; p < ys.size(); ++p) y(static_cast<Index>(p)) = ys[p].get<double>();
    if (y.size() != inst.m()) throw ValidationError("init y length does not match m");
    SymMat w = read_matrix_file(resolve(path.parent_path(), doc.at("W_path").get<std::string>()));
    if (w.n() != inst.n()) throw ValidationError("init W dimension does not match n");
    return {std::move(y), std::move(w)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(name, 0, std::string("malformed init file: ") + e.what());
  }
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
  out << "k,g,direction_inf,alpha,lambda,inner_steps\n";
  for (const auto& r : trace) {
    out << r.k << ',' << format_exact(r.g_val) << ',' << format_exact(r.direction_inf) << ','
        << format_exact(r.alpha) << ',' << format_exact(r.lambda) << ',' << r.inner_steps << '\n';
  }
}

}  // namespace dspg
