#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vacdec/decoherence.hpp"
#include "vacdec/error.hpp"
#include "vacdec/scenario.hpp"

namespace vacdec::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

struct SourceLocation {
  int line = 0;
  int column = 0;
};

/// Grammar and key errors carry the 1-based position of the offending token.
class LocatedError : public Error {
 public:
  LocatedError(ErrorKind kind, SourceLocation where, const std::string& what);
  SourceLocation where() const noexcept { return where_; }

 private:
  SourceLocation where_;
};

struct ParsedScenario {
  RawScenario raw;
  /// "section.key" -> position of the key, for mapping validation errors.
  std::map<std::string, SourceLocation> locations;
};

/// Sectioned key = value grammar:
///
///   # comment
///   id = name                 (optional, before any section)
///   [particle]    kind, e2, p, m
///   [trajectory]  kind, R, T, v, tau, T_pulse, T_sep, Omega, N
///   [geometry]    plate, z0, j_hat
///   [numerics]    method, rel_tol, abs_tol, k_max, max_subdivisions
///   [oracle]      samples, seed, workers
///
/// Vectors are comma triples, numbers accept scientific notation.
/// Throws LocatedError (ParseError, UnknownKey, DuplicateKey).
ParsedScenario parse_scenario(std::string_view text);
ParsedScenario parse_scenario_file(const std::filesystem::path& path);

/// Fixed section and key order, shortest round-trip numbers. Parsing the
/// output reproduces the same raw scenario.
std::string canonical_text(const RawScenario& raw);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const RawScenario& raw);

struct RunManifest {
  std::string scenario_id;
  std::string config_hash;
  std::string tool_version{kToolVersion};
  std::string timestamp;  // UTC, ISO 8601
  Regularization regularization;
};

std::string manifest_json(const RunManifest& m);

/// The CSV header, in schema order.
inline constexpr std::string_view kCsvHeader =
    "scenario_id,orientation,z0,method,W_vac,W_boundary,W_total,visibility,"
    "emission_prob_equiv,err_est,mc_value,mc_stderr,mc_verdict";

struct RunOptions {
  std::filesystem::path scenario;
  std::optional<std::string> sweep;  // "axis=a:b:n", orientation takes "parallel,perpendicular"
  bool log_axis = false;
  std::optional<std::string> method;
  std::optional<double> tau;
  std::optional<double> k_max;
  bool oracle = false;
  std::optional<std::uint64_t> mc_samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  bool emit_plot_data = false;
  std::string format = "csv";
  int workers = 0;
};

enum ExitCode : int { kExitOk = 0, kExitInvalid = 2, kExitNumerical = 3 };

/// Executes a run: results go to opts.out (or `out`), the summary line and
/// diagnostics to `log`. Never throws; returns the exit code.
int run(const RunOptions& opts, std::ostream& out, std::ostream& log);

/// Prints the canonical form and its hash. Returns the exit code.
int canon(const std::filesystem::path& scenario, std::ostream& out, std::ostream& log);

/// Exit code for an error kind: 3 for numerical failures, 2 otherwise.
int exit_code_for(ErrorKind kind);

}  // namespace vacdec::cli
