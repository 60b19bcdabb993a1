#include "vacdec/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "vacdec/oracle.hpp"

namespace vacdec::cli {

namespace {

std::string locate(SourceLocation at, const std::string& what) {
  return std::to_string(at.line) + ":" + std::to_string(at.column) + ": " + what;
}

}  // namespace

LocatedError::LocatedError(ErrorKind kind, SourceLocation where, const std::string& what)
    : Error(kind, locate(where, what)), where_(where) {}

// ---------------------------------------------------------------------------
// Field table, shared by the reader and the canonical writer
// ---------------------------------------------------------------------------

namespace {

using Member = std::variant<std::optional<double> RawScenario::*,
                            std::optional<std::int64_t> RawScenario::*,
                            std::optional<std::string> RawScenario::*,
                            std::optional<Vec3> RawScenario::*,
                            std::optional<bool> RawScenario::*>;

struct Field {
  std::string_view section;  // empty for the preamble
  std::string_view key;
  Member member;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"", "id", &RawScenario::id},
      {"particle", "kind", &RawScenario::particle},
      {"particle", "e2", &RawScenario::e2},
      {"particle", "p", &RawScenario::p},
      {"particle", "m", &RawScenario::m},
      {"trajectory", "kind", &RawScenario::trajectory},
      {"trajectory", "R", &RawScenario::R},
      {"trajectory", "T", &RawScenario::T},
      {"trajectory", "v", &RawScenario::v},
      {"trajectory", "tau", &RawScenario::tau},
      {"trajectory", "T_pulse", &RawScenario::T_pulse},
      {"trajectory", "T_sep", &RawScenario::T_sep},
      {"trajectory", "Omega", &RawScenario::Omega},
      {"trajectory", "N", &RawScenario::N},
      {"geometry", "plate", &RawScenario::plate},
      {"geometry", "z0", &RawScenario::z0},
      {"geometry", "j_hat", &RawScenario::j_hat},
      {"numerics", "method", &RawScenario::method},
      {"numerics", "rel_tol", &RawScenario::rel_tol},
      {"numerics", "abs_tol", &RawScenario::abs_tol},
      {"numerics", "k_max", &RawScenario::k_max},
      {"numerics", "max_subdivisions", &RawScenario::max_subdivisions},
      {"oracle", "samples", &RawScenario::samples},
      {"oracle", "seed", &RawScenario::seed},
      {"oracle", "workers", &RawScenario::workers},
  };
  return table;
}

constexpr std::string_view kSections[] = {"particle", "trajectory", "geometry", "numerics",
                                          "oracle"};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

int column_of(std::string_view line, std::string_view part) {
  return static_cast<int>(part.data() - line.data()) + 1;
}

double read_double(std::string_view s, SourceLocation at) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw LocatedError(ErrorKind::ParseError, at, "expected a number, got '" + std::string(s) + "'");
  if (!std::isfinite(x))
    throw LocatedError(ErrorKind::ParseError, at, "number must be finite");
  return x;
}

std::int64_t read_integer(std::string_view s, SourceLocation at) {
  std::int64_t n = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec == std::errc{} && ptr == s.data() + s.size()) return n;
  // 4e6 and the like
  const double x = read_double(s, at);
  if (x != std::floor(x) || std::abs(x) > 9.0e18)
    throw LocatedError(ErrorKind::ParseError, at, "expected an integer, got '" + std::string(s) + "'");
  return static_cast<std::int64_t>(x);
}

bool read_bool(std::string_view s, SourceLocation at) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw LocatedError(ErrorKind::ParseError, at, "expected true or false, got '" + std::string(s) + "'");
}

Vec3 read_vec3(std::string_view line, std::string_view s, int line_no) {
  double c[3];
  int n = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    const auto part = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
    const SourceLocation at{line_no, column_of(line, part.empty() ? s.substr(start) : part)};
    if (n == 3) throw LocatedError(ErrorKind::ParseError, at, "vector has more than 3 components");
    if (part.empty()) throw LocatedError(ErrorKind::ParseError, at, "empty vector component");
    c[n++] = read_double(part, at);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n != 3)
    throw LocatedError(ErrorKind::ParseError, {line_no, column_of(line, s)},
                       "expected 3 comma-separated components");
  return {c[0], c[1], c[2]};
}

}  // namespace

ParsedScenario parse_scenario(std::string_view text) {
  ParsedScenario out;
  std::string section;
  int line_no = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const auto hash = line.find('#');
    const std::string_view body = trim(line.substr(0, hash));
    if (body.empty()) continue;

    if (body.front() == '[') {
      if (body.back() != ']')
        throw LocatedError(ErrorKind::ParseError, {line_no, column_of(line, body)},
                           "unterminated section header");
      const auto name = trim(body.substr(1, body.size() - 2));
      if (std::find(std::begin(kSections), std::end(kSections), name) == std::end(kSections))
        throw LocatedError(ErrorKind::UnknownKey, {line_no, column_of(line, body)},
                           "unknown section [" + std::string(name) + "]");
      section = name;
      continue;
    }

    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw LocatedError(ErrorKind::ParseError, {line_no, column_of(line, body)},
                         "expected 'key = value'");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key.empty())
      throw LocatedError(ErrorKind::ParseError, {line_no, column_of(line, body)}, "missing key");
    const SourceLocation key_at{line_no, column_of(line, key)};
    if (value.empty())
      throw LocatedError(ErrorKind::ParseError,
                         {line_no, column_of(line, body.substr(eq)) + 1}, "missing value");
    const SourceLocation value_at{line_no, column_of(line, value)};

    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
      return f.section == section && f.key == key;
    });
    const std::string dotted = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (it == table.end())
      throw LocatedError(ErrorKind::UnknownKey, key_at, "unknown key '" + dotted + "'");
    if (out.locations.count(dotted))
      throw LocatedError(ErrorKind::DuplicateKey, key_at,
                         "duplicate key '" + dotted + "' (first at line " +
                             std::to_string(out.locations[dotted].line) + ")");
    out.locations[dotted] = key_at;

    RawScenario& raw = out.raw;
    std::visit(
        [&](auto member) {
          using T = typename std::remove_reference_t<decltype(raw.*member)>::value_type;
          if constexpr (std::is_same_v<T, double>) {
            raw.*member = read_double(value, value_at);
          } else if constexpr (std::is_same_v<T, std::int64_t>) {
            raw.*member = read_integer(value, value_at);
          } else if constexpr (std::is_same_v<T, std::string>) {
            raw.*member = std::string(value);
          } else if constexpr (std::is_same_v<T, Vec3>) {
            raw.*member = read_vec3(line, value, line_no);
          } else {
            raw.*member = read_bool(value, value_at);
          }
        },
        it->member);
  }
  return out;
}

ParsedScenario parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidValue, "cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// ---------------------------------------------------------------------------
// Canonical form and hash
// ---------------------------------------------------------------------------

namespace {

std::string shortest(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

std::string canonical_text(const RawScenario& raw) {
  std::string out;
  std::string_view current = "";
  for (const Field& f : fields()) {
    std::string value;
    std::visit(
        [&](auto member) {
          const auto& opt = raw.*member;
          if (!opt) return;
          using T = typename std::remove_cvref_t<decltype(opt)>::value_type;
          if constexpr (std::is_same_v<T, double>) {
            value = shortest(*opt);
          } else if constexpr (std::is_same_v<T, std::int64_t>) {
            value = std::to_string(*opt);
          } else if constexpr (std::is_same_v<T, std::string>) {
            value = *opt;
          } else if constexpr (std::is_same_v<T, Vec3>) {
            value = shortest(opt->x) + ", " + shortest(opt->y) + ", " + shortest(opt->z);
          } else {
            value = *opt ? "true" : "false";
          }
        },
        f.member);
    if (value.empty()) continue;
    if (f.section != current) {
      if (!out.empty()) out += '\n';
      out += "[" + std::string(f.section) + "]\n";
      current = f.section;
    }
    out += std::string(f.key) + " = " + value + "\n";
  }
  return out;
}

std::string config_hash(const RawScenario& raw) {
  // the id names the run, it is not part of the configuration
  RawScenario anon = raw;
  anon.id.reset();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_text(anon)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["scenario_id"] = m.scenario_id;
  j["config_hash"] = m.config_hash;
  j["tool_version"] = m.tool_version;
  j["timestamp"] = m.timestamp;
  auto& r = j["regularization"];
  r["kind"] = std::string(to_string(m.regularization.kind));
  r["tau"] = m.regularization.tau ? nlohmann::ordered_json(*m.regularization.tau) : nullptr;
  r["k_max"] = m.regularization.k_max ? nlohmann::ordered_json(*m.regularization.k_max) : nullptr;
  r["note"] = m.regularization.note;
  return j.dump(2) + "\n";
}

int exit_code_for(ErrorKind kind) { return is_numerical(kind) ? kExitNumerical : kExitInvalid; }

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

namespace {

struct Row {
  std::string orientation;
  double z0 = 0.0;
  std::string method;
  std::optional<DecoherenceResult> result;
  std::optional<McEstimate> mc;
  std::string verdict;
};

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void write_csv(std::ostream& os, const std::string& id, const std::vector<Row>& rows) {
  os << kCsvHeader << "\n";
  for (const Row& r : rows) {
    os << csv_field(id) << ',' << r.orientation << ',' << g17(r.z0) << ',' << r.method;
    if (r.result) {
      const auto& w = *r.result;
      for (double x : {w.w_vac, w.w_boundary, w.w_total, w.visibility, w.emission_prob_equiv,
                       w.err_est})
        os << ',' << g17(x);
    } else {
      os << ",,,,,,";
    }
    if (r.mc) {
      os << ',' << g17(r.mc->value) << ',' << g17(r.mc->std_error);
    } else {
      os << ",,";
    }
    os << ',' << r.verdict << "\n";
  }
}

void write_json(std::ostream& os, const std::string& id, const std::vector<Row>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const Row& r : rows) {
    nlohmann::ordered_json o;
    o["scenario_id"] = id;
    o["orientation"] = r.orientation;
    o["z0"] = r.z0;
    o["method"] = r.method;
    auto num = [&](const char* key, std::optional<double> x) {
      o[key] = x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
    };
    const auto* w = r.result ? &*r.result : nullptr;
    num("W_vac", w ? std::optional(w->w_vac) : std::nullopt);
    num("W_boundary", w ? std::optional(w->w_boundary) : std::nullopt);
    num("W_total", w ? std::optional(w->w_total) : std::nullopt);
    num("visibility", w ? std::optional(w->visibility) : std::nullopt);
    num("emission_prob_equiv", w ? std::optional(w->emission_prob_equiv) : std::nullopt);
    num("err_est", w ? std::optional(w->err_est) : std::nullopt);
    num("mc_value", r.mc ? std::optional(r.mc->value) : std::nullopt);
    num("mc_stderr", r.mc ? std::optional(r.mc->std_error) : std::nullopt);
    o["mc_verdict"] = r.verdict.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.verdict);
    arr.push_back(std::move(o));
  }
  os << arr.dump(2) << "\n";
}

SweepSpec parse_sweep(const std::string& text, bool log_axis, const Scenario& base) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw Error(ErrorKind::InvalidValue, "--sweep expects axis=a:b:n, got '" + text + "'");
  SweepSpec spec;
  spec.axis = parse_sweep_axis(text.substr(0, eq));
  const std::string rest = text.substr(eq + 1);
  if (spec.axis == SweepAxis::orientation) {
    // orientation=parallel,perpendicular (or "both")
    std::stringstream ss(rest == "both" ? std::string("parallel,perpendicular") : rest);
    for (std::string item; std::getline(ss, item, ',');) {
      if (item == "parallel") spec.orientations.push_back(Orientation::parallel);
      else if (item == "perpendicular") spec.orientations.push_back(Orientation::perpendicular);
      else throw Error(ErrorKind::InvalidValue, "unknown orientation '" + item + "'");
    }
    return spec;
  }
  const auto c1 = rest.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : rest.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw Error(ErrorKind::InvalidValue, "--sweep expects axis=a:b:n, got '" + text + "'");
  double lo = 0.0, hi = 0.0;
  std::int64_t n = 0;
  try {
    lo = read_double(rest.substr(0, c1), {});
    hi = read_double(rest.substr(c1 + 1, c2 - c1 - 1), {});
    n = read_integer(rest.substr(c2 + 1), {});
  } catch (const Error&) {
    throw Error(ErrorKind::InvalidValue, "--sweep expects axis=a:b:n, got '" + text + "'");
  }
  if (n < 1 || n > 1000000) throw Error(ErrorKind::InvalidValue, "--sweep point count out of range");
  if (log_axis && !(lo > 0.0 && hi > 0.0))
    throw Error(ErrorKind::InvalidValue, "--log-axis needs positive sweep bounds");
  spec.values = sweep_grid(lo, hi, static_cast<int>(n), log_axis);
  (void)base;
  return spec;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string describe(const std::filesystem::path& file, const ValidationError& e,
                     const std::map<std::string, SourceLocation>& where) {
  std::string out;
  for (const Violation& v : e.violations()) {
    // "trajectory" alone refers to the section; point at its kind line if any
    auto it = where.find(v.field);
    if (it == where.end()) it = where.find(v.field + ".kind");
    out += file.string() + ":";
    if (it != where.end())
      out += std::to_string(it->second.line) + ":" + std::to_string(it->second.column) + ":";
    out += " " + std::string(to_string(v.kind)) + ": " + v.field + ": " + v.message + "\n";
  }
  return out;
}

std::filesystem::path companion(const std::filesystem::path& out, const char* suffix) {
  std::filesystem::path p = out;
  p.replace_extension();
  p += suffix;
  return p;
}

void write_plot_data(std::ostream& os, const Scenario& base, const SweepSpec& spec, int workers) {
  SweepSpec z;
  z.axis = SweepAxis::z0;
  z.values = spec.axis == SweepAxis::z0 ? spec.values : std::vector<double>{base.geometry.z0};
  os << "curve,x,y\n";
  for (Orientation o : {Orientation::parallel, Orientation::perpendicular}) {
    const Scenario oriented = with_sweep_value(base, SweepAxis::orientation, 0.0, o);
    const std::string curve = "visibility_" + std::string(to_string(o));
    for (const SweepPoint& p : sweep(oriented, z, workers)) {
      if (!p.result) throw Error(*p.error, p.error_message);
      os << curve << ',' << g17(p.value) << ',' << g17(p.result->visibility) << "\n";
    }
  }
}

}  // namespace

int run(const RunOptions& opts, std::ostream& out, std::ostream& log) {
  ParsedScenario parsed;
  try {
    parsed = parse_scenario_file(opts.scenario);
  } catch (const Error& e) {
    log << opts.scenario.string() << ":" << e.what() << "\n";
    return exit_code_for(e.kind());
  }

  RawScenario raw = parsed.raw;
  if (opts.method) raw.method = *opts.method;
  if (opts.tau) raw.tau = *opts.tau;
  if (opts.k_max) raw.k_max = *opts.k_max;
  if (opts.mc_samples) raw.samples = static_cast<std::int64_t>(*opts.mc_samples);
  if (opts.seed) raw.seed = static_cast<std::int64_t>(*opts.seed);

  if (opts.format != "csv" && opts.format != "json") {
    log << "error: --format must be csv or json\n";
    return kExitInvalid;
  }
  if (opts.emit_plot_data && !opts.out) {
    log << "error: --emit-plot-data needs --out\n";
    return kExitInvalid;
  }

  Scenario base;
  try {
    base = validate(raw);
  } catch (const ValidationError& e) {
    log << describe(opts.scenario, e, parsed.locations);
    return kExitInvalid;
  }
  const std::string id = raw.id ? *raw.id : opts.scenario.stem().string();
  base.id = id;
  for (const auto& w : base.warnings) log << "warning: " << w << "\n";

  int code = kExitOk;
  std::vector<Row> rows;
  Regularization regularization;
  try {
    SweepSpec spec;
    if (opts.sweep) {
      spec = parse_sweep(*opts.sweep, opts.log_axis, base);
    } else {
      spec.values = {base.geometry.z0};
    }
    const auto points = sweep(base, spec, opts.workers);

    McConfig mc = base.oracle_numerics.value_or(McConfig{});
    mc.workers = opts.workers;

    for (const SweepPoint& p : points) {
      Row r;
      r.orientation = std::string(to_string(p.scenario.geometry.orientation));
      r.z0 = p.scenario.geometry.z0;
      r.method = std::string(to_string(p.result ? p.result->method : p.scenario.method));
      if (!p.result) {
        log << "error at " << to_string(spec.axis) << " = " << g17(p.value) << ": "
            << to_string(*p.error) << ": " << p.error_message << "\n";
        code = std::max(code, exit_code_for(*p.error));
        rows.push_back(std::move(r));
        continue;
      }
      r.result = p.result;
      if (rows.empty() || regularization.kind == Regularization::Kind::none)
        regularization = p.result->regularization;
      if (opts.oracle) {
        try {
          r.mc = mc_w_first_principles(p.scenario, mc);
          const double sigma = std::hypot(r.mc->std_error, p.result->err_est);
          r.verdict = std::abs(r.mc->value - p.result->w_total) <= 3.0 * sigma ? "agree" : "disagree";
        } catch (const Error& e) {
          log << "oracle error at " << to_string(spec.axis) << " = " << g17(p.value) << ": "
              << e.what() << "\n";
          r.verdict = std::string(to_string(e.kind()));
          code = std::max(code, exit_code_for(e.kind()));
        }
      }
      rows.push_back(std::move(r));
    }

    std::ofstream file;
    if (opts.out) {
      file.open(*opts.out, std::ios::binary);
      if (!file) {
        log << "error: cannot write '" << opts.out->string() << "'\n";
        return kExitInvalid;
      }
    }
    std::ostream& dest = opts.out ? static_cast<std::ostream&>(file) : out;
    if (opts.format == "json") write_json(dest, id, rows);
    else write_csv(dest, id, rows);

    if (opts.out) {
      RunManifest m;
      m.scenario_id = id;
      m.config_hash = config_hash(raw);
      m.timestamp = utc_now();
      m.regularization = regularization;
      std::ofstream(companion(*opts.out, ".manifest.json"), std::ios::binary) << manifest_json(m);
    }
    if (opts.emit_plot_data) {
      std::ofstream plot(companion(*opts.out, ".plot.csv"), std::ios::binary);
      write_plot_data(plot, base, spec, opts.workers);
    }
  } catch (const Error& e) {
    log << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitNumerical;
  }

  // one-line summary; keeps stdout clean when the table goes there
  std::ostream& summary = opts.out ? out : log;
  const Row* last = nullptr;
  std::size_t ok = 0;
  for (const Row& r : rows) {
    if (r.result) {
      last = &r;
      ++ok;
    }
  }
  char buf[256];
  if (last) {
    const auto& w = *last->result;
    std::snprintf(buf, sizeof buf,
                  "%s: %zu/%zu points, z0=%.6g %s: W_vac=%.6g W_boundary=%.6g W_total=%.6g "
                  "visibility=%.9g",
                  id.c_str(), ok, rows.size(), last->z0, last->orientation.c_str(), w.w_vac,
                  w.w_boundary, w.w_total, w.visibility);
  } else {
    std::snprintf(buf, sizeof buf, "%s: 0/%zu points evaluated", id.c_str(), rows.size());
  }
  summary << buf << "\n";
  return code;
}

int canon(const std::filesystem::path& scenario, std::ostream& out, std::ostream& log) {
  try {
    const ParsedScenario parsed = parse_scenario_file(scenario);
    out << canonical_text(parsed.raw);
    out << "# config_hash " << config_hash(parsed.raw) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    log << scenario.string() << ":" << e.what() << "\n";
    return exit_code_for(e.kind());
  }
}

}  // namespace vacdec::cli
