#include "csh/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "csh/error.hpp"

namespace csh {

namespace {

[[noreturn]] void parse_error(int line, int col, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ", column " << col << ": " << what;
  throw Error(ErrorKind::ParseError, msg.str());
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::ValidationError, what); }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Value token with its position, for error reporting.
struct Token {
  std::string_view text;
  int line;
  int col;
};

double to_double(const Token& tok) {
  double x = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (!tok.text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || tok.text.empty()) {
    parse_error(tok.line, tok.col, "expected a number, got '" + std::string(tok.text) + "'");
  }
  if (!std::isfinite(x)) parse_error(tok.line, tok.col, "number is not finite");
  return x;
}

int to_int(const Token& tok) {
  int x = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || tok.text.empty()) {
    parse_error(tok.line, tok.col, "expected an integer, got '" + std::string(tok.text) + "'");
  }
  return x;
}

bool to_bool(const Token& tok) {
  if (tok.text == "true") return true;
  if (tok.text == "false") return false;
  parse_error(tok.line, tok.col, "expected true or false, got '" + std::string(tok.text) + "'");
}

// Comma-separated pieces with their own columns.
std::vector<Token> split_list(const Token& tok) {
  std::vector<Token> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = tok.text.find(',', start);
    const std::string_view raw =
        tok.text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    std::size_t lead = 0;
    while (lead < raw.size() && is_space(raw[lead])) ++lead;
    const std::string_view piece = trim(raw);
    if (piece.empty()) parse_error(tok.line, tok.col + static_cast<int>(start), "empty list entry");
    out.push_back({piece, tok.line, tok.col + static_cast<int>(start + lead)});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<PointSpec> to_points(const Token& tok) {
  std::vector<PointSpec> pts;
  for (const Token& entry : split_list(tok)) {
    std::vector<Token> fields;
    std::size_t i = 0;
    while (i < entry.text.size()) {
      while (i < entry.text.size() && is_space(entry.text[i])) ++i;
      const std::size_t b = i;
      while (i < entry.text.size() && !is_space(entry.text[i])) ++i;
      if (i > b) fields.push_back({entry.text.substr(b, i - b), entry.line, entry.col + static_cast<int>(b)});
    }
    if (fields.size() != 4) {
      parse_error(entry.line, entry.col, "point needs 'x y z multiplicity'");
    }
    pts.push_back({{to_double(fields[0]), to_double(fields[1]), to_double(fields[2])},
                   to_int(fields[3])});
  }
  return pts;
}

using Setter = std::function<void(RunConfig&, const Token&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"model",
       {
           {"regime",
            [](RunConfig& c, const Token& t) {
              try {
                c.model.regime = parse_regime(t.text);
              } catch (const Error&) {
                parse_error(t.line, t.col, "unknown regime '" + std::string(t.text) + "'");
              }
            }},
           {"n", [](RunConfig& c, const Token& t) { c.model.N = to_int(t); }},
           {"g", [](RunConfig& c, const Token& t) { c.model.G = to_double(t); }},
           {"a", [](RunConfig& c, const Token& t) { c.model.a = to_double(t); }},
           {"kappa", [](RunConfig& c, const Token& t) { c.model.kappa = to_double(t); }},
           {"lambda", [](RunConfig& c, const Token& t) { c.model.lambda = to_double(t); }},
           {"alpha", [](RunConfig& c, const Token& t) { c.model.alpha = to_double(t); }},
           {"points",
            [](RunConfig& c, const Token& t) {
              if (t.text == "auto") {
                c.model.points.clear();
              } else {
                c.model.points = to_points(t);
              }
            }},
       }},
      {"numerics",
       {
           {"t_min", [](RunConfig& c, const Token& t) { c.numerics.t_min = to_double(t); }},
           {"t_max", [](RunConfig& c, const Token& t) { c.numerics.t_max = to_double(t); }},
           {"grid_points", [](RunConfig& c, const Token& t) { c.numerics.grid_points = to_int(t); }},
           {"grid_step", [](RunConfig& c, const Token& t) { c.numerics.grid_step = to_double(t); }},
           {"step_tol", [](RunConfig& c, const Token& t) { c.numerics.step_tol = to_double(t); }},
           {"shoot_tol", [](RunConfig& c, const Token& t) { c.numerics.shoot_tol = to_double(t); }},
           {"tail_tol", [](RunConfig& c, const Token& t) { c.numerics.tail_tol = to_double(t); }},
           {"mesh_level", [](RunConfig& c, const Token& t) { c.numerics.mesh_level = to_int(t); }},
           {"delta_schedule",
            [](RunConfig& c, const Token& t) {
              c.numerics.delta_schedule.clear();
              if (t.text == "auto") return;
              for (const Token& x : split_list(t)) c.numerics.delta_schedule.push_back(to_double(x));
            }},
           {"sigma", [](RunConfig& c, const Token& t) { c.numerics.sigma = to_double(t); }},
           {"iter_tol", [](RunConfig& c, const Token& t) { c.numerics.iter_tol = to_double(t); }},
           {"pcg_tol", [](RunConfig& c, const Token& t) { c.numerics.pcg_tol = to_double(t); }},
       }},
      {"output",
       {
           {"dir", [](RunConfig& c, const Token& t) { c.output.dir = std::string(t.text); }},
           {"deterministic",
            [](RunConfig& c, const Token& t) { c.output.deterministic = to_bool(t); }},
       }},
  };
  return s;
}

}  // namespace

double ModelConfig::exponent() const {
  if (a) return *a;
  if (G) return 4.0 * std::numbers::pi * *G;
  invalid("one of g and a is required");
}

Regime parse_regime(std::string_view s) {
  if (s == "topological" || s == "topo") return Regime::TopologicalPlane;
  if (s == "nontopological" || s == "nontopo") return Regime::NonTopologicalPlane;
  if (s == "sphere") return Regime::CompactSphere;
  invalid("unknown regime '" + std::string(s) + "'");
}

std::string_view regime_key(Regime r) {
  switch (r) {
    case Regime::TopologicalPlane: return "topological";
    case Regime::NonTopologicalPlane: return "nontopological";
    case Regime::CompactSphere: return "sphere";
  }
  return "topological";
}

RunConfig parse_config(std::string_view text, std::optional<Regime> command_regime) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::size_t lead = 0;
    while (lead < line.size() && is_space(line[lead])) ++lead;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const int col0 = static_cast<int>(lead) + 1;

    if (body.front() == '[') {
      if (body.back() != ']') parse_error(line_no, col0, "unterminated section header");
      section = std::string(trim(body.substr(1, body.size() - 2)));
      if (!schema().contains(section)) {
        parse_error(line_no, col0 + 1, "unknown section '" + section + "'");
      }
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) parse_error(line_no, col0, "expected 'key = value'");
    if (section.empty()) parse_error(line_no, col0, "key outside of a section");
    const std::string key(trim(body.substr(0, eq)));
    const auto& keys = schema().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) {
      parse_error(line_no, col0, "unknown key '" + key + "' in [" + section + "]");
    }
    if (!seen.insert(section + "." + key).second) {
      parse_error(line_no, col0, "duplicate key '" + key + "'");
    }
    std::size_t vstart = eq + 1;
    while (vstart < body.size() && is_space(body[vstart])) ++vstart;
    const Token value{trim(body.substr(eq + 1)), line_no, col0 + static_cast<int>(vstart)};
    if (value.text.empty()) parse_error(value.line, value.col, "missing value for '" + key + "'");
    it->second(cfg, value);
  }
  if (!seen.contains("model.regime")) {
    if (!command_regime) invalid("regime is required");
    cfg.model.regime = *command_regime;
  } else if (command_regime && *command_regime != cfg.model.regime) {
    invalid("config regime '" + std::string(regime_key(cfg.model.regime)) +
            "' does not match the command '" + std::string(regime_key(*command_regime)) + "'");
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  const NumericsConfig& x = cfg.numerics;
  if (m.G && m.a) invalid("give g or a, not both");
  if (!m.G && !m.a) invalid("one of g and a is required");
  if (!(m.exponent() > 0.0)) invalid("g (or a) must be positive");
  if (m.N < 1) invalid("n must be a positive integer");
  if (m.kappa == 0.0) invalid("kappa must be nonzero");
  if (m.lambda && !(*m.lambda > 0.0)) invalid("lambda must be positive");
  if (m.regime == Regime::TopologicalPlane && m.lambda) {
    invalid("lambda is derived from kappa in the topological regime; remove it");
  }
  if (m.regime == Regime::NonTopologicalPlane && !m.alpha) {
    invalid("alpha is required in the non-topological regime");
  }
  if (m.regime != Regime::NonTopologicalPlane && m.alpha) {
    invalid("alpha only applies to the non-topological regime");
  }
  if (m.alpha && !(*m.alpha > 0.0)) invalid("alpha must be positive");
  if (m.regime != Regime::CompactSphere && !m.points.empty()) {
    invalid("points only apply to the sphere regime");
  }
  for (const PointSpec& p : m.points) {
    if (p.multiplicity < 1) invalid("point multiplicity must be positive");
  }
  if (!(x.t_min < x.t_max)) invalid("t_min must be below t_max");
  if (x.grid_points < 3) invalid("grid_points must be at least 3");
  const std::pair<const char*, double> positive[] = {
      {"grid_step", x.grid_step}, {"step_tol", x.step_tol}, {"shoot_tol", x.shoot_tol},
      {"tail_tol", x.tail_tol},   {"iter_tol", x.iter_tol}, {"pcg_tol", x.pcg_tol}};
  for (const auto& [name, value] : positive) {
    if (!(value > 0.0)) invalid(std::string(name) + " must be positive");
  }
  if (x.sigma < 0.0) invalid("sigma must be nonnegative (0 selects it automatically)");
  if (x.mesh_level < 0 || x.mesh_level > kMaxMeshLevel) {
    invalid("mesh_level must be in [0, " + std::to_string(kMaxMeshLevel) + "]");
  }
  for (std::size_t i = 0; i < x.delta_schedule.size(); ++i) {
    if (!(x.delta_schedule[i] > 0.0)) invalid("delta_schedule entries must be positive");
    if (i > 0 && !(x.delta_schedule[i] < x.delta_schedule[i - 1])) {
      invalid("delta_schedule must be strictly decreasing");
    }
  }
  if (cfg.output.dir.empty()) invalid("output dir must not be empty");
}

std::string serialize_config(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  const NumericsConfig& x = cfg.numerics;
  std::ostringstream out;
  out << "[model]\n";
  out << "regime = " << regime_key(m.regime) << "\n";
  out << "n = " << m.N << "\n";
  if (m.G) out << "g = " << fmt(*m.G) << "\n";
  if (m.a) out << "a = " << fmt(*m.a) << "\n";
  out << "kappa = " << fmt(m.kappa) << "\n";
  if (m.lambda) out << "lambda = " << fmt(*m.lambda) << "\n";
  if (m.alpha) out << "alpha = " << fmt(*m.alpha) << "\n";
  if (!m.points.empty()) {
    out << "points = ";
    for (std::size_t i = 0; i < m.points.size(); ++i) {
      const PointSpec& p = m.points[i];
      out << (i ? ", " : "") << fmt(p.direction[0]) << " " << fmt(p.direction[1]) << " "
          << fmt(p.direction[2]) << " " << p.multiplicity;
    }
    out << "\n";
  }
  out << "\n[numerics]\n";
  out << "t_min = " << fmt(x.t_min) << "\n";
  out << "t_max = " << fmt(x.t_max) << "\n";
  out << "grid_points = " << x.grid_points << "\n";
  out << "grid_step = " << fmt(x.grid_step) << "\n";
  out << "step_tol = " << fmt(x.step_tol) << "\n";
  out << "shoot_tol = " << fmt(x.shoot_tol) << "\n";
  out << "tail_tol = " << fmt(x.tail_tol) << "\n";
  out << "mesh_level = " << x.mesh_level << "\n";
  out << "delta_schedule = ";
  if (x.delta_schedule.empty()) {
    out << "auto";
  } else {
    for (std::size_t i = 0; i < x.delta_schedule.size(); ++i) {
      out << (i ? ", " : "") << fmt(x.delta_schedule[i]);
    }
  }
  out << "\n";
  out << "sigma = " << fmt(x.sigma) << "\n";
  out << "iter_tol = " << fmt(x.iter_tol) << "\n";
  out << "pcg_tol = " << fmt(x.pcg_tol) << "\n";
  out << "\n[output]\n";
  out << "dir = " << cfg.output.dir << "\n";
  out << "deterministic = " << (cfg.output.deterministic ? "true" : "false") << "\n";
  return out.str();
}

ModelParams model_params(const ModelConfig& m) {
  const double lambda = m.lambda.value_or(1.0);
  double a = m.exponent();
  // g is usually written to 6-7 digits; snap onto the regime line when that close
  if (m.regime == Regime::TopologicalPlane && std::abs(a * m.N - 1.0) <= kConfigRegimeSnap) {
    a = 1.0 / m.N;
  } else if (m.regime == Regime::CompactSphere && std::abs(a * m.N - 2.0) <= 2.0 * kConfigRegimeSnap) {
    a = 2.0 / m.N;
  }
  ModelParams p = make_params_from_a(m.N, a, m.kappa, lambda, m.regime);
  if (m.regime == Regime::TopologicalPlane) p = with_topological_beta(p);
  return p;
}

void set_config_value(RunConfig& cfg, std::string_view key, double value) {
  if (key == "n") {
    if (value != std::floor(value)) invalid("n must be an integer");
    cfg.model.N = static_cast<int>(value);
    // topological sweeps over N follow the regime line aN = 1
    if (cfg.model.regime == Regime::TopologicalPlane) {
      cfg.model.G.reset();
      cfg.model.a = 1.0 / cfg.model.N;
    }
    return;
  }
  const auto& keys = schema();
  for (const char* section : {"model", "numerics"}) {
    const auto& sec = keys.at(section);
    const auto it = sec.find(std::string(key));
    if (it == sec.end() || key == "regime" || key == "points" || key == "delta_schedule") continue;
    const std::string text = fmt(value);
    it->second(cfg, Token{text, 0, 0});
    if (key == "g") cfg.model.a.reset();
    if (key == "a") cfg.model.G.reset();
    return;
  }
  invalid("cannot sweep over '" + std::string(key) + "'");
}

}  // namespace csh
