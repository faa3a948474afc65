#include "mvcontract/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace mvcontract {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

double parse_factor(std::string_view tok, std::string_view whole) {
  tok = trim(tok);
  if (tok == "pi") return std::numbers::pi;
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (tok.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("cannot parse number '" + std::string(whole) + "'");
  }
  return v;
}

template <class T>
T parse_unsigned(std::string_view text) {
  text = trim(text);
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError("cannot parse integer '" + std::string(text) + "'");
  }
  return v;
}

using Setter = std::function<void(RunConfig&, std::string_view)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  std::string_view key;
  std::string_view comment;
  Setter set;
  Getter get;
};

Field scalar(std::string_view key, std::string_view comment, double RunConfig::*outer, double LqParams::*inner) {
  return {key, comment,
          [outer, inner](RunConfig& c, std::string_view v) {
            if (inner) c.params.*inner = parse_scalar(v);
            else c.*outer = parse_scalar(v);
          },
          [outer, inner](const RunConfig& c) { return format_double(inner ? c.params.*inner : c.*outer); }};
}

Field param(std::string_view key, std::string_view comment, double LqParams::*member) {
  return scalar(key, comment, nullptr, member);
}

Field plain(std::string_view key, std::string_view comment, double RunConfig::*member) {
  return scalar(key, comment, member, nullptr);
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      param("a", "output drift coefficient [1/time]", &LqParams::a),
      param("b", "effort gain [dimensionless]", &LqParams::b),
      param("sigma", "output volatility [1/sqrt(time)], > 0", &LqParams::sigma),
      param("alpha", "agent bonus factor, > 0", &LqParams::alpha),
      param("beta", "principal bonus factor, > 0", &LqParams::beta),
      param("T", "horizon [time], > 0", &LqParams::T),
      param("W0", "participation bound on J_A [cost units]", &LqParams::W0),
      param("R0", "bound on Var(x(T)), > 0", &LqParams::R0),
      {"case", "transversality case: i | ii | iii | iv | v | explicit",
       [](RunConfig& c, std::string_view v) {
         try {
           c.case_tag = parse_case(trim(v));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return std::string(to_string(c.case_tag)); }},
      {"lambda_P", "principal multiplier(s), list", [](RunConfig& c, std::string_view v) { c.lambda_P = parse_list(v); },
       [](const RunConfig& c) { return format_list(c.lambda_P); }},
      {"theta", "angle(s) [rad] for cases iii/iv, list; empty otherwise",
       [](RunConfig& c, std::string_view v) { c.theta = trim(v).empty() ? std::vector<double>{} : parse_list(v); },
       [](const RunConfig& c) { return format_list(c.theta); }},
      {"lambda_E", "explicit case only; empty otherwise",
       [](RunConfig& c, std::string_view v) {
         c.lambda_E = trim(v).empty() ? std::nullopt : std::optional<double>(parse_scalar(v));
       },
       [](const RunConfig& c) { return c.lambda_E ? format_double(*c.lambda_E) : std::string(); }},
      {"lambda_V", "explicit case only; empty otherwise",
       [](RunConfig& c, std::string_view v) {
         c.lambda_V = trim(v).empty() ? std::nullopt : std::optional<double>(parse_scalar(v));
       },
       [](const RunConfig& c) { return c.lambda_V ? format_double(*c.lambda_V) : std::string(); }},
      {"n_paths", "Monte-Carlo paths per point",
       [](RunConfig& c, std::string_view v) { c.n_paths = parse_unsigned<std::size_t>(v); },
       [](const RunConfig& c) { return std::to_string(c.n_paths); }},
      {"n_steps", "time steps on [0, T], >= 2",
       [](RunConfig& c, std::string_view v) { c.n_steps = parse_unsigned<std::size_t>(v); },
       [](const RunConfig& c) { return std::to_string(c.n_steps); }},
      {"seed", "64-bit RNG seed", [](RunConfig& c, std::string_view v) { c.seed = parse_unsigned<std::uint64_t>(v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"p2_drift_mode", "as_printed | eta_equals_x",
       [](RunConfig& c, std::string_view v) {
         try {
           c.p2_mode = parse_p2_drift_mode(trim(v));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       },
       [](const RunConfig& c) { return std::string(to_string(c.p2_mode)); }},
      {"out_dir", "output directory", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(trim(v)); },
       [](const RunConfig& c) { return c.out_dir; }},
      {"workers", "worker threads, 0 = all cores",
       [](RunConfig& c, std::string_view v) { c.workers = parse_unsigned<unsigned>(v); },
       [](const RunConfig& c) { return std::to_string(c.workers); }},
      plain("residual_tol", "max ansatz drift residual accepted by check", &RunConfig::residual_tol),
      {"feasibility_tol", "boundary band for constraints; empty = 1e-3*R0",
       [](RunConfig& c, std::string_view v) {
         c.feasibility_tol = trim(v).empty() ? std::nullopt : std::optional<double>(parse_scalar(v));
       },
       [](const RunConfig& c) { return c.feasibility_tol ? format_double(*c.feasibility_tol) : std::string(); }},
      plain("blowup_bound", "coefficient magnitude treated as Riccati blow-up", &RunConfig::blowup_bound),
      {"check_paths", "paths used by the residual oracle in check",
       [](RunConfig& c, std::string_view v) { c.check_paths = parse_unsigned<std::size_t>(v); },
       [](const RunConfig& c) { return std::to_string(c.check_paths); }},
      {"weak_thetas", "constant f/sigma values for the weak-formulation checks",
       [](RunConfig& c, std::string_view v) {
         c.weak_thetas = trim(v).empty() ? std::vector<double>{} : parse_list(v);
       },
       [](const RunConfig& c) { return format_list(c.weak_thetas); }},
      plain("weak_effort", "constant effort of the hidden-action FOC instance", &RunConfig::weak_effort),
      plain("weak_cashflow", "constant cash-flow of the hidden-action FOC instance", &RunConfig::weak_cashflow),
      {"coefficients_file", "riccati.csv to verify instead of integrating; empty = integrate",
       [](RunConfig& c, std::string_view v) { c.coefficients_file = std::string(trim(v)); },
       [](const RunConfig& c) { return c.coefficients_file; }},
  };
  return table;
}

const Field& field_for(std::string_view key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

double parse_scalar(std::string_view text) {
  std::string_view s = trim(text);
  double sign = 1.0;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    // A leading sign belongs to the whole product unless it is part of a number.
    if (s.size() > 1 && trim(s.substr(1)).rfind("pi", 0) == 0) {
      sign = s.front() == '-' ? -1.0 : 1.0;
      s = trim(s.substr(1));
    }
  }
  if (s.empty()) throw ConfigError("empty number");
  double value = 1.0;
  char op = '*';
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    // Skip exponent signs such as 1e-3.
    if (i < s.size() && s[i] != '*' && s[i] != '/') continue;
    const double f = parse_factor(s.substr(start, i - start), text);
    value = op == '*' ? value * f : value / f;
    if (i < s.size()) op = s[i];
    start = i + 1;
  }
  return sign * value;
}

std::vector<double> parse_list(std::string_view text) {
  std::string_view s = trim(text);
  if (s.rfind("linspace(", 0) == 0) {
    if (s.back() != ')') throw ConfigError("linspace: missing ')'");
    const auto args = parse_list(s.substr(9, s.size() - 10));
    if (args.size() != 3) throw ConfigError("linspace needs (start, stop, count)");
    const double count = args[2];
    if (!(count >= 1.0) || count != std::floor(count)) throw ConfigError("linspace: bad count");
    const auto n = static_cast<std::size_t>(count);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = n == 1 ? args[0] : args[0] + (args[1] - args[0]) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    if (n > 1) out.back() = args[1];
    return out;
  }
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_scalar(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  field_for(trim(key)).set(config, value);
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += std::string(f.key) + " = " + f.get(config) + "  # " + std::string(f.comment) + "\n";
  }
  return out;
}

void RunConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n_steps < 2) throw ConfigError("n_steps must be at least 2");
  if (n_paths < 2) throw ConfigError("n_paths must be at least 2");
  if (check_paths < 2) throw ConfigError("check_paths must be at least 2");
  if (!(residual_tol > 0.0)) throw ConfigError("residual_tol must be positive");
  if (!(blowup_bound > 0.0)) throw ConfigError("blowup_bound must be positive");
  if (feasibility_tol && !(*feasibility_tol >= 0.0)) throw ConfigError("feasibility_tol must be nonnegative");
  if (lambda_P.empty()) throw ConfigError("lambda_P list is empty");
  for (double lp : lambda_P) {
    if (!(lp >= kLambdaMin)) {
      throw ConfigError("lambda_P = " + format_double(lp) + " is below the floor " + format_double(kLambdaMin));
    }
    if (!(lp <= 1.0)) throw ConfigError("lambda_P must not exceed 1");
  }
  for (double th : weak_thetas) {
    if (!std::isfinite(th)) throw ConfigError("weak_thetas must be finite");
  }
  if (case_tag == TransversalityCase::explicit_triple) {
    if (!lambda_E || !lambda_V) throw ConfigError("explicit case needs lambda_E and lambda_V");
    if (lambda_P.size() != 1) throw ConfigError("explicit case takes a single lambda_P");
    if (!theta.empty()) throw ConfigError("explicit case takes no theta");
  } else if (lambda_E || lambda_V) {
    throw ConfigError("lambda_E/lambda_V are only accepted with case = explicit");
  }
  try {
    (void)multipliers();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<MultiplierTriple> RunConfig::multipliers() const {
  if (case_tag == TransversalityCase::explicit_triple) {
    return {explicit_multipliers(lambda_P.at(0), lambda_E.value_or(0.0), lambda_V.value_or(0.0))};
  }
  return sweep_grid(case_tag, lambda_P, theta);
}

}  // namespace mvcontract
