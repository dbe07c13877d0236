#include "chainsq/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

namespace chainsq {

namespace {

// ---------------------------------------------------------------- expressions

class Parser {
 public:
  Parser(const std::string& text, const std::map<std::string, double>& vars) : s_(text), vars_(vars) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail(fmt::format("unexpected '{}'", s_[pos_]));
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw DomainError(fmt::format("cannot evaluate \"{}\": {} at offset {}", s_, msg, pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double expr() {
    double v = term();
    for (;;) {
      if (eat('+'))
        v += term();
      else if (eat('-'))
        v -= term();
      else
        return v;
    }
  }
  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) {
        v *= unary();
      } else if (eat('/')) {
        const double d = unary();
        if (d == 0.0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }
  double power() {
    const double base = primary();
    if (eat('^')) return std::pow(base, unary());  // right associative
    return base;
  }
  double primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (eat('(')) {
        const double a = expr();
        if (!eat(')')) fail("missing ')'");
        if (name == "sqrt") return std::sqrt(a);
        if (name == "sin") return std::sin(a);
        if (name == "cos") return std::cos(a);
        if (name == "abs") return std::abs(a);
        if (name == "exp") return std::exp(a);
        if (name == "log") return std::log(a);
        fail(fmt::format("unknown function '{}'", name));
      }
      if (name == "pi") return kPi;
      const auto it = vars_.find(name);
      if (it == vars_.end()) fail(fmt::format("unknown variable '{}'", name));
      return it->second;
    }
    fail(fmt::format("unexpected '{}'", c));
  }

  const std::string& s_;
  const std::map<std::string, double>& vars_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------- raw document

using Raw = std::map<std::string, std::string>;  // "section.key" -> text

const std::vector<std::pair<std::string, std::vector<std::string>>> kSchema = {
    {"chain", {"N", "J", "Omega", "phi", "phi0", "boundary"}},
    {"scan", {"phi_min", "phi_max", "points", "grid", "model", "theta", "varphi"}},
    {"search",
     {"per_decade", "decades", "refine_points", "relative_resolution", "t_max_factor", "t_max", "krylov_dim", "krylov_tol",
      "full_max_sites", "evolve_t_end", "evolve_samples"}},
    {"output", {"dir", "prefix"}},
};

std::string strip_quotes(std::string v) {
  const auto b = v.find_first_not_of(" \t");
  const auto e = v.find_last_not_of(" \t");
  v = b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    v = v.substr(1, v.size() - 2);
  return v;
}

// `key = value ; note` and `key = value # note`; the marker must follow
// whitespace and sit outside quotes.
std::string strip_inline_comment(const std::string& v) {
  char quote = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const char c = v[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if ((c == ';' || c == '#') && i > 0 && (v[i - 1] == ' ' || v[i - 1] == '\t')) {
      return v.substr(0, i);
    }
  }
  return v;
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

bool known_key(const std::string& section, const std::string& key) {
  for (const auto& [sec, keys] : kSchema)
    if (sec == section) return std::find(keys.begin(), keys.end(), key) != keys.end();
  return false;
}

Raw read_document(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", fmt::format("malformed configuration (line {}): {}", e.line(), e.message()));
  }
  Raw raw;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of any section");
    if (section == "manifest") continue;  // informational on re-read
    const bool section_known =
        std::any_of(kSchema.begin(), kSchema.end(), [&](const auto& s) { return s.first == section; });
    if (!section_known) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body) {
      if (!known_key(section, key)) throw ConfigError(section + "." + key, "unknown key");
      raw[section + "." + key] = strip_quotes(strip_inline_comment(value.data()));
    }
  }
  return raw;
}

// ---------------------------------------------------------------- resolution

class Resolver {
 public:
  explicit Resolver(const Raw& raw) : raw_(raw) {}

  std::optional<std::string> text(const std::string& key) const {
    const auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    return it->second;
  }

  double number(const std::string& key, double fallback) const {
    const auto t = text(key);
    if (!t) return fallback;
    try {
      const double v = evaluate_expression(*t, vars_);
      if (!std::isfinite(v)) throw DomainError("value is not finite");
      return v;
    } catch (const DomainError& e) {
      throw ConfigError(key, e.what());
    }
  }

  int integer(const std::string& key, int fallback) const {
    const double v = number(key, fallback);
    if (v != std::round(v) || std::abs(v) > 1e9) throw ConfigError(key, fmt::format("expected an integer, got {}", v));
    return static_cast<int>(v);
  }

  template <class E>
  E choice(const std::string& key, E fallback, std::initializer_list<std::pair<const char*, E>> options) const {
    const auto t = text(key);
    if (!t) return fallback;
    std::string allowed;
    for (const auto& [name, value] : options) {
      if (*t == name) return value;
      allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(key, fmt::format("'{}' is not one of {{{}}}", *t, allowed));
  }

  void define(const std::string& name, double v) { vars_[name] = v; }

 private:
  const Raw& raw_;
  std::map<std::string, double> vars_;
};

void require(bool cond, const std::string& key, const std::string& msg) {
  if (!cond) throw ConfigError(key, msg);
}

const char* boundary_name(Boundary b) { return b == Boundary::Open ? "open" : "periodic"; }
const char* grid_name(GridKind g) { return g == GridKind::Uniform ? "uniform" : "commensurate"; }
const char* model_name(ModelSelector m) {
  switch (m) {
    case ModelSelector::Effective:
      return "effective";
    case ModelSelector::Full:
      return "full";
    default:
      return "both";
  }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string emit_body(const RunManifest& m) {
  std::string out;
  out += "[chain]\n";
  out += fmt::format("N = {}\nJ = {}\nOmega = {}\nphi = {}\nphi0 = {}\nboundary = {}\n", m.chain.n_sites, num(m.chain.j_se),
                     num(m.chain.omega), num(m.chain.phi), num(m.chain.phi0), boundary_name(m.chain.boundary));
  out += "\n[scan]\n";
  out += fmt::format("phi_min = {}\nphi_max = {}\npoints = {}\ngrid = {}\nmodel = {}\ntheta = {}\nvarphi = {}\n",
                     num(m.scan.phi_min), num(m.scan.phi_max), m.scan.points, grid_name(m.scan.grid),
                     model_name(m.scan.model), num(m.scan.theta), num(m.scan.varphi));
  const auto& s = m.search;
  out += "\n[search]\n";
  out += fmt::format(
      "per_decade = {}\ndecades = {}\nrefine_points = {}\nrelative_resolution = {}\nt_max_factor = {}\nt_max = {}\n"
      "krylov_dim = {}\nkrylov_tol = {}\nfull_max_sites = {}\nevolve_t_end = {}\nevolve_samples = {}\n",
      s.per_decade, s.decades, s.refine_points, num(s.relative_resolution), num(s.t_max_factor), num(s.t_max), s.krylov_dim,
      num(s.krylov_tol), s.full_max_sites, num(s.evolve_t_end), s.evolve_samples);
  out += "\n[output]\n";
  out += fmt::format("dir = \"{}\"\nprefix = \"{}\"\n", m.output.dir, m.output.prefix);
  return out;
}

}  // namespace

double evaluate_expression(const std::string& text, const std::map<std::string, double>& variables) {
  return Parser(text, variables).parse();
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& config_schema() { return kSchema; }

RunManifest parse_config(const std::string& text, const EnvLookup& env) {
  Raw raw = read_document(text);
  if (env) {
    for (const auto& [section, keys] : kSchema)
      for (const auto& key : keys)
        if (auto v = env(std::string(kEnvPrefix) + upper(section) + "_" + upper(key))) raw[section + "." + key] = strip_quotes(*v);
  }

  Resolver r(raw);
  RunManifest m;

  // chain: N first, then J, then everything that may reference them
  const int n = r.integer("chain.N", 8);
  require(n >= 4 && n % 2 == 0, "chain.N", fmt::format("N = {} must be even and >= 4", n));
  require(n <= kMaxSites, "chain.N", fmt::format("N must be <= {}", kMaxSites));
  r.define("N", n);
  const double j = r.number("chain.J", 1.0);
  require(j != 0.0, "chain.J", "J must be nonzero");
  r.define("J", j);
  r.define("E1", std::abs(j) * std::abs(std::cos(kPi / n) - 1.0));
  const double omega = r.text("chain.Omega") ? r.number("chain.Omega", 0.0) : std::abs(j) * std::abs(std::cos(kPi / n) - 1.0) / 10.0;
  require(omega >= 0.0, "chain.Omega", "Omega must be non-negative");
  const double phi = r.text("chain.phi") ? r.number("chain.phi", 0.0) : kPi - 2.0 * kPi / n;
  require(phi > 0.0 && phi < 2.0 * kPi, "chain.phi", fmt::format("phi = {} outside (0, 2 pi)", phi));
  require(!(omega > 0.0 && is_trivial_phase(phi)), "chain.phi", "trivial phase with Omega > 0");
  r.define("phi", phi);
  const double phi0 = r.number("chain.phi0", default_phi0(n, phi));
  const Boundary boundary = r.choice("chain.boundary", Boundary::Open, {{"open", Boundary::Open}, {"periodic", Boundary::Periodic}});
  try {
    m.chain = ChainConfig::make(n, j, omega, phi, phi0, boundary);
  } catch (const DomainError& e) {
    throw ConfigError("chain", e.what());
  }

  auto& sc = m.scan;
  sc.phi_min = r.number("scan.phi_min", sc.phi_min);
  sc.phi_max = r.number("scan.phi_max", sc.phi_max);
  require(sc.phi_min >= 0.0 && sc.phi_max <= 2.0 * kPi && sc.phi_max > sc.phi_min, "scan.phi_max",
          "need 0 <= phi_min < phi_max <= 2 pi");
  sc.points = r.integer("scan.points", sc.points);
  require(sc.points >= 1, "scan.points", "points must be >= 1");
  sc.grid = r.choice("scan.grid", sc.grid, {{"uniform", GridKind::Uniform}, {"commensurate", GridKind::Commensurate}});
  sc.model = r.choice("scan.model", sc.model,
                      {{"effective", ModelSelector::Effective}, {"full", ModelSelector::Full}, {"both", ModelSelector::Both}});
  sc.theta = r.number("scan.theta", sc.theta);
  require(sc.theta >= 0.0 && sc.theta <= kPi, "scan.theta", "theta outside [0, pi]");
  sc.varphi = r.number("scan.varphi", sc.varphi);
  require(sc.varphi >= 0.0 && sc.varphi < 2.0 * kPi, "scan.varphi", "varphi outside [0, 2 pi)");

  auto& se = m.search;
  se.per_decade = r.integer("search.per_decade", se.per_decade);
  require(se.per_decade >= 1, "search.per_decade", "must be >= 1");
  se.decades = r.integer("search.decades", se.decades);
  require(se.decades >= 1, "search.decades", "must be >= 1");
  se.refine_points = r.integer("search.refine_points", se.refine_points);
  require(se.refine_points >= 3, "search.refine_points", "must be >= 3");
  se.relative_resolution = r.number("search.relative_resolution", se.relative_resolution);
  require(se.relative_resolution > 0.0 && se.relative_resolution < 1.0, "search.relative_resolution", "must be in (0, 1)");
  se.t_max_factor = r.number("search.t_max_factor", se.t_max_factor);
  require(se.t_max_factor > 0.0, "search.t_max_factor", "must be positive");
  se.t_max = r.number("search.t_max", se.t_max);
  require(se.t_max >= 0.0, "search.t_max", "must be >= 0 (0 selects automatic sizing)");
  se.krylov_dim = r.integer("search.krylov_dim", se.krylov_dim);
  require(se.krylov_dim >= 2, "search.krylov_dim", "must be >= 2");
  se.krylov_tol = r.number("search.krylov_tol", se.krylov_tol);
  require(se.krylov_tol > 0.0, "search.krylov_tol", "must be positive");
  se.full_max_sites = r.integer("search.full_max_sites", se.full_max_sites);
  require(se.full_max_sites >= 4 && se.full_max_sites <= 16, "search.full_max_sites", "must be in [4, 16]");
  se.evolve_t_end = r.number("search.evolve_t_end", se.evolve_t_end);
  require(se.evolve_t_end >= 0.0, "search.evolve_t_end", "must be >= 0");
  se.evolve_samples = r.integer("search.evolve_samples", se.evolve_samples);
  require(se.evolve_samples >= 2, "search.evolve_samples", "must be >= 2");

  if (auto d = r.text("output.dir")) m.output.dir = *d;
  require(!m.output.dir.empty(), "output.dir", "must not be empty");
  if (auto p = r.text("output.prefix")) m.output.prefix = *p;
  return m;
}

RunManifest load_config(const std::string& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", fmt::format("cannot open configuration file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), env);
}

std::string manifest_hash(const RunManifest& manifest) { return sha256_hex(emit_body(manifest)); }

std::string emit_manifest(const RunManifest& manifest, const std::string& command) {
  std::string out = emit_body(manifest);
  out += "\n[manifest]\n";
  out += fmt::format("version = {}\n", manifest.version);
  if (!command.empty()) out += fmt::format("command = {}\n", command);
  out += fmt::format("sha256 = {}\n", manifest_hash(manifest));
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

SearchOptions RunManifest::search_options() const {
  SearchOptions o;
  o.per_decade = search.per_decade;
  o.decades = search.decades;
  o.refine_points = search.refine_points;
  o.relative_resolution = search.relative_resolution;
  o.t_max_factor = search.t_max_factor;
  o.full_chain_max_sites = search.full_max_sites;
  o.krylov.subspace_dim = search.krylov_dim;
  o.krylov.tolerance = search.krylov_tol;
  return o;
}

InitialState RunManifest::initial_state() const { return {scan.theta, scan.varphi}; }

std::vector<double> RunManifest::phi_grid() const {
  if (scan.grid == GridKind::Uniform) return linspace_open(scan.phi_min, scan.phi_max, scan.points);
  std::vector<double> g;
  const int n = chain.n_sites;
  for (int k = 1; k < n; ++k) {
    const double phi = 2.0 * kPi * k / n;
    if (phi >= scan.phi_min - 1e-12 && phi <= scan.phi_max + 1e-12) g.push_back(phi);
  }
  if (g.empty()) throw ConfigError("scan.phi_min", "no commensurate phase inside [phi_min, phi_max]");
  return g;
}

}  // namespace chainsq
