#include "observer/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace observer {

namespace {

const char* kSec5Common = R"(# unit square, Neumann, the section-5 error-dynamics scenario
dim = 2
lengths = 1, 1
bc = neumann
nu = 0.1
ell = 2
cover_r = 0.25
aux_kind = sin2
nodes_per_dim = 33
dt = 1e-4
t_end = 15
a = -2 + x1 - abs(sin(t + x1))
b1 = x1 + x2
b2 = cos(t)*x1*x2
a_tilde = -1
r_exp = 4
b_tilde1 = 1
b_tilde2 = -2
s_exp = 1
f = 0
z0 = 2 - x1*x2
mode = error
output_stride = 100
fit_start = 3
)";

std::string preset_with(const std::string& extra) {
  return std::string(kSec5Common) + extra;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_real(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (...) {
  }
  throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_real(key, v);
  const int i = static_cast<int>(std::llround(x));
  if (x != i) throw ConfigError("config: key '" + key + "' expects an integer");
  return i;
}

Expr to_expr(const std::string& key, const std::string& v) {
  try {
    return Expr::parse(v);
  } catch (const ParseError& e) {
    throw ConfigError("config: key '" + key + "': " + e.what());
  }
}

}  // namespace

const std::map<std::string, std::string>& builtin_presets() {
  static const std::map<std::string, std::string> presets = {
      {"paper-sec5-4sensors", preset_with("sensors_S = 2\nlambda = 0.02\n")},
      {"paper-sec5-9sensors", preset_with("sensors_S = 3\nlambda = 0.02\n")},
      {"paper-sec5-16sensors", preset_with("sensors_S = 4\nlambda = 0.02\n")},
      {"free-dynamics", preset_with("sensors_S = 2\nlambda = 0\n")},
  };
  return presets;
}

ScenarioConfig parse_config_text(const std::string& text) {
  static const std::set<std::string> known = {
      "dim", "lengths", "bc", "nu", "ell", "sensors_S", "lambda", "cover_r",
      "aux_kind", "nodes_per_dim", "dt", "t_end", "a", "b1", "b2", "a_tilde",
      "b_tilde1", "b_tilde2", "r_exp", "s_exp", "f", "z0", "y0", "yhat0",
      "mode", "output_stride", "fit_start"};

  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!known.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (kv.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = val;
  }

  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("config: missing key '" + key + "'");
    return it->second;
  };

  ScenarioConfig cfg;
  cfg.dim = to_int("dim", need("dim"));
  if (cfg.dim != 1 && cfg.dim != 2) throw ConfigError("config: dim must be 1 or 2");

  cfg.lengths.clear();
  for (const auto& part : split_csv(need("lengths")))
    cfg.lengths.push_back(to_real("lengths", part));
  if (static_cast<int>(cfg.lengths.size()) != cfg.dim)
    throw ConfigError("config: lengths must list dim entries");

  const std::string bc = trim(need("bc"));
  if (bc == "neumann") cfg.bc = BoundaryCondition::Neumann;
  else if (bc == "dirichlet") cfg.bc = BoundaryCondition::Dirichlet;
  else throw ConfigError("config: bc must be neumann or dirichlet");

  cfg.nu = to_real("nu", need("nu"));
  cfg.ell = to_real("ell", need("ell"));
  cfg.sensors_S = to_int("sensors_S", need("sensors_S"));
  cfg.lambda = to_real("lambda", need("lambda"));
  cfg.cover_r = to_real("cover_r", need("cover_r"));

  const std::string aux = trim(need("aux_kind"));
  if (aux == "sin2") cfg.aux_kind = AuxKind::Sin2;
  else if (aux == "eigenfunctions") cfg.aux_kind = AuxKind::Eigenfunctions;
  else if (aux == "inva2") cfg.aux_kind = AuxKind::InvA2Indicators;
  else throw ConfigError("config: aux_kind must be sin2, eigenfunctions or inva2");

  cfg.nodes_per_dim = to_int("nodes_per_dim", need("nodes_per_dim"));
  cfg.dt = to_real("dt", need("dt"));
  cfg.t_end = to_real("t_end", need("t_end"));
  cfg.output_stride = to_int("output_stride", need("output_stride"));
  cfg.fit_start = to_real("fit_start", need("fit_start"));

  const std::string mode = trim(need("mode"));
  if (mode == "error") cfg.mode = RunMode::Error;
  else if (mode == "coupled") cfg.mode = RunMode::Coupled;
  else throw ConfigError("config: mode must be error or coupled");

  cfg.a_src = need("a");
  cfg.coeffs.a = to_expr("a", cfg.a_src);
  cfg.b1_src = need("b1");
  cfg.coeffs.b[0] = to_expr("b1", cfg.b1_src);
  cfg.a_tilde_src = need("a_tilde");
  cfg.coeffs.a_tilde = to_expr("a_tilde", cfg.a_tilde_src);
  cfg.b_tilde1_src = need("b_tilde1");
  cfg.coeffs.b_tilde[0] = to_expr("b_tilde1", cfg.b_tilde1_src);
  cfg.f_src = need("f");
  cfg.coeffs.f = to_expr("f", cfg.f_src);
  cfg.coeffs.r_exp = to_real("r_exp", need("r_exp"));
  cfg.coeffs.s_exp = to_real("s_exp", need("s_exp"));
  if (cfg.dim == 2) {
    cfg.b2_src = need("b2");
    cfg.coeffs.b[1] = to_expr("b2", cfg.b2_src);
    cfg.b_tilde2_src = need("b_tilde2");
    cfg.coeffs.b_tilde[1] = to_expr("b_tilde2", cfg.b_tilde2_src);
  } else {
    if (kv.count("b2") || kv.count("b_tilde2"))
      throw ConfigError("config: b2/b_tilde2 are only valid for dim = 2");
  }

  if (cfg.mode == RunMode::Error) {
    cfg.z0_src = need("z0");
    to_expr("z0", cfg.z0_src);
    if (kv.count("y0") || kv.count("yhat0"))
      throw ConfigError("config: y0/yhat0 belong to coupled mode");
  } else {
    cfg.y0_src = need("y0");
    cfg.yhat0_src = need("yhat0");
    to_expr("y0", cfg.y0_src);
    to_expr("yhat0", cfg.yhat0_src);
    if (kv.count("z0")) throw ConfigError("config: z0 belongs to error mode");
  }

  // Dimension guard on the expressions.
  if (cfg.dim == 1) {
    for (const auto* src :
         {&cfg.a_src, &cfg.b1_src, &cfg.a_tilde_src, &cfg.b_tilde1_src, &cfg.f_src,
          &cfg.z0_src, &cfg.y0_src, &cfg.yhat0_src})
      if (!src->empty() && Expr::parse(*src).uses_x2())
        throw ConfigError("config: x2 used in a dim = 1 scenario");
  }

  if (!(cfg.nu > 0) || !(cfg.dt > 0) || !(cfg.t_end > 0) || cfg.sensors_S < 1 ||
      cfg.nodes_per_dim < 3 || cfg.output_stride < 1 || cfg.lambda < 0 ||
      !(cfg.cover_r > 0 && cfg.cover_r < 1) || cfg.ell < 0 || cfg.ell > 2 ||
      !(cfg.coeffs.r_exp > 1) || !(cfg.coeffs.s_exp >= 1) || cfg.fit_start < 0)
    throw ConfigError("config: a numeric field violates its admissible range");

  // Sampled boundedness check of the coefficient expressions on
  // Omega x [0, t_end].
  for (const auto& [key, src] :
       std::initializer_list<std::pair<const char*, const std::string*>>{
           {"a", &cfg.a_src}, {"b1", &cfg.b1_src}, {"b2", &cfg.b2_src},
           {"a_tilde", &cfg.a_tilde_src}, {"b_tilde1", &cfg.b_tilde1_src},
           {"b_tilde2", &cfg.b_tilde2_src}, {"f", &cfg.f_src}, {"z0", &cfg.z0_src},
           {"y0", &cfg.y0_src}, {"yhat0", &cfg.yhat0_src}}) {
    if (src->empty()) continue;
    const Expr e = Expr::parse(*src);
    for (int it = 0; it <= 4; ++it)
      for (int ix = 0; ix <= 4; ++ix)
        for (int iy = 0; iy <= 4; ++iy) {
          const double x1 = cfg.lengths[0] * ix / 4.0;
          const double x2 = cfg.dim == 2 ? cfg.lengths[1] * iy / 4.0 : 0.0;
          const double v = e(x1, x2, cfg.t_end * it / 4.0);
          if (!std::isfinite(v))
            throw ConfigError(std::string("config: expression '") + key +
                              "' is unbounded on the space-time sample grid");
        }
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::string name = path;
  if (name.rfind("preset:", 0) == 0) name = name.substr(7);
  const auto& presets = builtin_presets();
  if (auto it = presets.find(name); it != presets.end())
    return parse_config_text(it->second);

  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace observer
