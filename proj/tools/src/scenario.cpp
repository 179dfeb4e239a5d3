#include "kolmo/verify/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace kolmo::verify {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ScenarioError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  long x = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end)
    throw ScenarioError("key '" + key + "': expected an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end)
    throw ScenarioError("key '" + key + "': expected an unsigned integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ScenarioError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) out.push_back(to_double(key, s));
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f,
                 const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += f(v[i]);
  }
  return out;
}

std::vector<DecayProbeConfig> parse_probes(const std::string& key, const std::string& v) {
  std::vector<DecayProbeConfig> out;
  for (const auto& item : split(v, ';')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3)
      throw ScenarioError("key '" + key + "': probe '" + item + "' is not j:alpha:beta");
    DecayProbeConfig c;
    c.j = static_cast<int>(to_long(key, parts[0]));
    c.alpha = to_double(key, parts[1]);
    for (const auto& b : split(parts[2], ',')) c.beta.push_back(static_cast<int>(to_long(key, b)));
    out.push_back(c);
  }
  return out;
}

std::string probes_text(const std::vector<DecayProbeConfig>& probes) {
  return join<DecayProbeConfig>(
      probes,
      [](const DecayProbeConfig& c) {
        return std::to_string(c.j) + ":" + fmt(c.alpha) + ":" +
               join<int>(c.beta, [](const int& b) { return std::to_string(b); });
      },
      ";");
}

}  // namespace

std::vector<DecayProbeConfig> default_probes(const ChainParams& params) {
  const int n = params.n;
  std::vector<DecayProbeConfig> out;
  auto unit = [n](int i, int order) {
    std::vector<int> b(n, 0);
    b[i - 1] = order;
    return b;
  };
  out.push_back({n, 0.0, unit(n, 1)});
  out.push_back({n, 0.0, unit(n, 2)});
  out.push_back({n - 1, 0.0, unit(n - 1, 1)});
  out.push_back({1, 2.0 / 3.0, std::vector<int>(n, 0)});
  out.push_back({n, 1.0, std::vector<int>(n, 0)});
  return out;
}

DiffusionProfile Scenario::diffusion() const {
  if (profile == "constant") return DiffusionProfile::constant(params.d, profile_a);
  if (profile == "smooth_periodic") return DiffusionProfile::smooth_periodic(params.d, profile_kappa);
  if (profile == "piecewise_constant") {
    std::vector<Eigen::MatrixXd> vals;
    for (double v : profile_values)
      vals.push_back(v * Eigen::MatrixXd::Identity(params.d, params.d));
    return DiffusionProfile::piecewise_constant(profile_breaks, vals);
  }
  throw ScenarioError("unknown profile '" + profile + "'");
}

EnsembleSpec Scenario::ensemble() const {
  EnsembleSpec e;
  e.params = params;
  e.half_lengths = half_lengths;
  e.points = points;
  e.cutoffs.assign(params.n, cutoff);
  e.windows.assign(params.n, window);
  e.dt = dt;
  e.lead_steps = lead_steps;
  e.knot_spacing = knot_spacing;
  e.knots = knots;
  e.seed = seed;
  return e;
}

double Scenario::refinement() const {
  return refine_factor > 0.0 ? refine_factor : default_refinement_factor(params);
}

std::map<std::string, std::string> Scenario::to_map() const {
  auto num = [](double x) { return fmt(x); };
  auto dl = [](const std::vector<double>& v) {
    return join<double>(v, [](const double& x) { return fmt(x); });
  };
  std::map<std::string, std::string> m;
  m["format"] = kScenarioFormat;
  m["name"] = name;
  m["n"] = std::to_string(params.n);
  m["d"] = std::to_string(params.d);
  m["kappa"] = num(params.kappa);
  m["profile"] = profile;
  m["profile.a"] = num(profile_a);
  m["profile.kappa"] = num(profile_kappa);
  m["profile.breaks"] = dl(profile_breaks);
  m["profile.values"] = dl(profile_values);
  m["seed"] = std::to_string(seed);
  m["suites"] = join<std::string>(suites, [](const std::string& s) { return s; });
  m["refine"] = refine ? "true" : "false";
  m["refine.factor"] = num(refine_factor);
  m["output.fields"] = fields ? "true" : "false";
  m["grid.half_length"] = dl(half_lengths);
  m["grid.points"] = join<int>(points, [](const int& p) { return std::to_string(p); });
  m["ensemble.members"] = std::to_string(members);
  m["ensemble.cutoff"] = num(cutoff);
  m["ensemble.window"] = num(window);
  m["ensemble.dt"] = num(dt);
  m["ensemble.lead_steps"] = std::to_string(lead_steps);
  m["ensemble.knot_spacing"] = std::to_string(knot_spacing);
  m["ensemble.knots"] = std::to_string(knots);
  m["kernel.fit_samples"] = std::to_string(fit_samples);
  m["kernel.probe_points"] = std::to_string(probe_points);
  m["kernel.probe_t_min"] = num(probe_t_min);
  m["kernel.probe_t_max"] = num(probe_t_max);
  m["kernel.probes"] = probes_text(probes);
  m["transport.alphas"] = dl(transport_alphas);
  m["transport.lambda"] = num(transport_lambda);
  m["maxreg.lambda"] = num(maxreg_lambda);
  m["maxreg.monotonicity_lambda"] = num(monotonicity_lambda);
  m["maxreg.negative_control"] = negative_control ? "true" : "false";
  m["maxreg.negative_factor"] = num(negative_factor);
  m["maxreg.residual_dt"] = num(residual_dt);
  m["maxreg.scaling_radius"] = num(scaling_radius);
  m["geometry.triples"] = std::to_string(triples);
  m["geometry.pairs"] = std::to_string(pairs);
  m["geometry.boundary_samples"] = std::to_string(boundary_samples);
  m["geometry.sandwich_samples"] = std::to_string(sandwich_samples);
  m["geometry.mc_samples"] = std::to_string(mc_samples);
  m["geometry.fs_members"] = std::to_string(fs_members);
  m["geometry.fs_points"] = std::to_string(fs_points);
  m["geometry.fs_steps"] = std::to_string(fs_steps);
  m["geometry.fs_p"] = num(fs_p);
  m["geometry.fs_refine"] = fs_refine ? "true" : "false";
  m["tolerance.exponent"] = num(tol.exponent);
  m["tolerance.drift"] = num(tol.drift);
  m["tolerance.residual"] = num(tol.residual);
  m["tolerance.identity"] = num(tol.identity);
  m["tolerance.mc_volume"] = num(tol.mc_volume);
  m["tolerance.fs_drift"] = num(tol.fs_drift);
  m["tolerance.interpolation"] = num(tol.interpolation);
  m["tolerance.duality"] = num(tol.duality);
  return m;
}

std::string Scenario::to_text() const {
  std::string out;
  for (const auto& [k, v] : to_map()) out += k + " = " + v + "\n";
  return out;
}

Scenario parse_scenario(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ScenarioError("line " + std::to_string(lineno) + ": empty key");
    if (kv.count(key)) throw ScenarioError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }

  if (!kv.count("format")) throw ScenarioError("missing 'format' key (expected " + std::string(kScenarioFormat) + ")");
  if (kv["format"] != kScenarioFormat)
    throw ScenarioError("unsupported format '" + kv["format"] + "' (expected " + kScenarioFormat + ")");

  Scenario sc;
  std::set<std::string> used = {"format"};
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };
  auto num = [&](const std::string& key, double& out) {
    if (auto v = get(key)) out = to_double(key, *v);
  };
  auto integer = [&](const std::string& key, auto& out) {
    if (auto v = get(key)) out = static_cast<std::remove_reference_t<decltype(out)>>(to_long(key, *v));
  };
  auto boolean = [&](const std::string& key, bool& out) {
    if (auto v = get(key)) out = to_bool(key, *v);
  };

  if (auto v = get("name")) sc.name = *v;
  int n = 2, d = 1;
  double kappa = 1.0;
  integer("n", n);
  integer("d", d);
  num("kappa", kappa);
  try {
    sc.params = ChainParams(n, d, kappa);
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("invalid chain parameters: ") + e.what());
  }
  if (auto v = get("profile")) sc.profile = *v;
  num("profile.a", sc.profile_a);
  num("profile.kappa", sc.profile_kappa);
  if (auto v = get("profile.breaks")) sc.profile_breaks = to_doubles("profile.breaks", *v);
  if (auto v = get("profile.values")) sc.profile_values = to_doubles("profile.values", *v);
  if (auto v = get("seed")) sc.seed = to_u64("seed", *v);
  if (auto v = get("suites")) {
    sc.suites = split(*v, ',');
    if (sc.suites.size() == 1 && sc.suites[0] == "all")
      sc.suites = {"kernel", "transport", "maxreg", "geometry"};
    for (const auto& s : sc.suites)
      if (s != "kernel" && s != "transport" && s != "maxreg" && s != "geometry")
        throw ScenarioError("key 'suites': unknown suite '" + s + "'");
  }
  boolean("refine", sc.refine);
  num("refine.factor", sc.refine_factor);
  boolean("output.fields", sc.fields);

  sc.half_lengths.assign(n, 4.0);
  sc.points.assign(n, 32);
  if (auto v = get("grid.half_length")) {
    auto h = to_doubles("grid.half_length", *v);
    if (h.size() == 1) h.assign(n, h[0]);
    if (static_cast<int>(h.size()) != n) throw ScenarioError("key 'grid.half_length': need 1 or n values");
    sc.half_lengths = h;
  }
  if (auto v = get("grid.points")) {
    std::vector<int> p;
    for (const auto& s : split(*v, ',')) p.push_back(static_cast<int>(to_long("grid.points", s)));
    if (p.size() == 1) p.assign(n, p[0]);
    if (static_cast<int>(p.size()) != n) throw ScenarioError("key 'grid.points': need 1 or n values");
    sc.points = p;
  }
  integer("ensemble.members", sc.members);
  num("ensemble.cutoff", sc.cutoff);
  num("ensemble.window", sc.window);
  num("ensemble.dt", sc.dt);
  integer("ensemble.lead_steps", sc.lead_steps);
  integer("ensemble.knot_spacing", sc.knot_spacing);
  integer("ensemble.knots", sc.knots);

  integer("kernel.fit_samples", sc.fit_samples);
  integer("kernel.probe_points", sc.probe_points);
  num("kernel.probe_t_min", sc.probe_t_min);
  num("kernel.probe_t_max", sc.probe_t_max);
  if (auto v = get("kernel.probes"))
    sc.probes = parse_probes("kernel.probes", *v);
  else
    sc.probes = default_probes(sc.params);

  if (auto v = get("transport.alphas")) sc.transport_alphas = to_doubles("transport.alphas", *v);
  num("transport.lambda", sc.transport_lambda);
  num("maxreg.lambda", sc.maxreg_lambda);
  num("maxreg.monotonicity_lambda", sc.monotonicity_lambda);
  boolean("maxreg.negative_control", sc.negative_control);
  num("maxreg.negative_factor", sc.negative_factor);
  num("maxreg.residual_dt", sc.residual_dt);
  num("maxreg.scaling_radius", sc.scaling_radius);

  integer("geometry.triples", sc.triples);
  integer("geometry.pairs", sc.pairs);
  integer("geometry.boundary_samples", sc.boundary_samples);
  integer("geometry.sandwich_samples", sc.sandwich_samples);
  integer("geometry.mc_samples", sc.mc_samples);
  integer("geometry.fs_members", sc.fs_members);
  integer("geometry.fs_points", sc.fs_points);
  integer("geometry.fs_steps", sc.fs_steps);
  num("geometry.fs_p", sc.fs_p);
  boolean("geometry.fs_refine", sc.fs_refine);

  num("tolerance.exponent", sc.tol.exponent);
  num("tolerance.drift", sc.tol.drift);
  num("tolerance.residual", sc.tol.residual);
  num("tolerance.identity", sc.tol.identity);
  num("tolerance.mc_volume", sc.tol.mc_volume);
  num("tolerance.fs_drift", sc.tol.fs_drift);
  num("tolerance.interpolation", sc.tol.interpolation);
  num("tolerance.duality", sc.tol.duality);

  for (const auto& [k, v] : kv)
    if (!used.count(k)) throw ScenarioError("unknown key '" + k + "'");

  if (sc.profile != "constant" && sc.profile != "smooth_periodic" &&
      sc.profile != "piecewise_constant")
    throw ScenarioError("key 'profile': unknown profile '" + sc.profile + "'");
  if (sc.profile == "piecewise_constant" &&
      sc.profile_values.size() != sc.profile_breaks.size() + 1)
    throw ScenarioError("piecewise_constant profile needs one more value than breaks");
  if (sc.members < 1) throw ScenarioError("key 'ensemble.members' must be positive");
  if (!(sc.cutoff > 0.0 && sc.cutoff <= 0.5)) throw ScenarioError("key 'ensemble.cutoff' must lie in (0, 1/2]");
  if (!(sc.dt > 0.0)) throw ScenarioError("key 'ensemble.dt' must be positive");
  for (int p : sc.points)
    if (p < 8 || p % 2) throw ScenarioError("key 'grid.points': need even counts >= 8");
  for (const auto& pr : sc.probes) {
    if (pr.j < 1 || pr.j > n || static_cast<int>(pr.beta.size()) != n)
      throw ScenarioError("key 'kernel.probes': bad probe for n = " + std::to_string(n));
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace kolmo::verify
