#include "irssec/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "irssec/error.hpp"
#include "irssec/secrecy.hpp"

namespace irssec {

using nlohmann::json;

std::string label(const Baseline& b) {
  return std::string(b.an ? "an" : "noan") + "_" + (b.irs ? "irs" : "noirs");
}

Baseline parse_baseline_label(const std::string& s) {
  for (const auto& b : all_baselines()) {
    if (label(b) == s) return b;
  }
  throw InvalidInput("unknown baseline label '" + s + "'");
}

Baseline parse_baseline_flag(const std::string& s) {
  if (s == "an,irs" || s == "irs,an") return {true, true};
  if (s == "an") return {true, false};
  if (s == "irs") return {false, true};
  if (s == "none") return {false, false};
  throw InvalidInput("baseline must be one of an,irs | an | irs | none (got '" + s + "')");
}

std::vector<Baseline> all_baselines() { return {{true, true}, {true, false}, {false, true}, {false, false}}; }

ScenarioConfig ScenarioConfig::paper_scale() {
  ScenarioConfig c;
  c.N = 20;
  c.K = 5;
  return c;
}

double ScenarioConfig::p_max_watts() const { return dbm_to_watts(p_max_dbm); }
double ScenarioConfig::gamma0() const { return 1.0 / dbm_to_watts(noise_dbm); }

ChannelParams ScenarioConfig::channel_params() const {
  ChannelParams p = params;
  if (!re_override) p.re = ChannelParams::defaults(setup).re;
  if (!ura_rows_override && N >= 1) {
    int rows = std::max(1, std::min(p.ura_rows, N));
    while (N % rows != 0) --rows;
    p.ura_rows = rows;
  }
  return p;
}

ChannelScenario ScenarioConfig::scenario() const {
  ChannelScenario sc;
  sc.M = M;
  sc.N = N;
  sc.K = K;
  sc.setup = setup;
  sc.geometry = geometry;
  sc.explicit_eves = explicit_eves;
  sc.params = channel_params();
  return sc;
}

void ScenarioConfig::set_setup(Setup s) { setup = s; }

void ScenarioConfig::validate() const {
  if (M < 1 || N < 1 || K < 1) throw InvalidInput("M, N and K must all be >= 1");
  if (!(epsilon > 0)) throw InvalidInput("epsilon must be > 0");
  if (max_outer < 1) throw InvalidInput("max_outer must be >= 1");
  if (!std::isfinite(p_max_dbm) || !std::isfinite(noise_dbm)) throw InvalidInput("powers must be finite");
  if (baselines.empty()) throw InvalidInput("baseline set is empty");
  if (n_rand < 0 || refine_sweeps < 0) throw InvalidInput("n_rand and refine_sweeps must be >= 0");
  if (!(inner_tol > 0) || inner_max_iter < 1) throw InvalidInput("inner tolerances must be positive");
  if (threads < 0) throw InvalidInput("threads must be >= 0");
  if (!(solver.tol_stationarity > 0) || !(solver.tol_feasibility > 0) || !(solver.tol_gap > 0) ||
      solver.max_iter < 1 || !(solver.barrier_growth > 1)) {
    throw InvalidInput("solver tolerances must be positive, max_iter >= 1, barrier_growth > 1");
  }
  if (explicit_eves && static_cast<int>(geometry.eves.size()) != K) {
    throw InvalidInput("explicit eavesdropper list does not match K");
  }
  channel_params().validate(N);
}

namespace {

json number_or_inf(double x) { return std::isinf(x) && x > 0 ? json("inf") : json(x); }

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json link(const LinkParams& l) { return {{"exponent", l.exponent}, {"rician", number_or_inf(l.rician)}}; }

}  // namespace

std::string ScenarioConfig::to_json() const {
  const ChannelParams p = channel_params();
  json eves = json::array();
  for (const auto& e : geometry.eves) eves.push_back(vec3(e));
  json bl = json::array();
  for (const auto& b : baselines) bl.push_back(label(b));
  json j = {
      {"M", M},
      {"N", N},
      {"K", K},
      {"p_max_dbm", p_max_dbm},
      {"noise_dbm", noise_dbm},
      {"setup", to_string(setup)},
      {"geometry",
       {{"alice", vec3(geometry.alice)}, {"rose", vec3(geometry.rose)}, {"bob", vec3(geometry.bob)}}},
      {"channel",
       {{"carrier_hz", p.carrier_freq},
        {"L0_db", 10.0 * std::log10(p.L0)},
        {"ura_rows", p.ura_rows},
        {"element_spacing_m", p.element_spacing},
        {"alice_spacing_m", p.alice_spacing},
        {"links", {{"ab", link(p.ab)}, {"ae", link(p.ae)}, {"ar", link(p.ar)}, {"rb", link(p.rb)}, {"re", link(p.re)}}}}},
      {"epsilon", number_or_inf(epsilon)},
      {"max_outer", max_outer},
      {"seeds", seeds},
      {"baselines", bl},
      {"n_rand", n_rand},
      {"inner_tol", inner_tol},
      {"inner_max_iter", inner_max_iter},
      {"refine_sweeps", refine_sweeps},
      {"solver",
       {{"tol_stationarity", solver.tol_stationarity},
        {"tol_feasibility", solver.tol_feasibility},
        {"tol_gap", solver.tol_gap},
        {"max_iter", solver.max_iter},
        {"barrier_growth", solver.barrier_growth}}},
  };
  if (explicit_eves) j["geometry"]["eves"] = eves;
  // threads does not affect results and stays out of the canonical form.
  return j.dump();
}

std::uint64_t ScenarioConfig::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : to_json()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string path) : path_(std::move(path)) {}

  void keys(const json& obj, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail("expected an object");
    for (const auto& [k, _] : obj.items()) {
      if (!allowed.count(k)) throw InvalidInput("config: unknown key '" + at(k) + "'");
    }
  }

  Reader sub(const std::string& key) const { return Reader(at(key)); }

  double number(const json& v, const std::string& key, bool allow_inf = false) const {
    if (v.is_number()) return v.get<double>();
    if (allow_inf && v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw InvalidInput("config: '" + at(key) + "' must be a number" + (allow_inf ? " or \"inf\"" : ""));
  }

  int integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer()) throw InvalidInput("config: '" + at(key) + "' must be an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      throw InvalidInput("config: '" + at(key) + "' out of range");
    }
    return static_cast<int>(x);
  }

  bool boolean(const json& v, const std::string& key) const {
    if (!v.is_boolean()) throw InvalidInput("config: '" + at(key) + "' must be true or false");
    return v.get<bool>();
  }

  std::string string(const json& v, const std::string& key) const {
    if (!v.is_string()) throw InvalidInput("config: '" + at(key) + "' must be a string");
    return v.get<std::string>();
  }

  Vec3 point(const json& v, const std::string& key) const {
    if (!v.is_array() || v.size() != 3) throw InvalidInput("config: '" + at(key) + "' must be [x, y, z]");
    Vec3 p;
    for (int i = 0; i < 3; ++i) p(i) = number(v[i], key);
    return p;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw InvalidInput("config" + (path_.empty() ? std::string() : " '" + path_ + "'") + ": " + msg);
  }

 private:
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string path_;
};

LinkParams parse_link(const json& v, const Reader& r, LinkParams l) {
  r.keys(v, {"exponent", "rician"});
  if (v.contains("exponent")) l.exponent = r.number(v["exponent"], "exponent");
  if (v.contains("rician")) l.rician = r.number(v["rician"], "rician", true);
  return l;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const ScenarioConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config: malformed JSON: ") + e.what());
  }
  ScenarioConfig c = base;
  const Reader r("");
  r.keys(j, {"M", "N", "K", "p_max_dbm", "noise_dbm", "setup", "geometry", "channel", "epsilon", "max_outer",
             "seeds", "baselines", "n_rand", "inner_tol", "inner_max_iter", "refine_sweeps", "solver", "threads"});

  if (j.contains("M")) c.M = r.integer(j["M"], "M");
  if (j.contains("N")) c.N = r.integer(j["N"], "N");
  if (j.contains("K")) c.K = r.integer(j["K"], "K");
  if (j.contains("p_max_dbm")) c.p_max_dbm = r.number(j["p_max_dbm"], "p_max_dbm");
  if (j.contains("noise_dbm")) c.noise_dbm = r.number(j["noise_dbm"], "noise_dbm");
  if (j.contains("setup")) c.setup = parse_setup(r.string(j["setup"], "setup"));

  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    const Reader gr = r.sub("geometry");
    gr.keys(g, {"alice", "rose", "bob", "eves"});
    if (g.contains("alice")) c.geometry.alice = gr.point(g["alice"], "alice");
    if (g.contains("rose")) c.geometry.rose = gr.point(g["rose"], "rose");
    if (g.contains("bob")) c.geometry.bob = gr.point(g["bob"], "bob");
    if (g.contains("eves")) {
      if (!g["eves"].is_array()) gr.fail("'eves' must be a list of points");
      c.geometry.eves.clear();
      for (const auto& e : g["eves"]) c.geometry.eves.push_back(gr.point(e, "eves[]"));
      c.explicit_eves = true;
    }
  }

  if (j.contains("channel")) {
    const json& ch = j["channel"];
    const Reader cr = r.sub("channel");
    cr.keys(ch, {"carrier_hz", "L0_db", "ura_rows", "element_spacing_m", "alice_spacing_m", "links"});
    if (ch.contains("carrier_hz")) c.params.carrier_freq = cr.number(ch["carrier_hz"], "carrier_hz");
    if (ch.contains("L0_db")) c.params.L0 = std::pow(10.0, cr.number(ch["L0_db"], "L0_db") / 10.0);
    if (ch.contains("ura_rows")) {
      c.params.ura_rows = cr.integer(ch["ura_rows"], "ura_rows");
      c.ura_rows_override = true;
    }
    if (ch.contains("element_spacing_m")) c.params.element_spacing = cr.number(ch["element_spacing_m"], "element_spacing_m");
    if (ch.contains("alice_spacing_m")) c.params.alice_spacing = cr.number(ch["alice_spacing_m"], "alice_spacing_m");
    if (ch.contains("links")) {
      const json& l = ch["links"];
      const Reader lr = cr.sub("links");
      lr.keys(l, {"ab", "ae", "ar", "rb", "re"});
      if (l.contains("ab")) c.params.ab = parse_link(l["ab"], lr.sub("ab"), c.params.ab);
      if (l.contains("ae")) c.params.ae = parse_link(l["ae"], lr.sub("ae"), c.params.ae);
      if (l.contains("ar")) c.params.ar = parse_link(l["ar"], lr.sub("ar"), c.params.ar);
      if (l.contains("rb")) c.params.rb = parse_link(l["rb"], lr.sub("rb"), c.params.rb);
      if (l.contains("re")) {
        c.params.re = parse_link(l["re"], lr.sub("re"), c.channel_params().re);
        c.re_override = true;
      }
    }
  }

  if (j.contains("epsilon")) c.epsilon = r.number(j["epsilon"], "epsilon", true);
  if (j.contains("max_outer")) c.max_outer = r.integer(j["max_outer"], "max_outer");
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array()) r.fail("'seeds' must be a list of non-negative integers");
    c.seeds.clear();
    for (const auto& s : j["seeds"]) {
      if (!s.is_number_unsigned()) r.fail("'seeds' must be a list of non-negative integers");
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (j.contains("baselines")) {
    const json& b = j["baselines"];
    c.baselines.clear();
    if (b.is_string() && b.get<std::string>() == "all") {
      c.baselines = all_baselines();
    } else if (b.is_array()) {
      for (const auto& x : b) c.baselines.push_back(parse_baseline_label(r.string(x, "baselines[]")));
    } else {
      r.fail("'baselines' must be \"all\" or a list of labels");
    }
  }
  if (j.contains("n_rand")) c.n_rand = r.integer(j["n_rand"], "n_rand");
  if (j.contains("inner_tol")) c.inner_tol = r.number(j["inner_tol"], "inner_tol");
  if (j.contains("inner_max_iter")) c.inner_max_iter = r.integer(j["inner_max_iter"], "inner_max_iter");
  if (j.contains("refine_sweeps")) c.refine_sweeps = r.integer(j["refine_sweeps"], "refine_sweeps");
  if (j.contains("solver")) {
    const json& s = j["solver"];
    const Reader sr = r.sub("solver");
    sr.keys(s, {"tol_stationarity", "tol_feasibility", "tol_gap", "max_iter", "barrier_growth"});
    if (s.contains("tol_stationarity")) c.solver.tol_stationarity = sr.number(s["tol_stationarity"], "tol_stationarity");
    if (s.contains("tol_feasibility")) c.solver.tol_feasibility = sr.number(s["tol_feasibility"], "tol_feasibility");
    if (s.contains("tol_gap")) c.solver.tol_gap = sr.number(s["tol_gap"], "tol_gap");
    if (s.contains("max_iter")) c.solver.max_iter = sr.integer(s["max_iter"], "max_iter");
    if (s.contains("barrier_growth")) c.solver.barrier_growth = sr.number(s["barrier_growth"], "barrier_growth");
  }
  if (j.contains("threads")) c.threads = r.integer(j["threads"], "threads");
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

}  // namespace irssec
