#include "commands.hpp"

#include <chrono>
#include <numeric>
#include <sstream>

#include "nilcube/cocycles.hpp"
#include "nilcube/translations.hpp"
#include "report.hpp"

namespace nilcube::cli {

using nlohmann::json;

namespace {

json header(const std::string& command, const SpaceSpec& spec, const BuiltSpace& built, const Inputs& in,
            const Options& opt) {
  std::string digest_input = "spec\n" + in.spec_text;
  if (!in.cocycle_text.empty()) digest_input += "\ncocycle\n" + in.cocycle_text;
  if (!opt.map.empty()) digest_input += "\nmap\n" + opt.map;
  json r;
  r["command"] = command;
  r["tool_version"] = kToolVersion;
  r["seed"] = opt.seed;
  r["inputs_digest"] = "sha256:" + sha256_hex(digest_input);
  json space;
  space["kind"] = spec.kind;
  space["name"] = spec.name;
  space["points"] = built.space->size();
  space["degree"] = spec.degree ? json(*spec.degree) : json(nullptr);
  space["max_dim"] = built.space->max_dim();
  r["space"] = space;
  r["caps"] = {{"max_dim", spec.caps.max_dim},
               {"max_points", spec.caps.max_points},
               {"cube_cap", spec.caps.cube_cap},
               {"node_budget", spec.caps.node_budget}};
  return r;
}

json configurations(const std::vector<Configuration>& cs) {
  json out = json::array();
  for (const auto& c : cs) out.push_back(to_string(c));
  return out;
}

json point_map(const PointMap& p) { return json(std::vector<Point>(p.begin(), p.end())); }

json values(const PointFunction& f) {
  json out = json::array();
  for (const auto& v : f) out.push_back(to_string(v));
  return out;
}

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

json check_json(const CheckResult& r) {
  json j;
  j["name"] = r.name;
  j["status"] = r.pass ? "pass" : "fail";
  j["examined"] = r.examined;
  if (r.coordinate != 0) j["coordinate"] = r.coordinate;
  if (!r.pass) j["witness"] = configurations(r.witness);
  return j;
}

// Combines per-item statuses: a definite failure wins over a cap.
int exit_for(bool failed, bool capped) { return failed ? kExitFail : capped ? kExitCap : kExitPass; }

std::vector<int> parse_k_range(const std::string& text, int lo_default, int hi_default) {
  if (text.empty()) {
    std::vector<int> ks(static_cast<std::size_t>(hi_default - lo_default + 1));
    std::iota(ks.begin(), ks.end(), lo_default);
    return ks;
  }
  std::vector<int> ks;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || v < 0 || v > kHardMaxDim) throw Error(ErrorKind::Parse, "bad level '" + s + "' in --k");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (auto dash = item.find('-'); dash != std::string::npos) {
      const int a = number(item.substr(0, dash)), b = number(item.substr(dash + 1));
      if (a > b) throw Error(ErrorKind::Parse, "empty range '" + item + "' in --k");
      for (int k = a; k <= b; ++k) ks.push_back(k);
    } else {
      ks.push_back(number(item));
    }
  }
  if (ks.empty()) throw Error(ErrorKind::Parse, "--k lists no levels");
  return ks;
}

}  // namespace

// ---------------------------------------------------------------------------

Outcome run_check(const SpaceSpec& spec, const Inputs& in, const Options& opt) {
  BuiltSpace built = build_space(spec);
  const CubeSpace& X = *built.space;
  Outcome out;
  out.report = header("check", spec, built, in, opt);
  json results = json::array();
  bool failed = false, capped = false;

  auto run = [&](const std::string& name, int coordinate, auto&& fn) {
    Stopwatch sw;
    json j;
    try {
      CheckResult r = fn();
      failed = failed || !r.pass;
      j = check_json(r);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CapExceeded) throw;
      capped = true;
      j["name"] = name;
      if (coordinate) j["coordinate"] = coordinate;
      j["status"] = "cap-exceeded";
      j["detail"] = e.what();
    }
    if (opt.timings) j["time_ms"] = sw.ms();
    results.push_back(j);
  };

  run("ergodic", 0, [&] { return check_ergodic(X); });
  run("glueing", 0, [&] { return check_glueing(X, X.max_dim()); });
  if (spec.degree && *spec.degree + 1 <= X.max_dim()) {
    run("uniqueness", *spec.degree + 1, [&] { return check_uniqueness(X, *spec.degree + 1); });
  } else {
    json j{{"name", "uniqueness"}, {"status", "skipped"}};
    j["detail"] = spec.degree ? "degree + 1 is above max_dim" : "the spec gives no degree";
    results.push_back(j);
  }
  for (int n = 1; n <= X.max_dim(); ++n) run("completion", n, [&] { return check_completion(X, n); });

  out.report["results"] = results;
  out.exit_code = exit_for(failed, capped);
  out.report["status"] = failed ? "fail" : capped ? "cap-exceeded" : "pass";
  return out;
}

// ---------------------------------------------------------------------------

Outcome run_translations(const SpaceSpec& spec, const Inputs& in, const Options& opt) {
  BuiltSpace built = build_space(spec);
  const CubeSpacePtr& X = built.space;
  const int top = spec.degree ? *spec.degree + 1 : X->max_dim();
  const std::vector<int> ks = parse_k_range(opt.k_range, 1, std::max(top, 1));
  Outcome out;
  out.report = header("translations", spec, built, in, opt);

  EnumerationOptions eo;
  eo.point_cap = spec.caps.max_points;
  eo.node_budget = spec.caps.node_budget;
  eo.prune_cube_cap = spec.caps.cube_cap;
  eo.prune_max_dim = std::min(3, X->max_dim());

  bool capped = false, failed = false;
  json levels = json::array();
  std::vector<TranslationGroup> groups;
  for (int k : ks) {
    Stopwatch sw;
    json j;
    j["k"] = k;
    try {
      TranslationGroup g = enumerate_translations(X, k, eo);
      j["status"] = "complete";
      j["order"] = g.order();
      json gens = json::array();
      for (const auto& p : g.generators()) gens.push_back(point_map(p));
      j["generators"] = gens;
      groups.push_back(std::move(g));
    } catch (const PartialResult& e) {
      capped = true;
      j["status"] = "partial";
      j["detail"] = e.what();
      j["order_at_least"] = e.found().order();
      json gens = json::array();
      for (const auto& p : e.found().generators()) gens.push_back(point_map(p));
      j["generators"] = gens;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CapExceeded) throw;
      capped = true;
      j["status"] = "cap-exceeded";
      j["detail"] = e.what();
    }
    if (opt.timings) j["time_ms"] = sw.ms();
    levels.push_back(j);
  }
  out.report["levels"] = levels;

  // the filtration law needs consecutive complete levels
  json law;
  bool consecutive = groups.size() == ks.size() && ks.front() >= 1;
  for (std::size_t i = 1; i < ks.size() && consecutive; ++i) consecutive = ks[i] == ks[i - 1] + 1;
  if (!consecutive) {
    law["status"] = "skipped";
    law["detail"] = "needs consecutive, completely enumerated levels k >= 1";
  } else if (auto w = check_filtration_property(groups)) {
    failed = true;
    law["status"] = "fail";
    law["detail"] = w->reason;
    law["witness"] = {{"i", w->i}, {"j", w->j}, {"a", point_map(w->a)}, {"b", point_map(w->b)}};
  } else {
    law["status"] = "pass";
  }
  out.report["filtration_law"] = law;

  if (built.nilmanifold && !groups.empty() && groups.front().level == 1) {
    const auto& nm = *built.nilmanifold;
    const auto& G = nm.filtration->group();
    json lm = json::array();
    bool all_in = true;
    for (Elem g = 0; g < G.order(); ++g) {
      PointMap p = nm.left_multiplication(g);
      json e{{"element", G.describe(g)}, {"map", point_map(p)}};
      json in_levels = json::array();
      for (const auto& grp : groups)
        if (grp.contains(p)) in_levels.push_back(grp.level);
      all_in = all_in && groups.front().contains(p);
      e["in_levels"] = in_levels;
      lm.push_back(e);
    }
    out.report["left_multiplications"] = lm;
    if (!all_in) failed = true;
  }

  out.exit_code = exit_for(failed, capped);
  out.report["status"] = failed ? "fail" : capped ? "cap-exceeded" : "pass";
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct CocycleInput {
  Cocycle rho;
  std::optional<std::int64_t> modulus;
};

CocycleInput parse_cocycle(const CubeSpacePtr& X, const Inputs& in) {
  IniDocument doc = parse_ini(in.cocycle_text, in.cocycle_path, {""});
  if (doc.sections.size() != 1) throw ParseError(in.cocycle_path, doc.sections[1].line, 1, "cocycle files have no sections");
  const IniSection& s = doc.sections.front();
  auto fail = [&](int line, int col, const std::string& what) { throw ParseError(in.cocycle_path, line, col, what); };
  auto integer = [&](const IniEntry& e, std::int64_t lo, std::int64_t hi) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(e.value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != e.value.size() || v < lo || v > hi)
      fail(e.line, e.value_column, "'" + e.key + "' must be an integer in " + std::to_string(lo) + ".." + std::to_string(hi));
    return static_cast<std::int64_t>(v);
  };
  int order = -1, torus = 1;
  std::vector<std::int64_t> finite;
  std::optional<std::int64_t> modulus;
  int order_line = 1;
  for (const auto& e : s.entries) {
    if (e.key == "order") {
      order = static_cast<int>(integer(e, 0, X->max_dim()));
      order_line = e.line;
    } else if (e.key == "torus") {
      torus = static_cast<int>(integer(e, 0, 8));
    } else if (e.key == "finite") {
      std::stringstream ss(e.value);
      std::string tok;
      while (ss >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        std::size_t used = 0;
        long long m = 0;
        try {
          m = std::stoll(tok, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != tok.size() || m < 2) fail(e.line, e.value_column, "'finite' lists moduli >= 2");
        finite.push_back(m);
      }
    } else if (e.key == "modulus") {
      modulus = integer(e, 1, 1'000'000'007);
    } else {
      fail(e.line, e.key_column, "unknown key '" + e.key + "' (expected order, torus, finite or modulus)");
    }
  }
  if (order < 0) fail(1, 1, "the cocycle file needs 'order = <l>'");
  ValueGroup vg(torus, finite);
  const auto& cubes = X->cubes(order);
  std::vector<std::optional<ValuePoint>> vals(cubes.size());
  std::vector<int> seen_on(cubes.size(), 0);
  for (const auto& d : s.data) {
    std::istringstream ls(d.text);
    std::string id_tok, val_tok, extra;
    ls >> id_tok >> val_tok;
    if (val_tok.empty() || (ls >> extra)) fail(d.line, d.column, "expected '<cube-id> <value>'");
    std::size_t used = 0;
    long long id = -1;
    try {
      id = std::stoll(id_tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != id_tok.size() || id < 0 || static_cast<std::size_t>(id) >= cubes.size())
      fail(d.line, d.column, "cube id must lie in 0.." + std::to_string(cubes.size() - 1));
    if (seen_on[id]) fail(d.line, d.column, "cube id " + id_tok + " repeated (first on line " + std::to_string(seen_on[id]) + ")");
    seen_on[id] = d.line;
    const int vcol = d.column + static_cast<int>(d.text.find(val_tok, id_tok.size()));
    try {
      vals[id] = parse_value_point(vg, val_tok);
    } catch (const Error& e) {
      fail(d.line, vcol, e.what());
    }
  }
  CocycleInput out{Cocycle{X, order, vg, {}}, modulus};
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (!vals[i]) fail(order_line, 1, "the table has no value for cube id " + std::to_string(i) + " " + to_string(cubes[i]));
    out.rho.values.push_back(*vals[i]);
  }
  return out;
}

bool is_constant(const PointFunction& f) {
  for (const auto& v : f)
    if (v != f.front()) return false;
  return true;
}

std::string rational(const mpq_class& q) { return q.get_str(); }

}  // namespace

Outcome run_solve(const SpaceSpec& spec, const Inputs& in, const Options& opt) {
  if (opt.method != "averaging" && opt.method != "linear" && opt.method != "both")
    throw Error(ErrorKind::Parse, "--method must be averaging, linear or both");
  BuiltSpace built = build_space(spec);
  const CubeSpacePtr& X = built.space;
  Outcome out;
  out.report = header("solve", spec, built, in, opt);
  out.report["method"] = opt.method;

  CocycleInput input = parse_cocycle(X, in);
  const Cocycle& rho = input.rho;
  out.report["cocycle"] = {{"order", rho.order}, {"group", rho.group.describe()}, {"cubes", rho.values.size()}};

  CocycleCheckOptions co;
  co.seed = opt.seed;
  CocycleCheck chk = check_cocycle(rho, co);
  json cj{{"status", chk.pass ? "pass" : "fail"}, {"examined", chk.examined}, {"exhaustive", chk.exhaustive}};
  if (!chk.pass) {
    cj["axiom"] = chk.axiom;
    cj["coordinate"] = chk.coordinate;
    cj["witness"] = configurations(chk.witness);
  }
  out.report["cocycle_check"] = cj;
  if (!chk.pass) {
    out.report["status"] = "rejected";
    out.exit_code = kExitFail;
    return out;
  }

  const bool want_avg = opt.method != "linear", want_lin = opt.method != "averaging";
  std::optional<PointFunction> f_avg, f_lin;
  ValueGroup solution_group = rho.group;
  bool failed = false;

  if (want_avg) {
    Stopwatch sw;
    json j;
    // finite values are averaged as points of the torus, r mod m -> r/m
    Cocycle torus_rho = rho;
    bool embedded = false;
    if (rho.group.torus_rank() == 0 && !rho.group.finite_moduli().empty()) {
      const auto emb = embed_in_value_group(rho.group.finite_moduli());
      torus_rho.group = emb.target;
      for (auto& v : torus_rho.values) v = emb(v.finite);
      embedded = true;
    }
    j["embedded_in_torus"] = embedded;
    if (!spec.degree) {
      j["status"] = "unsupported";
      j["detail"] = "averaging needs the degree of the space";
      failed = true;
    } else if (!torus_rho.group.finite_moduli().empty()) {
      j["status"] = "unsupported";
      j["detail"] = "averaging needs a torus-valued cocycle";
      failed = true;
    } else {
      try {
        NilspaceTower tower = build_tower(X, *spec.degree);
        CoboundaryWitness w = solve_coboundary_averaging(tower, torus_rho);
        j["status"] = "solved";
        j["solution"] = values(w.f);
        j["round_trip"] = coboundary(X, torus_rho.group, w.f, rho.order) == torus_rho;
        j["spread_in"] = rational(w.report.input_spread);
        j["spread_out"] = rational(w.report.output_spread);
        j["ratio"] = w.report.ratio ? json(rational(*w.report.ratio)) : json(nullptr);
        j["averages"] = w.report.averages;
        j["invariance_checks"] = w.report.invariance_checks;
        if (!embedded) f_avg = w.f;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SmallnessBudgetExceeded) throw;
        j["status"] = "budget-exceeded";
        j["detail"] = e.what();
        failed = true;
      }
    }
    if (opt.timings) j["time_ms"] = sw.ms();
    out.report["averaging"] = j;
  }

  if (want_lin) {
    Stopwatch sw;
    json j;
    Cocycle fin = rho;
    std::int64_t M = 1;
    const int tr = rho.group.torus_rank();
    if (tr > 0) {
      if (input.modulus) {
        M = *input.modulus;
      } else {
        mpz_class l = 1;
        for (const auto& v : rho.values)
          for (const auto& q : v.torus) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den().get_mpz_t());
        M = l.get_si();
      }
      fin = torus_to_finite(rho, M);
      j["modulus"] = M;
    }
    LinearSolution sol = solve_coboundary_linear(fin);
    j["equations"] = sol.equations;
    if (sol.f) {
      PointFunction f = tr > 0 ? finite_to_torus(*sol.f, tr, M) : *sol.f;
      j["status"] = "solved";
      j["solution"] = values(f);
      j["round_trip"] = coboundary(X, rho.group, f, rho.order) == rho;
      f_lin = f;
    } else {
      const auto& obs = *sol.obstruction;
      json cert;
      cert["component"] = obs.component;
      cert["modulus"] = obs.modulus;
      cert["value"] = obs.certificate.value;
      json rows = json::array();
      for (auto [id, coeff] : obs.certificate.combination)
        rows.push_back({{"cube_id", id}, {"cube", to_string(X->cubes(rho.order)[id])}, {"coefficient", coeff}});
      cert["combination"] = rows;
      cert["verified"] = verify_obstruction(fin, obs);
      j["status"] = "obstructed";
      j["certificate"] = cert;
      failed = true;
    }
    if (opt.timings) j["time_ms"] = sw.ms();
    out.report["linear"] = j;
  }

  if (want_avg && want_lin) {
    json cv;
    if (f_avg && f_lin) {
      PointFunction d;
      for (std::size_t x = 0; x < f_avg->size(); ++x) d.push_back(solution_group.sub((*f_avg)[x], (*f_lin)[x]));
      bool kernel = true;
      for (const auto& v : coboundary(X, solution_group, d, rho.order).values) kernel = kernel && solution_group.is_zero(v);
      const bool agree = is_constant(d);
      cv["verdict"] = agree ? "agree" : kernel ? "differ-by-cocycle-kernel" : "disagree";
      cv["difference"] = values(d);
      failed = failed || !agree;
    } else {
      cv["verdict"] = "not-jointly-solved";
    }
    out.report["cross_validation"] = cv;
  }
  out.exit_code = failed ? kExitFail : kExitPass;
  out.report["status"] = failed ? "fail" : "pass";
  return out;
}

// ---------------------------------------------------------------------------

Outcome run_lift(const SpaceSpec& spec, const Inputs& in, const Options& opt) {
  if (!spec.degree || *spec.degree < 1) throw Error(ErrorKind::Parse, "lift needs a space of known degree >= 1");
  BuiltSpace built = build_space(spec);
  Outcome out;
  out.report = header("lift", spec, built, in, opt);
  out.report["k"] = opt.k;

  StructureGroup sg = structure_group(built.space, *spec.degree);
  const std::size_t ny = sg.factor.target->size();
  json factor;
  factor["points"] = ny;
  json fibers = json::array();
  for (const auto& f : sg.factor.fibers) fibers.push_back(std::vector<Point>(f.begin(), f.end()));
  factor["fibers"] = fibers;
  factor["structure_group_order"] = sg.order();
  out.report["factor"] = factor;

  PointMap phibar;
  if (opt.map == "identity") {
    phibar = identity_map(ny);
  } else {
    std::stringstream ss(opt.map);
    std::string tok;
    while (ss >> tok) {
      std::size_t used = 0;
      long v = -1;
      try {
        v = std::stol(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != tok.size() || v < 0) throw Error(ErrorKind::Parse, "--map: bad point '" + tok + "'");
      phibar.push_back(static_cast<Point>(v));
    }
  }
  if (phibar.size() != ny)
    throw Error(ErrorKind::Parse, "--map needs " + std::to_string(ny) + " images (one per factor point)");
  out.report["map"] = point_map(phibar);

  Stopwatch sw;
  try {
    LiftResult r = lift_translation(sg, phibar, opt.k);
    out.report["psi"] = point_map(r.psi);
    out.report["equations"] = r.equations;
    json tr{{"rho_is_cocycle", r.cocycle_ok}};
    if (r.lifted) {
      out.report["lift"] = point_map(r.lift);
      tr["is_k_translation"] = r.is_translation;
      tr["pushforward_equals_map"] = r.pushforward_ok;
      out.report["status"] = "lifted";
      out.exit_code = kExitPass;
    } else {
      const auto& c = *r.certificate;
      json rows = json::array();
      const auto& cubes = sg.space->cubes(*spec.degree + 1 - opt.k);
      for (auto [id, coeff] : c.combination.combination)
        rows.push_back({{"cube_id", id}, {"cube", to_string(cubes[id])}, {"coefficient", coeff}});
      out.report["certificate"] = {{"component", c.component},
                                   {"modulus", c.modulus},
                                   {"value", c.combination.value},
                                   {"combination", rows}};
      out.report["status"] = "obstructed";
      out.exit_code = kExitFail;
    }
    out.report["verification"] = tr;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Precondition) throw;
    out.report["status"] = "precondition-failed";
    out.report["detail"] = e.what();
    out.exit_code = kExitFail;
  }
  if (opt.timings) out.report["time_ms"] = sw.ms();
  return out;
}

}  // namespace nilcube::cli
