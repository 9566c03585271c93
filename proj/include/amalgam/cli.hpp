#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "amalgam/builder.hpp"
#include "amalgam/embedding.hpp"
#include "amalgam/errors.hpp"
#include "amalgam/functor_lab.hpp"
#include "amalgam/groupoid.hpp"
#include "amalgam/structure.hpp"

namespace amalgam::cli {

enum Exit { kPass = 0, kFail = 1, kInvalid = 2, kResource = 3 };

struct RunResult {
  int exit = kPass;
  json report;     // canonical RunReport
  std::string text;  // one-line summary for humans
  bool json_output = false;
  std::string out_path;
};

// Sorted keys come from nlohmann's std::map objects; two-space indent, trailing newline.
inline std::string serialize(const json& j) { return j.dump(2) + "\n"; }

inline int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ResourceLimit: return kResource;
    case ErrorKind::NoExtension: return kFail;
    default: return kInvalid;
  }
}

struct Options {
  std::string in, out, flavor = "example1", problem, flip, corpus_file;
  int n = -1, k = -1, buffer = 2, budget = 2;
  std::uint64_t seed = 0;
  std::vector<int> vertices, triple, pair;
  bool all_zero = false, blocked = false, json = false, timing = false;
};

namespace detail {

inline json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) invalid_input("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    invalid_input("cannot parse " + path + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) invalid_input("cannot write " + path);
  f << data;
}

inline bool is_problem(const json& j) { return j.is_object() && j.contains("assignment"); }

inline Structure load_structure(const Options& o) {
  if (o.in.empty()) invalid_input("--in is required");
  json j = read_json_file(o.in);
  if (is_problem(j)) return structure_from_json(j.at("ambient"));
  return structure_from_json(j);
}

inline std::vector<int> default_vertices(const Structure& s, const Options& o, int count) {
  if (!o.vertices.empty()) return o.vertices;
  if (count < 0) invalid_input("--vertices is required");
  if (static_cast<int>(s.vertices.size()) < count) invalid_input("structure has fewer than " + std::to_string(count) + " vertices");
  return {s.vertices.begin(), s.vertices.begin() + count};
}

inline DiagramFunctor generated_problem(const std::string& kind, std::uint64_t seed) {
  if (kind == "existence3") return existence_problem_n3(seed);
  if (kind == "existence4") return existence_problem_n4(seed);
  if (kind == "blocked") return blocked_problem(seed);
  invalid_input("unknown problem kind '" + kind + "' (existence3, existence4, blocked)");
}

// Problem from --problem, a problem file, or the closure problem over --vertices of a structure file.
inline DiagramFunctor load_problem(const Options& o) {
  if (!o.problem.empty()) return generated_problem(o.problem, o.seed);
  if (o.in.empty()) invalid_input("--in or --problem is required");
  json j = read_json_file(o.in);
  DiagramFunctor f;
  if (is_problem(j)) {
    f = functor_from_json(j);
  } else {
    Structure s = structure_from_json(j);
    f = closure_functor(s, default_vertices(s, o, o.n), false);
  }
  if (o.n >= 0 && f.index.n != o.n) invalid_input("problem has n = " + std::to_string(f.index.n) + ", not " + std::to_string(o.n));
  return f;
}

inline std::array<int, 3> triple_arg(const Options& o) {
  if (o.triple.size() != 3) invalid_input("--triple needs three vertices");
  return {o.triple[0], o.triple[1], o.triple[2]};
}

inline json verdict(bool pass) { return pass ? "PASS" : "FAIL"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each fills report["result"] and returns the exit code.

inline int cmd_gen(const Options& o, json& rep, std::string& artifact) {
  json out;
  if (!o.problem.empty()) {
    out = functor_to_json(detail::generated_problem(o.problem, o.seed));
  } else if (o.blocked) {
    BlockedConfiguration bc = blocked_configuration(o.seed);
    out = to_json(bc.structure);
    rep["result"]["triple"] = bc.triple;
    rep["result"]["model"] = bc.model;
  } else {
    if (o.n < 0) invalid_input("gen needs --n");
    out = to_json(generate(parse_flavor(o.flavor), o.n, o.seed, o.all_zero));
  }
  artifact = serialize(out);
  rep["result"]["output"] = out;
  rep["verdict"] = "OK";
  return kPass;
}

inline int cmd_axioms(const Options& o, json& rep) {
  Structure s = detail::load_structure(o);
  AxiomReport ar = validate_axioms(s);
  json v = json::array();
  for (const auto& x : ar.violations) v.push_back({{"axiom", x.kind}, {"where", x.where}});
  rep["result"] = {{"violations", v}, {"vertices", s.vertices.size()}};
  rep["verdict"] = detail::verdict(ar.ok());
  return ar.ok() ? kPass : kFail;
}

inline int cmd_bn(const Options& o, json& rep) {
  Structure s = detail::load_structure(o);
  std::vector<int> vs = detail::default_vertices(s, o, o.n);
  BnVerdict v = check_Bn(s, vs, o.buffer, o.seed);
  rep["result"] = {{"n", vs.size()}, {"vertices", vs}, {"automorphisms", v.automorphisms},
                   {"buffer_vertices", v.buffer_vertices}};
  if (v.witness) rep["result"]["witness"] = map_to_json(*v.witness);
  rep["verdict"] = detail::verdict(v.pass);
  return v.pass ? kPass : kFail;
}

inline int cmd_rel_uniq(const Options& o, json& rep) {
  Structure s = detail::load_structure(o);
  std::vector<int> vs = detail::default_vertices(s, o, o.n);
  int k = o.k < 0 ? static_cast<int>(vs.size()) : o.k;
  RelUniqVerdict v = check_relative_uniqueness_all(s, k, vs, o.buffer, o.seed);
  rep["result"] = {{"k", k}, {"vertices", vs}, {"families", v.families}};
  if (!v.pass) {
    rep["result"]["obstruction"] = v.obstruction;
    if (v.triangle) rep["result"]["triangle"] = *v.triangle;
    json fam = json::array();
    for (const auto& [u, m] : v.family) fam.push_back({{"face", subset_to_json(u)}, {"map", map_to_json(m)}});
    rep["result"]["family"] = fam;
  }
  rep["verdict"] = detail::verdict(v.pass);
  return v.pass ? kPass : kFail;
}

// Every one-side twisting of a solution at every maximal face must extend.
inline int cmd_uniqueness(const Options& o, json& rep) {
  DiagramFunctor sol;
  json j = o.in.empty() ? json() : detail::read_json_file(o.in);
  if (!o.problem.empty() || detail::is_problem(j)) {
    DiagramFunctor p = detail::load_problem(o);
    ExistenceResult r = solve_existence(p, {o.budget, o.seed});
    if (!r.sat) invalid_input("problem has no solution within the budget: " + r.obstruction);
    sol = r.solution;
  } else {
    Structure s = structure_from_json(j);
    sol = closure_functor(s, detail::default_vertices(s, o, o.n));
  }
  const int n = sol.index.n;
  std::uint64_t tried = 0;
  for (int i = 0; i < n; ++i) {
    Subset face = sol.index.top() & ~(Subset{1} << i);
    for (const NaturalIso& iso : one_side_twistings(sol, face)) {
      ++tried;
      UniquenessVerdict v = check_uniqueness(sol, sol, iso);
      if (!v.pass) {
        rep["result"] = {{"n", n}, {"twistings_checked", tried}, {"face", subset_to_json(face)},
                         {"twist", map_to_json(iso.components.at(face))}, {"obstruction", v.obstruction}};
        if (v.triangle) rep["result"]["triangle"] = *v.triangle;
        rep["verdict"] = "FAIL";
        return kFail;
      }
    }
  }
  rep["result"] = {{"n", n}, {"twistings_checked", tried}};
  rep["verdict"] = "PASS";
  return kPass;
}

inline int cmd_existence(const Options& o, json& rep) {
  DiagramFunctor p = detail::load_problem(o);
  ExistenceResult r = solve_existence(p, {o.budget, o.seed});
  rep["result"] = {{"n", p.index.n}, {"candidates", r.candidates}, {"fresh", r.fresh}};
  if (r.sat) rep["result"]["solution"] = functor_to_json(r.solution);
  else rep["result"]["obstruction"] = r.obstruction;
  rep["verdict"] = r.sat ? "SAT" : "UNSAT";
  return r.sat ? kPass : kFail;
}

inline int cmd_skeletal(const Options& o, json& rep) {
  if (o.k < 2) invalid_input("check skeletal needs --k >= 2");
  DiagramFunctor f;
  json j = o.in.empty() ? json() : detail::read_json_file(o.in);
  if (detail::is_problem(j)) {
    f = functor_from_json(j);
  } else {
    Structure s = detail::load_structure(o);
    f = skeletal_problem(s, detail::default_vertices(s, o, o.n), o.k - 1, o.seed);
  }
  SkeletalResult r = extend_skeletal(f, o.k);
  rep["result"] = {{"k", o.k}, {"n", f.index.n}, {"unchanged", r.unchanged}};
  if (r.ok) rep["result"]["functor"] = functor_to_json(r.functor);
  else {
    rep["result"]["obstruction"] = r.obstruction;
    if (r.face) rep["result"]["face"] = subset_to_json(*r.face);
    if (r.triangle) rep["result"]["triangle"] = *r.triangle;
  }
  rep["verdict"] = detail::verdict(r.ok);
  return r.ok ? kPass : kFail;
}

inline int cmd_witness(const Options& o, json& rep) {
  Structure s = detail::load_structure(o);
  auto w = find_witness(s, detail::triple_arg(o));
  rep["result"] = w ? json{{"witness", witness_to_json(*w)}} : json{{"witness", nullptr}};
  rep["verdict"] = detail::verdict(w.has_value());
  return w ? kPass : kFail;
}

inline std::optional<SymmetricWitness> witness_for(const Options& o, const Structure& s, json& rep) {
  auto w = find_witness(s, detail::triple_arg(o));
  if (!w) {
    rep["result"] = {{"witness", nullptr}};
    rep["verdict"] = "FAIL";
  }
  return w;
}

inline int cmd_groupoid_build(const Options& o, json& rep) {
  Structure s = detail::load_structure(o);
  auto w = witness_for(o, s, rep);
  if (!w) return kFail;
  FiniteGroupoid g = build_groupoid(*w, s);
  GroupoidLaws laws = check_groupoid_laws(g);
  LawTally comp = check_theta_composition(g, s, w->offsets);
  LawTally coh = check_four_coherence(g.objects, s, w->offsets);
  bool ok = laws.ok() && comp.ok() && coh.ok();
  rep["result"] = {{"witness", witness_to_json(*w)},
                   {"groupoid", groupoid_to_json(g)},
                   {"laws_checked", laws.checked},
                   {"theta_composition", {{"checked", comp.checked}, {"violations", comp.violations}}},
                   {"coherence", {{"checked", coh.checked}, {"violations", coh.violations}}}};
  rep["verdict"] = detail::verdict(ok);
  return ok ? kPass : kFail;
}

inline int cmd_groupoid_binding(const Options& o, json& rep) {
  Structure s = detail::load_structure(o);
  auto w = witness_for(o, s, rep);
  if (!w) return kFail;
  FiniteGroupoid g = build_groupoid(*w, s);
  BindingGroup bg = binding_group(g);
  BindingVsAut cmp = compare_binding_with_aut(g, bg, s, *w);
  AbelianCriterion crit = check_abelian_criterion(g, s, w->objects[0], w->objects[1]);
  bool ok = bg.is_abelian() && bg.law_commute && bg.law_compose && bg.law_product && crit.holds();
  rep["result"] = {{"binding_group", binding_to_json(bg)},
                   {"aut_order", cmp.aut_action.size()},
                   {"isomorphism", cmp.iso.map},
                   {"criterion", {{"hypothesis", crit.hypothesis}, {"conclusion", crit.conclusion}}}};
  rep["verdict"] = detail::verdict(ok);
  return ok ? kPass : kFail;
}

inline int cmd_groupoid_twist(const Options& o, json& rep) {
  Structure s = detail::load_structure(o);
  auto w = witness_for(o, s, rep);
  if (!w) return kFail;
  std::array<int, 3> sigma{0, 0, 0};
  std::stringstream ss(o.flip);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "12") sigma[0] = 1;
    else if (tok == "23") sigma[1] = 1;
    else if (tok == "13") sigma[2] = 1;
    else if (!tok.empty()) invalid_input("--flip takes 12, 23 or 13, got '" + tok + "'");
  }
  TwistResult t = twist_witness(*w, s, sigma);
  json iso = json::array();
  for (const auto& [a, b] : t.iso) iso.push_back({morphism_to_json(a), morphism_to_json(b)});
  rep["result"] = {{"witness", witness_to_json(t.witness)}, {"isomorphism", iso}};
  rep["verdict"] = detail::verdict(t.witness.full);
  return t.witness.full ? kPass : kFail;
}

inline int cmd_groupoid_autotower(const Options& o, json& rep) {
  Structure s = detail::load_structure(o);
  if (o.pair.size() != 2) invalid_input("--pair needs two vertices");
  AutTower t = aut_tower(s, o.pair[0], o.pair[1], o.buffer, o.seed);
  json tilde = json::array();
  for (const Element& e : t.tilde) tilde.push_back(element_to_json(e));
  rep["result"] = {{"c", t.c}, {"tilde", tilde}, {"order", t.order()}, {"abelian", t.abelian},
                   {"table", t.table}, {"dcl_exact", t.dcl_exact}};
  rep["verdict"] = detail::verdict(t.abelian);
  return t.abelian ? kPass : kFail;
}

RunResult run(const std::vector<std::string>& args);

// Corpus entries: {"name", "args": [...], "expect": exit code or verdict string}.
// Relative paths after --in and -o resolve against the corpus file's directory.
inline int cmd_corpus(const Options& o, json& rep) {
  json doc = detail::read_json_file(o.corpus_file);
  json entries;
  if (doc.is_array()) entries = doc;
  else if (doc.is_object() && doc.contains("entries") && doc["entries"].is_array()) entries = doc["entries"];
  else if (doc.is_object() && doc.empty()) entries = json::array();
  else invalid_input("corpus file must be an array of entries or an object with an entries array");
  const std::filesystem::path dir = std::filesystem::path(o.corpus_file).parent_path();
  json results = json::array();
  std::vector<std::string> mismatches;
  int passed = 0;
  for (const auto& e : entries) {
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string() || !e.contains("args") || !e["args"].is_array() ||
        !e.contains("expect"))
      invalid_input("corpus entry needs name, args and expect");
    std::vector<std::string> args;
    for (const auto& a : e["args"]) {
      if (!a.is_string()) invalid_input("corpus args must be strings");
      args.push_back(a.get<std::string>());
    }
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if ((args[i] == "--in" || args[i] == "-o") && std::filesystem::path(args[i + 1]).is_relative())
        args[i + 1] = (dir / args[i + 1]).string();
    if (!args.empty() && args[0] == "corpus") invalid_input("corpus entries cannot run corpus");
    RunResult r = run(args);
    bool match;
    if (e["expect"].is_number_integer()) match = r.exit == e["expect"].get<int>();
    else if (e["expect"].is_string()) match = r.report.value("verdict", "") == e["expect"].get<std::string>();
    else invalid_input("expect must be an exit code or a verdict");
    if (match) ++passed;
    else mismatches.push_back(e["name"].get<std::string>());
    results.push_back({{"name", e["name"]}, {"expect", e["expect"]}, {"exit", r.exit}, {"match", match}, {"report", r.report}});
  }
  rep["result"] = {{"entries", results}, {"total", entries.size()}, {"matched", passed}, {"mismatches", mismatches}};
  rep["verdict"] = detail::verdict(mismatches.empty());
  return mismatches.empty() ? kPass : kFail;
}

inline RunResult run(const std::vector<std::string>& args) {
  RunResult res;
  Options o;
  CLI::App app{"amalgamation and groupoid workbench for double-cover parity structures", "amalgam"};
  app.require_subcommand(1);
  auto globals = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--buffer", o.buffer, "genericity buffer size");
    c->add_option("--budget", o.budget, "fresh vertex budget");
    c->add_option("-o,--out", o.out, "output file");
    c->add_flag("--json", o.json, "print the JSON report");
    c->add_flag("--timing", o.timing, "include wall time in the report");
  };
  auto input = [&](CLI::App* c) {
    c->add_option("--in", o.in, "structure or problem file");
    c->add_option("--n", o.n, "number of vertices / problem size");
    c->add_option("--vertices", o.vertices, "vertex list")->delimiter(',');
    c->add_option("--k", o.k, "level");
    c->add_option("--problem", o.problem, "generated problem: existence3, existence4, blocked");
    c->add_option("--triple", o.triple, "three objects")->delimiter(',');
  };

  auto* gen = app.add_subcommand("gen", "generate a structure or problem");
  globals(gen);
  gen->add_option("--flavor", o.flavor, "example1 or example2");
  gen->add_option("--n", o.n, "vertex count");
  gen->add_flag("--all-zero-base", o.all_zero, "every triangle Bit(0)");
  gen->add_flag("--blocked", o.blocked, "blocked configuration");
  gen->add_option("--problem", o.problem, "existence3, existence4 or blocked");

  auto* check = app.add_subcommand("check", "property checks");
  check->require_subcommand(1);
  std::map<std::string, CLI::App*> checks;
  for (const char* name : {"axioms", "bn", "rel-uniq", "uniqueness", "existence", "skeletal"}) {
    checks[name] = check->add_subcommand(name);
    globals(checks[name]);
    input(checks[name]);
  }

  auto* grp = app.add_subcommand("groupoid", "groupoid analysis");
  grp->require_subcommand(1);
  std::map<std::string, CLI::App*> gsubs;
  for (const char* name : {"build", "binding", "twist", "autotower"}) {
    gsubs[name] = grp->add_subcommand(name);
    globals(gsubs[name]);
    input(gsubs[name]);
  }
  gsubs["twist"]->add_option("--flip", o.flip, "pairs to twist: 12, 23, 13 (comma separated)");
  gsubs["autotower"]->add_option("--pair", o.pair, "two vertices")->delimiter(',');

  auto* wit = app.add_subcommand("witness", "symmetric witnesses");
  wit->require_subcommand(1);
  auto* wfind = wit->add_subcommand("find");
  globals(wfind);
  input(wfind);

  auto* corpus = app.add_subcommand("corpus", "run a corpus file");
  globals(corpus);
  corpus->add_option("file", o.corpus_file, "corpus file")->required();

  json rep;
  rep["command"] = args;
  auto started = std::chrono::steady_clock::now();
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      res.text = app.help();
      res.exit = kPass;
      rep["verdict"] = "HELP";
      res.report = rep;
      return res;
    } catch (const CLI::ParseError& e) {
      res.exit = kInvalid;
      rep["verdict"] = "ERROR";
      rep["error"] = {{"kind", "invalid-input"}, {"message", e.what()}};
      rep["exit"] = res.exit;
      res.text = std::string("ERROR (invalid-input): ") + e.what() + "\n" + app.help();
      res.report = rep;
      return res;
    }
    res.json_output = o.json;
    res.out_path = o.out;
    rep["seed"] = o.seed;
    std::string artifact;
    int code = kInvalid;
    if (gen->parsed()) {
      code = cmd_gen(o, rep, artifact);
    } else if (check->parsed()) {
      rep["buffer"] = o.buffer;
      rep["budget"] = o.budget;
      if (checks["axioms"]->parsed()) code = cmd_axioms(o, rep);
      else if (checks["bn"]->parsed()) code = cmd_bn(o, rep);
      else if (checks["rel-uniq"]->parsed()) code = cmd_rel_uniq(o, rep);
      else if (checks["uniqueness"]->parsed()) code = cmd_uniqueness(o, rep);
      else if (checks["existence"]->parsed()) code = cmd_existence(o, rep);
      else code = cmd_skeletal(o, rep);
    } else if (grp->parsed()) {
      rep["buffer"] = o.buffer;
      if (gsubs["build"]->parsed()) code = cmd_groupoid_build(o, rep);
      else if (gsubs["binding"]->parsed()) code = cmd_groupoid_binding(o, rep);
      else if (gsubs["twist"]->parsed()) code = cmd_groupoid_twist(o, rep);
      else code = cmd_groupoid_autotower(o, rep);
    } else if (wfind->parsed()) {
      code = cmd_witness(o, rep);
    } else if (corpus->parsed()) {
      code = cmd_corpus(o, rep);
    }
    res.exit = code;
    rep["exit"] = code;
    if (o.timing)
      rep["timing_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    if (!o.out.empty()) detail::write_file(o.out, gen->parsed() ? artifact : serialize(rep));
    res.text = rep.value("verdict", "?");
  } catch (const Error& e) {
    res.exit = exit_for(e.kind());
    rep["verdict"] = "ERROR";
    rep["error"] = {{"kind", kind_name(e.kind())}, {"message", e.what()}};
    res.text = std::string("ERROR (") + kind_name(e.kind()) + "): " + e.what();
  } catch (const std::exception& e) {
    res.exit = kInvalid;
    rep["verdict"] = "ERROR";
    rep["error"] = {{"kind", "internal-invariant"}, {"message", e.what()}};
    res.text = std::string("ERROR: ") + e.what();
  }
  rep["exit"] = res.exit;
  res.report = rep;
  return res;
}

}  // namespace amalgam::cli
