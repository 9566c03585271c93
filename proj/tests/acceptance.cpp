#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>

#include "amalgam/cli.hpp"
#include "oracles.hpp"

using namespace amalgam;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs body(i) for i in [0, n) across hardware threads; results in order.
template <class T>
std::vector<T> parallel_map(int n, const std::function<T(int)>& body) {
  std::vector<T> out(n);
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (unsigned w = 0; w < hw; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) out[i] = body(i);
    });
  for (auto& t : pool) t.join();
  return out;
}

// ---------------------------------------------------------------------------

Outcome axiom_suite() {
  auto t0 = Clock::now();
  struct Row {
    bool model = true;
    std::uint64_t corruptions = 0, missed = 0;
  };
  auto rows = parallel_map<Row>(50, [](int i) {
    Row r;
    Flavor fl = i % 2 ? Flavor::Example2 : Flavor::Example1;
    Structure s = generate(fl, 3 + (i / 2) % 6, 1000 + i);
    r.model = validate_axioms(s).ok();
    Relational rel = materialize(s);
    const int nf = rel.nfibers();
    // every bit of the Q table, toggled at the back and restored
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b)
        for (int c = 0; c < nf; ++c) {
          const std::array<int, 3> e{a, b, c};
          auto it = std::lower_bound(rel.q.begin(), rel.q.end(), e);
          ++r.corruptions;
          if (it != rel.q.end() && *it == e) {
            std::iter_swap(it, rel.q.end() - 1);
            rel.q.pop_back();
            r.missed += validate_axioms(rel).ok();
            rel.q.push_back(e);
            std::iter_swap(it, rel.q.end() - 1);
          } else {
            rel.q.push_back(e);
            r.missed += validate_axioms(rel).ok();
            rel.q.pop_back();
          }
        }
    if (fl == Flavor::Example2)
      for (std::size_t t = 0; t < rel.r.size(); ++t) {
        rel.r[t] ^= 1;
        ++r.corruptions;
        r.missed += validate_axioms(rel).ok();
        rel.r[t] ^= 1;
      }
    return r;
  });
  Outcome o;
  std::uint64_t total = 0, missed = 0;
  int models = 0;
  for (const Row& r : rows) {
    models += r.model;
    total += r.corruptions;
    missed += r.missed;
  }
  double sec = seconds_since(t0);
  o.pass = models == 50 && missed == 0 && sec < 10.0;
  std::ostringstream ss;
  ss << models << "/50 models, " << total << " corruptions, " << missed << " undetected, " << sec << " s";
  o.detail = ss.str();
  return o;
}

Outcome closure_laws() {
  std::uint64_t checks = 0, bad = 0;
  for (int n = 1; n <= 5; ++n)
    for (Flavor fl : {Flavor::Example1, Flavor::Example2}) {
      Structure s = generate(fl, n, 50 + n);
      const int full = 1 << n;
      std::vector<ClosedSet> closed;
      std::vector<std::set<Element>> elems;
      for (int m = 0; m < full; ++m) {
        std::vector<int> vs;
        for (int i = 0; i < n; ++i)
          if ((m >> i) & 1) vs.push_back(i);
        closed.push_back(acl_of_vertices(s, vs));
        elems.push_back(oracle::element_set(closed.back()));
      }
      for (int a = 0; a < full; ++a) {
        ++checks;
        auto again = oracle::element_set(acl(s, closed[a].elements()));
        if (again != elems[a]) ++bad;  // idempotent
        for (const Element& e : elems[a])
          if (!again.count(e)) ++bad;  // extensive
        for (int b = 0; b < full; ++b)
          if ((a & b) == a) {
            ++checks;
            if (!std::includes(elems[b].begin(), elems[b].end(), elems[a].begin(), elems[a].end())) ++bad;
          }
      }
      for (int a = 0; a < full; ++a)
        for (int b = 0; b < full; ++b)
          for (int c = 0; c < full; ++c) {
            ++checks;
            std::set<Element> parts = elems[a | b];
            parts.insert(elems[a | c].begin(), elems[a | c].end());
            parts.insert(elems[b | c].begin(), elems[b | c].end());
            if (parts != elems[a | b | c]) ++bad;
          }
    }
  return {bad == 0, std::to_string(checks) + " checks, " + std::to_string(bad) + " violations"};
}

Outcome q_affinity() {
  std::uint64_t triangles = 0, bad = 0;
  for (int n = 3; n <= 8; ++n)
    for (Flavor fl : {Flavor::Example1, Flavor::Example2})
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Structure s = generate(fl, n, 70 + seed);
        for (const Triple& t : triples_over(s.vertices)) {
          if (s.status(t) == kAbsent) continue;
          ++triangles;
          const Pair ps[3] = {{t[0], t[1]}, {t[0], t[2]}, {t[1], t[2]}};
          auto q = [&](int code) {
            return eval_Q(s, Element::fiber(ps[0], code & 1), Element::fiber(ps[1], (code >> 1) & 1),
                          Element::fiber(ps[2], code >> 2));
          };
          int hits = 0;
          for (int code = 0; code < 8; ++code) hits += q(code);
          if (hits != 4) ++bad;
          for (int coord = 0; coord < 3; ++coord)
            for (int code = 0; code < 8; ++code) {
              if ((code >> coord) & 1) continue;
              if (q(code) + q(code | (1 << coord)) != 1) ++bad;
            }
        }
      }
  return {bad == 0 && triangles > 0, std::to_string(triangles) + " Bit triangles, " + std::to_string(bad) + " violations"};
}

Outcome boundary_properties() {
  int triangles = 0, bad = 0, ex2 = 0;
  std::string first;
  for (int n = 3; n <= 6; ++n)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      Structure s = generate(Flavor::Example1, n, 200 + seed);
      for (const Triple& t : triples_over(s.vertices)) {
        ++triangles;
        try {
          bool two = check_Bn(s, {t[0], t[1]}, 2, seed).pass && check_Bn(s, {t[0], t[2]}, 2, seed).pass &&
                     check_Bn(s, {t[1], t[2]}, 2, seed).pass;
          bool three = check_Bn(s, {t[0], t[1], t[2]}, 2, seed).pass;
          if (!two || three) ++bad;
        } catch (const Error& e) {
          ++bad;
          if (first.empty()) first = e.what();
        }
      }
    }
  for (int n = 3; n <= 6; ++n) {
    Structure e = generate(Flavor::Example2, n, 0, true);
    for (const Triple& t : triples_over(e.vertices)) {
      ++ex2;
      try {
        if (!check_Bn(e, {t[0], t[1], t[2]}, 2).pass) ++bad;
      } catch (const Error& err) {
        ++bad;
        if (first.empty()) first = err.what();
      }
    }
  }
  return {bad == 0, std::to_string(triangles) + " example1 triangles, " + std::to_string(ex2) +
                        " R-empty triangles, " + std::to_string(bad) + " failures" + (first.empty() ? "" : " (" + first + ")")};
}

Outcome relative_uniqueness() {
  int mismatches = 0, configs = 0, fails = 0;
  std::uint64_t families = 0;
  for (int i = 0; i < 30; ++i) {
    Flavor fl = i % 3 == 2 ? Flavor::Example2 : Flavor::Example1;
    Structure s = generate(fl, 4 + i % 2, 300 + i);
    auto ts = triples_over(s.vertices);
    Triple t = ts[i % ts.size()];
    std::vector<int> vs{t[0], t[1], t[2]};
    auto bn = check_Bn(s, vs, 2, i);
    auto ru = check_relative_uniqueness_all(s, 3, vs, 2, i);
    ++configs;
    families += ru.families;
    fails += !bn.pass;
    if (bn.pass != ru.pass) ++mismatches;
  }
  return {mismatches == 0, std::to_string(configs) + " configurations (" + std::to_string(fails) + " failing), " +
                               std::to_string(families) + " families, " + std::to_string(mismatches) + " mismatches"};
}

Outcome existence() {
  auto t0 = Clock::now();
  int sat3 = 0, sat4 = 0, valid = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r3 = solve_existence(existence_problem_n3(seed), {2, seed});
    auto r4 = solve_existence(existence_problem_n4(seed), {2, seed});
    sat3 += r3.sat;
    sat4 += r4.sat;
    if (r3.sat) valid += validate_functor(r3.solution).ok();
    if (r4.sat) valid += validate_functor(r4.solution).ok();
  }
  auto blocked = solve_existence(blocked_problem(1), {3, 1});
  double sec = seconds_since(t0);
  std::ostringstream ss;
  ss << "n=3 " << sat3 << "/20, n=4 " << sat4 << "/20, " << valid << " valid solutions, blocked "
     << (blocked.sat ? "SAT" : "UNSAT") << " after " << blocked.candidates << " candidates, " << sec << " s";
  return {sat3 == 20 && sat4 == 20 && valid == 40 && !blocked.sat && sec < 60.0, ss.str()};
}

Outcome uniqueness() {
  int triangles = 0, bad = 0, twists = 0;
  for (int n = 3; n <= 5; ++n)
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
      Structure s = generate(Flavor::Example1, n, 400 + seed);
      for (const Triple& t : triples_over(s.vertices)) {
        ++triangles;
        auto sol = closure_functor(s, {t[0], t[1], t[2]});
        if (!check_uniqueness(sol, sol, identity_iso(sol)).pass) ++bad;
        int nontrivial = 0;
        for (const auto& iso : one_side_twistings(sol, 0b011)) {
          const PartialMap& eta = iso.components.at(0b011);
          auto twisted = apply_twist(sol, 0b011, eta);
          bool pass = check_uniqueness(sol, twisted, identity_iso(sol)).pass;
          if (eta.is_identity()) {
            if (!pass) ++bad;
          } else {
            ++nontrivial;
            ++twists;
            if (pass) ++bad;
          }
        }
        if (nontrivial == 0) ++bad;
      }
    }
  return {bad == 0, std::to_string(triangles) + " triangles, " + std::to_string(twists) + " twisted pairs, " +
                        std::to_string(bad) + " failures"};
}

struct Fixture {
  std::string name;
  Structure s;
};

std::vector<Fixture> groupoid_fixtures() {
  std::vector<Fixture> out;
  for (int n = 3; n <= 6; ++n) {
    out.push_back({"zero" + std::to_string(n), generate(Flavor::Example1, n, 0, true)});
    for (std::uint64_t seed = 0; seed < 2; ++seed)
      out.push_back({"cob" + std::to_string(n) + "_" + std::to_string(seed), oracle::coboundary(n, 500 + seed)});
  }
  return out;
}

Outcome groupoid_suite() {
  int built = 0, bad = 0;
  std::uint64_t checks = 0;
  std::string first;
  for (const Fixture& fx : groupoid_fixtures()) {
    try {
      auto w = find_witness(fx.s, {0, 1, 2});
      if (!w) throw Error(ErrorKind::Internal, "no full witness");
      FiniteGroupoid g = build_groupoid(*w, fx.s);
      ++built;
      auto laws = check_groupoid_laws(g);
      auto theta = check_theta_composition(g, fx.s, w->offsets);
      auto coh = check_four_coherence(g.objects, fx.s, w->offsets);
      checks += laws.checked + theta.checked + coh.checked;
      auto bg = binding_group(g);
      auto cmp = compare_binding_with_aut(g, bg, fx.s, *w);
      bool ok = laws.ok() && theta.ok() && coh.ok() && bg.order() == 2 && bg.is_abelian() && bg.law_commute &&
                bg.law_compose && bg.law_product && cmp.iso.map.size() == 2 &&
                check_abelian_criterion(g, fx.s, 0, 1).holds();
      if (!ok) {
        ++bad;
        if (first.empty()) first = fx.name;
      }
    } catch (const Error& e) {
      ++bad;
      if (first.empty()) first = fx.name + ": " + e.what();
    }
  }
  return {bad == 0, std::to_string(built) + " groupoids, " + std::to_string(checks) + " law checks, " +
                        std::to_string(bad) + " violations" + (first.empty() ? "" : " (" + first + ")")};
}

Outcome twisting() {
  int twists = 0, bad = 0;
  for (const Fixture& fx : groupoid_fixtures()) {
    auto w = find_witness(fx.s, {0, 1, 2});
    if (!w) {
      ++bad;
      continue;
    }
    FiniteGroupoid g = build_groupoid(*w, fx.s);
    for (int code = 0; code < 8; ++code) {
      ++twists;
      try {
        auto tr = twist_witness(*w, fx.s, {code & 1, (code >> 1) & 1, code >> 2});
        bool ok = tr.witness.full &&
                  verify_witness(fx.s, tr.witness.objects, tr.witness.fibers, tr.witness.offsets).full() &&
                  is_groupoid_isomorphism(g, tr.groupoid, tr.iso);
        bad += !ok;
      } catch (const Error&) {
        ++bad;
      }
    }
  }
  return {bad == 0, std::to_string(twists) + " twists, " + std::to_string(bad) + " failures"};
}

Outcome tower() {
  int bad = 0;
  std::string orders;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Structure s = generate(Flavor::Example1, 4 + seed % 3, 600 + seed);
    auto t = aut_tower(s, 0, 1, 2, seed);
    bad += !t.abelian;
    orders += std::to_string(t.order());
  }
  return {bad == 0, "20 instances, orders " + orders + ", " + std::to_string(bad) + " non-abelian"};
}

Outcome determinism() {
  const std::string corpus_file = std::string(AMALGAM_CORPUS_DIR) + "/acceptance.json";
  auto a = cli::run({"corpus", corpus_file});
  auto b = cli::run({"corpus", corpus_file});
  std::string sa = cli::serialize(a.report), sb = cli::serialize(b.report);
  int entries = a.report.contains("result") ? a.report["result"].value("total", 0) : 0;
  bool ok = sa == sb && a.exit == 0 && entries > 0;
  return {ok, std::to_string(entries) + " corpus entries, " + std::to_string(sa.size()) + " bytes, " +
                  (sa == sb ? "identical" : "different") + ", corpus exit " + std::to_string(a.exit)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"axiom suite", axiom_suite},
      {"closure laws", closure_laws},
      {"Q-affinity", q_affinity},
      {"boundary properties", boundary_properties},
      {"boundary vs relative uniqueness", relative_uniqueness},
      {"existence", existence},
      {"uniqueness obstruction", uniqueness},
      {"groupoid suite", groupoid_suite},
      {"twisting", twisting},
      {"aut tower abelian", tower},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu %-32s %s  %s  [%.2f s]\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
