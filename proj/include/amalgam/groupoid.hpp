#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amalgam/builder.hpp"
#include "amalgam/embedding.hpp"
#include "amalgam/structure.hpp"

namespace amalgam {

// theta with per-coordinate parity offsets: theta(x, y, z) = Q(x + o0, y + o1, z + o2).
// Offsets all zero is Q itself.
using ThetaOffsets = std::array<int, 3>;

inline Element shifted(const Element& f, int by) { return Element::fiber(f.pair_of(), f.parity + by); }

inline bool eval_theta(const Structure& s, const ThetaOffsets& o, const Element& x, const Element& y, const Element& z) {
  return eval_Q(s, shifted(x, o[0]), shifted(y, o[1]), shifted(z, o[2]));
}

struct WitnessClauses {
  bool in_closure = false;      // f_ij in acl(a_i a_j)
  bool not_definable = false;   // f12 outside dcl(acl(a1) acl(a2))
  bool same_type = false;       // the three (a_i, a_j, f_ij) are conjugate
  bool theta_unique = false;    // each f_ij is the unique realization
  bool isolated = false;        // orbit over a1 a2 = orbit over acl(a1) acl(a2)
  bool symmetric() const { return in_closure && not_definable && same_type && theta_unique; }
  bool full() const { return symmetric() && isolated; }
};

struct SymmetricWitness {
  std::array<int, 3> objects{};     // a1, a2, a3
  std::array<Element, 3> fibers{};  // f12, f23, f13
  ThetaOffsets offsets{0, 0, 0};
  WitnessClauses clauses;
  bool full = false;
};

namespace detail {

// The map acl(x0, x1) -> acl(y0, y1), x_i -> y_i, carrying fiber f onto fiber g.
inline PartialMap edge_map(int x0, int x1, const Element& f, int y0, int y1, const Element& g) {
  PartialMap m;
  m.vertex_map[x0] = y0;
  m.vertex_map[x1] = y1;
  m.shift[pair_of(x0, x1)] = (f.parity + g.parity) & 1;
  return m;
}

}  // namespace detail

inline WitnessClauses verify_witness(const Structure& s, const std::array<int, 3>& a, const std::array<Element, 3>& f,
                                     const ThetaOffsets& o) {
  WitnessClauses c;
  const Pair p12 = pair_of(a[0], a[1]), p23 = pair_of(a[1], a[2]), p13 = pair_of(a[0], a[2]);
  c.in_closure = f[0].sort == Sort::Fiber && f[1].sort == Sort::Fiber && f[2].sort == Sort::Fiber &&
                 f[0].pair_of() == p12 && f[1].pair_of() == p23 && f[2].pair_of() == p13;
  if (!c.in_closure) return c;
  for (const Element& e : f) require_member(s, e);

  DclResult d = dcl(s, {Element::vertex(a[0]), Element::vertex(a[1])});
  c.not_definable = d.elements.count(f[0]) == 0;

  // a1 a2 f12 -> a2 a3 f23 and a1 a2 f12 -> a1 a3 f13 must be elementary
  PartialMap to23 = detail::edge_map(a[0], a[1], f[0], a[1], a[2], f[1]);
  PartialMap to13 = detail::edge_map(a[0], a[1], f[0], a[0], a[2], f[2]);
  c.same_type = is_elementary(s, to23).ok && is_elementary(s, to13).ok;

  c.theta_unique = true;
  for (int coord = 0; coord < 3; ++coord) {
    int hits = 0;
    for (int d2 = 0; d2 < 2; ++d2) {
      std::array<Element, 3> g = f;
      g[coord] = Element::fiber(g[coord].pair_of(), d2);
      if (eval_theta(s, o, g[0], g[1], g[2])) hits += g[coord] == f[coord] ? 1 : 2;
    }
    if (hits != 1) c.theta_unique = false;
  }

  ClosedSet edge({a[0], a[1]});
  auto over_points = aut_group(s, edge, {Element::vertex(a[0]), Element::vertex(a[1])});
  auto over_closures =
      aut_group(s, edge, concat(acl_of_vertices(s, {a[0]}).elements(), acl_of_vertices(s, {a[1]}).elements()));
  c.isolated = over_points.orbit(f[0]) == over_closures.orbit(f[0]);
  return c;
}

inline SymmetricWitness make_witness(const Structure& s, const std::array<int, 3>& a, const std::array<int, 3>& parities,
                                     const ThetaOffsets& o = {0, 0, 0}) {
  SymmetricWitness w;
  w.objects = a;
  w.fibers = {Element::fiber(pair_of(a[0], a[1]), parities[0]), Element::fiber(pair_of(a[1], a[2]), parities[1]),
              Element::fiber(pair_of(a[0], a[2]), parities[2])};
  w.offsets = o;
  w.clauses = verify_witness(s, a, w.fibers, o);
  w.full = w.clauses.full();
  return w;
}

// Lexicographically first parity choice (p12, p23, p13) that is a full witness.
inline std::optional<SymmetricWitness> find_witness(const Structure& s, const std::array<int, 3>& a) {
  for (int v : a)
    if (!s.has_vertex(v)) invalid_input("vertex " + std::to_string(v) + " not in structure");
  if (a[0] == a[1] || a[1] == a[2] || a[0] == a[2]) invalid_input("witness objects must be distinct");
  if (s.status(a[0], a[1], a[2]) == kAbsent) return std::nullopt;
  for (int code = 0; code < 8; ++code) {
    std::array<int, 3> par{(code >> 2) & 1, (code >> 1) & 1, code & 1};
    SymmetricWitness w = make_witness(s, a, par);
    if (w.full) return w;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Groupoid

// src == dst is a loop in G_src; otherwise the fiber over {src, dst} read src -> dst.
struct Morphism {
  int src = 0;
  int dst = 0;
  int parity = 0;
  auto operator<=>(const Morphism&) const = default;
  bool is_loop() const { return src == dst; }
  Element fiber() const { return Element::fiber(pair_of(src, dst), parity); }
};

inline std::string to_string(const Morphism& m) {
  return "[" + std::to_string(m.src) + "->" + std::to_string(m.dst) + "," + std::to_string(m.parity) + "]";
}

struct FiniteGroupoid {
  std::vector<int> objects;
  std::vector<Morphism> morphisms;  // sorted
  std::map<std::pair<int, int>, int> table;  // (g, f) -> g after f, f.dst == g.src
  std::map<int, int> identity;               // object -> morphism index

  int index_of(const Morphism& m) const {
    auto it = std::lower_bound(morphisms.begin(), morphisms.end(), m);
    if (it == morphisms.end() || *it != m) invalid_input("no morphism " + to_string(m));
    return static_cast<int>(it - morphisms.begin());
  }
  Morphism compose(const Morphism& g, const Morphism& f) const {
    if (f.dst != g.src) invalid_input("cannot compose " + to_string(g) + " after " + to_string(f));
    return morphisms[table.at({index_of(g), index_of(f)})];
  }
  Morphism id(int a) const { return morphisms[identity.at(a)]; }
  Morphism inverse(const Morphism& f) const {
    for (const Morphism& g : hom(f.dst, f.src))
      if (compose(g, f) == id(f.src)) return g;
    internal_error("no inverse for " + to_string(f));
  }
  std::vector<Morphism> hom(int a, int b) const {
    auto lo = std::lower_bound(morphisms.begin(), morphisms.end(), Morphism{a, b, 0});
    std::vector<Morphism> out;
    for (auto it = lo; it != morphisms.end() && it->src == a && it->dst == b; ++it) out.push_back(*it);
    return out;
  }
};

struct GroupoidLaws {
  std::uint64_t checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline GroupoidLaws check_groupoid_laws(const FiniteGroupoid& g) {
  GroupoidLaws out;
  auto fail = [&](const std::string& m) {
    if (out.violations.size() < 32) out.violations.push_back(m);
  };
  for (const Morphism& f : g.morphisms) {
    ++out.checked;
    if (g.compose(g.id(f.dst), f) != f || g.compose(f, g.id(f.src)) != f) fail("identity law fails at " + to_string(f));
    bool inv = false;
    for (const Morphism& h : g.hom(f.dst, f.src))
      if (g.compose(h, f) == g.id(f.src) && g.compose(f, h) == g.id(f.dst)) inv = true;
    if (!inv) fail(to_string(f) + " has no inverse");
  }
  for (const Morphism& f : g.morphisms)
    for (int c : g.objects)
      for (const Morphism& h : g.hom(f.dst, c))
        for (int d : g.objects)
          for (const Morphism& k : g.hom(c, d)) {
            ++out.checked;
            if (g.compose(k, g.compose(h, f)) != g.compose(g.compose(k, h), f))
              fail("associativity fails on " + to_string(f) + " " + to_string(h) + " " + to_string(k));
          }
  for (int a : g.objects)
    for (int b : g.objects)
      if (g.hom(a, b).empty()) fail("no morphism from " + std::to_string(a) + " to " + std::to_string(b));
  return out;
}

// Objects are the vertices; composition of a -> b -> c for distinct objects is
// the unique h with theta(f, g, h). A loop of parity d at a is the composite of
// a fiber read a -> b with the same fiber shifted by d read back.
inline FiniteGroupoid build_groupoid(const SymmetricWitness& w, const Structure& s) {
  if (!w.full) invalid_input("groupoid construction needs a full symmetric witness");
  FiniteGroupoid g;
  g.objects = s.vertices;
  for (int a : s.vertices)
    for (int b : s.vertices)
      for (int d = 0; d < 2; ++d) g.morphisms.push_back({a, b, d});
  std::sort(g.morphisms.begin(), g.morphisms.end());
  for (int a : s.vertices) g.identity[a] = g.index_of({a, a, 0});

  auto compose_raw = [&](const Morphism& h, const Morphism& f) -> Morphism {
    const int a = f.src, b = f.dst, c = h.dst;
    if (f.is_loop() || h.is_loop() || a == c) return {a, c, (f.parity + h.parity) & 1};
    std::optional<Morphism> out;
    for (int d = 0; d < 2; ++d) {
      Element z = Element::fiber(pair_of(a, c), d);
      if (eval_theta(s, w.offsets, f.fiber(), h.fiber(), z)) {
        if (out) internal_error("theta has two realizations over " + to_string(triple_of(a, b, c)));
        out = Morphism{a, c, d};
      }
    }
    if (!out) internal_error("theta has no realization over " + to_string(triple_of(a, b, c)));
    return *out;
  };
  for (std::size_t i = 0; i < g.morphisms.size(); ++i)
    for (std::size_t j = 0; j < g.morphisms.size(); ++j) {
      const Morphism& h = g.morphisms[i];
      const Morphism& f = g.morphisms[j];
      if (f.dst != h.src) continue;
      g.table[{static_cast<int>(i), static_cast<int>(j)}] = g.index_of(compose_raw(h, f));
    }
  GroupoidLaws laws = check_groupoid_laws(g);
  if (!laws.ok()) internal_error("groupoid law violated: " + laws.violations.front());
  return g;
}

struct LawTally {
  std::uint64_t checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// theta(f_ab, f_bc, f_ac) iff [f_bc] after [f_ab] = [f_ac], over ordered distinct triples.
inline LawTally check_theta_composition(const FiniteGroupoid& g, const Structure& s, const ThetaOffsets& o) {
  LawTally out;
  for (int a : g.objects)
    for (int b : g.objects)
      for (int c : g.objects) {
        if (a == b || b == c || a == c) continue;
        if (!is_independent(s, {Element::vertex(a)}, {Element::vertex(b), Element::vertex(c)}, {})) continue;
        for (int code = 0; code < 8; ++code) {
          Morphism fab{a, b, code & 1}, fbc{b, c, (code >> 1) & 1}, fac{a, c, (code >> 2) & 1};
          bool lhs = eval_theta(s, o, fab.fiber(), fbc.fiber(), fac.fiber());
          bool rhs = g.compose(fbc, fab) == fac;
          ++out.checked;
          if (lhs != rhs && out.violations.size() < 32)
            out.violations.push_back("theta and composition disagree on " + to_string(fab) + to_string(fbc) +
                                     to_string(fac));
        }
      }
  return out;
}

// theta(f_da,f_ab,f_db) & theta(f_db,f_bc,f_dc) & theta(f_da,f_ac,f_dc) -> theta(f_ab,f_bc,f_ac)
inline LawTally check_four_coherence(const std::vector<int>& objects, const Structure& s, const ThetaOffsets& o) {
  LawTally out;
  for (int a : objects)
    for (int b : objects)
      for (int c : objects)
        for (int d : objects) {
          if (sorted_unique({a, b, c, d}).size() != 4) continue;
          for (int code = 0; code < 64; ++code) {
            auto bit = [&](int k) { return (code >> k) & 1; };
            Element fda = Element::fiber(pair_of(d, a), bit(0)), fab = Element::fiber(pair_of(a, b), bit(1)),
                    fdb = Element::fiber(pair_of(d, b), bit(2)), fbc = Element::fiber(pair_of(b, c), bit(3)),
                    fdc = Element::fiber(pair_of(d, c), bit(4)), fac = Element::fiber(pair_of(a, c), bit(5));
            ++out.checked;
            if (eval_theta(s, o, fda, fab, fdb) && eval_theta(s, o, fdb, fbc, fdc) && eval_theta(s, o, fda, fac, fdc) &&
                !eval_theta(s, o, fab, fbc, fac) && out.violations.size() < 32)
              out.violations.push_back("coherence fails on objects " + std::to_string(a) + "," + std::to_string(b) +
                                       "," + std::to_string(c) + "," + std::to_string(d));
          }
        }
  return out;
}

// ---------------------------------------------------------------------------
// Binding group

struct BindingGroup {
  std::vector<std::map<int, Morphism>> classes;  // class -> its member in each G_a
  std::vector<std::vector<int>> table;           // table[i][j] = class of sigma_i after sigma_j
  int identity = 0;
  bool law_commute = false;     // sigma.f = f.sigma
  bool law_compose = false;     // (g f).sigma = g (f.sigma)
  bool law_product = false;     // f.(sigma tau) = (f.sigma).tau

  int order() const { return static_cast<int>(classes.size()); }
  bool is_abelian() const {
    for (int i = 0; i < order(); ++i)
      for (int j = 0; j < order(); ++j)
        if (table[i][j] != table[j][i]) return false;
    return true;
  }
  int class_of(const Morphism& loop) const {
    for (int k = 0; k < order(); ++k)
      if (classes[k].at(loop.src) == loop) return k;
    invalid_input(to_string(loop) + " is not an object automorphism");
  }
  Morphism right(const FiniteGroupoid& g, const Morphism& f, int k) const { return g.compose(f, classes[k].at(f.src)); }
  Morphism left(const FiniteGroupoid& g, const Morphism& f, int k) const { return g.compose(classes[k].at(f.dst), f); }
};

inline BindingGroup binding_group(const FiniteGroupoid& g) {
  if (g.objects.empty()) invalid_input("empty groupoid");
  const int a0 = g.objects.front();
  BindingGroup bg;
  for (const Morphism& sigma : g.hom(a0, a0)) {
    std::map<int, Morphism> cls;
    cls[a0] = sigma;
    for (int b : g.objects) {
      if (b == a0) continue;
      std::optional<Morphism> img;
      for (const Morphism& f : g.hom(a0, b)) {
        Morphism c = g.compose(f, g.compose(sigma, g.inverse(f)));
        if (img && *img != c)
          invalid_input("conjugation class of " + to_string(sigma) + " depends on the morphism: groupoid is not abelian");
        img = c;
      }
      cls[b] = *img;
    }
    bg.classes.push_back(cls);
  }
  // ~ must be well defined between every pair of objects, not only from a0
  for (int a : g.objects)
    for (int b : g.objects)
      for (const Morphism& sigma : g.hom(a, a))
        for (const Morphism& f : g.hom(a, b)) {
          Morphism c = g.compose(f, g.compose(sigma, g.inverse(f)));
          bool same = false;
          for (const auto& cls : bg.classes)
            if (cls.at(a) == sigma && cls.at(b) == c) same = true;
          if (!same) invalid_input("relation ~ is not an equivalence: groupoid is not abelian");
        }
  const int n = bg.order();
  bg.table.assign(n, std::vector<int>(n, -1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Morphism p = g.compose(bg.classes[i].at(a0), bg.classes[j].at(a0));
      bg.table[i][j] = bg.class_of(p);
      for (int b : g.objects)
        if (g.compose(bg.classes[i].at(b), bg.classes[j].at(b)) != bg.classes[bg.table[i][j]].at(b))
          internal_error("binding group operation depends on the object");
    }
  bg.identity = bg.class_of(g.id(a0));

  bg.law_commute = bg.law_compose = bg.law_product = true;
  for (const Morphism& f : g.morphisms)
    for (int k = 0; k < n; ++k) {
      if (bg.left(g, f, k) != bg.right(g, f, k)) bg.law_commute = false;
      for (int c : g.objects)
        for (const Morphism& h : g.hom(f.dst, c))
          if (bg.right(g, g.compose(h, f), k) != g.compose(h, bg.right(g, f, k))) bg.law_compose = false;
      for (int l = 0; l < n; ++l)
        if (bg.right(g, f, bg.table[k][l]) != bg.right(g, bg.right(g, f, k), l)) bg.law_product = false;
    }
  return bg;
}

struct AbelianCriterion {
  bool hypothesis = false;  // Mor(a,b) is one orbit over acl(a) acl(b)
  bool conclusion = false;  // G_a abelian
  bool holds() const { return !hypothesis || conclusion; }
};

inline AbelianCriterion check_abelian_criterion(const FiniteGroupoid& g, const Structure& s, int a, int b) {
  if (a == b) invalid_input("criterion needs two distinct objects");
  if (!s.has_vertex(a) || !s.has_vertex(b)) invalid_input("objects must be vertices of the structure");
  AbelianCriterion out;
  auto grp = aut_group(s, ClosedSet({a, b}),
                       concat(acl_of_vertices(s, {a}).elements(), acl_of_vertices(s, {b}).elements()));
  std::set<Element> fibers;
  for (const Morphism& f : g.hom(a, b)) fibers.insert(f.fiber());
  out.hypothesis = grp.orbit(*fibers.begin()) == fibers;
  out.conclusion = true;
  for (const Morphism& x : g.hom(a, a))
    for (const Morphism& y : g.hom(a, a))
      if (g.compose(x, y) != g.compose(y, x)) out.conclusion = false;
  return out;
}

// ---------------------------------------------------------------------------
// Commuting regular actions

struct ActionIsomorphism {
  int basepoint = 0;
  std::vector<int> map;  // element of the first group -> element of the second
};

namespace detail {

inline void require_regular(const std::vector<std::vector<int>>& act, int n, const std::string& name) {
  for (const auto& row : act)
    if (static_cast<int>(row.size()) != n) invalid_input(name + " action table has the wrong width");
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      int hits = 0;
      for (const auto& row : act) {
        if (row[x] < 0 || row[x] >= n) invalid_input(name + " action leaves the set");
        hits += row[x] == y;
      }
      if (hits != 1)
        invalid_input(name + " action is not regular at the pair (" + std::to_string(x) + "," + std::to_string(y) + ")");
    }
}

// index of the element acting as p then q (q after p) in a regular action
inline int product(const std::vector<std::vector<int>>& act, int q, int p) {
  for (std::size_t k = 0; k < act.size(); ++k) {
    bool same = true;
    for (std::size_t x = 0; x < act[k].size() && same; ++x) same = act[k][x] == act[q][act[p][x]];
    if (same) return static_cast<int>(k);
  }
  invalid_input("action table is not closed under composition");
}

}  // namespace detail

// act1[g][x] = g.x, act2[h][x] = h.x on X = {0..n-1}. The basepoint map
// g -> (h with h.x0 = g.x0) reverses products, so its inverse is returned.
inline ActionIsomorphism check_commuting_regular_actions(int n, const std::vector<std::vector<int>>& act1,
                                                         const std::vector<std::vector<int>>& act2) {
  if (n <= 0) invalid_input("action set must be non-empty");
  detail::require_regular(act1, n, "first");
  detail::require_regular(act2, n, "second");
  for (std::size_t g = 0; g < act1.size(); ++g)
    for (std::size_t h = 0; h < act2.size(); ++h)
      for (int x = 0; x < n; ++x)
        if (act1[g][act2[h][x]] != act2[h][act1[g][x]])
          invalid_input("actions do not commute at the pair (" + std::to_string(g) + "," + std::to_string(h) + ")");
  ActionIsomorphism iso;
  const int x0 = 0;
  std::vector<int> phi(act1.size());
  for (std::size_t g = 0; g < act1.size(); ++g)
    for (std::size_t h = 0; h < act2.size(); ++h)
      if (act2[h][x0] == act1[g][x0]) phi[g] = static_cast<int>(h);
  iso.map.resize(act1.size());
  for (std::size_t g = 0; g < act1.size(); ++g)
    for (std::size_t h = 0; h < act2.size(); ++h)
      if (act2[h][act2[phi[g]][x0]] == x0) iso.map[g] = static_cast<int>(h);
  std::set<int> seen(iso.map.begin(), iso.map.end());
  if (seen.size() != act1.size() || act1.size() != act2.size()) internal_error("basepoint map is not a bijection");
  for (std::size_t p = 0; p < act1.size(); ++p)
    for (std::size_t q = 0; q < act1.size(); ++q) {
      int pq = detail::product(act1, static_cast<int>(q), static_cast<int>(p));
      if (iso.map[pq] != detail::product(act2, iso.map[q], iso.map[p])) internal_error("basepoint map is not a homomorphism");
    }
  return iso;
}

// The binding group and Aut(f12 / a1 a2), both acting on the fibers over a1 a2.
struct BindingVsAut {
  std::vector<Element> fibers;
  std::vector<std::vector<int>> binding_action;
  std::vector<std::vector<int>> aut_action;
  ActionIsomorphism iso;
};

inline BindingVsAut compare_binding_with_aut(const FiniteGroupoid& g, const BindingGroup& bg, const Structure& s,
                                             const SymmetricWitness& w) {
  const int a1 = w.objects[0], a2 = w.objects[1];
  auto aut = aut_group(s, ClosedSet({a1, a2}), {Element::vertex(a1), Element::vertex(a2)});
  BindingVsAut out;
  std::set<Element> orbit = aut.orbit(w.fibers[0]);
  out.fibers.assign(orbit.begin(), orbit.end());
  auto pos = [&](const Element& e) {
    auto it = std::find(out.fibers.begin(), out.fibers.end(), e);
    if (it == out.fibers.end()) internal_error("action leaves the fibers over a1 a2");
    return static_cast<int>(it - out.fibers.begin());
  };
  for (int k = 0; k < bg.order(); ++k) {
    std::vector<int> row;
    for (const Element& e : out.fibers) row.push_back(pos(bg.left(g, Morphism{a1, a2, e.parity}, k).fiber()));
    out.binding_action.push_back(row);
  }
  std::set<std::vector<int>> perms;
  for (const PartialMap& m : aut.elements) {
    std::vector<int> row;
    for (const Element& e : out.fibers) row.push_back(pos(m.apply(e)));
    perms.insert(row);
  }
  out.aut_action.assign(perms.begin(), perms.end());
  out.iso = check_commuting_regular_actions(static_cast<int>(out.fibers.size()), out.binding_action, out.aut_action);
  return out;
}

// ---------------------------------------------------------------------------
// Twisting

struct TwistResult {
  SymmetricWitness witness;
  FiniteGroupoid groupoid;
  std::map<Morphism, Morphism> iso;  // original groupoid -> twisted groupoid
};

inline bool is_groupoid_isomorphism(const FiniteGroupoid& g, const FiniteGroupoid& h, const std::map<Morphism, Morphism>& m) {
  if (g.objects != h.objects || m.size() != g.morphisms.size()) return false;
  std::set<Morphism> img;
  for (const auto& [f, fi] : m) {
    if (fi.src != f.src || fi.dst != f.dst) return false;
    img.insert(fi);
  }
  if (img.size() != h.morphisms.size()) return false;
  for (const auto& [ij, k] : g.table)
    if (m.at(g.morphisms[k]) != h.compose(m.at(g.morphisms[ij.first]), m.at(g.morphisms[ij.second]))) return false;
  return true;
}

// f'_ij = f_ij.sigma_ij for binding-group classes sigma (one per pair), theta'
// precomposes each coordinate with sigma_ij inverse.
inline TwistResult twist_witness(const SymmetricWitness& w, const Structure& s, const std::array<int, 3>& sigma) {
  if (!w.full) invalid_input("twisting needs a full symmetric witness");
  FiniteGroupoid g = build_groupoid(w, s);
  BindingGroup bg = binding_group(g);
  for (int k : sigma)
    if (k < 0 || k >= bg.order()) invalid_input("binding group element out of range");
  TwistResult out;
  SymmetricWitness t = w;
  const std::array<std::pair<int, int>, 3> ends{{{0, 1}, {1, 2}, {0, 2}}};
  for (int i = 0; i < 3; ++i) {
    Morphism f{w.objects[ends[i].first], w.objects[ends[i].second], w.fibers[i].parity};
    Morphism moved = bg.right(g, f, sigma[i]);
    int inv = -1;
    for (int k = 0; k < bg.order(); ++k)
      if (bg.table[k][sigma[i]] == bg.identity) inv = k;
    Morphism back = bg.right(g, moved, inv);
    if (back != f) internal_error("binding group inverse does not undo the twist");
    t.fibers[i] = moved.fiber();
    t.offsets[i] = (w.offsets[i] + back.parity + moved.parity) & 1;
  }
  t.clauses = verify_witness(s, t.objects, t.fibers, t.offsets);
  t.full = t.clauses.full();
  if (!t.full) internal_error("twisted witness fails a witness clause");
  out.witness = t;
  out.groupoid = build_groupoid(t, s);
  // candidate isomorphisms: a uniform parity shift on non-loop morphisms
  for (int shift = 0; shift < 2; ++shift) {
    std::map<Morphism, Morphism> m;
    for (const Morphism& f : g.morphisms) m[f] = f.is_loop() ? f : Morphism{f.src, f.dst, (f.parity + shift) & 1};
    if (is_groupoid_isomorphism(g, out.groupoid, m)) {
      out.iso = std::move(m);
      return out;
    }
  }
  internal_error("no isomorphism between the original and the twisted groupoid");
}

// ---------------------------------------------------------------------------
// Aut(ab~ / acl(a) acl(b)) at a finite buffer

struct AutTower {
  int c = -1;
  std::vector<Element> tilde;          // ab~
  std::vector<std::vector<int>> perms;  // distinct restrictions, as permutations of tilde
  std::vector<std::vector<int>> table;
  bool dcl_exact = true;
  bool abelian = true;
  int order() const { return static_cast<int>(perms.size()); }
};

inline AutTower aut_tower(const Structure& s, int a, int b, int buffer, std::uint64_t seed = 0) {
  if (buffer < 1) invalid_input("buffer too small to place the independent vertex c");
  if (a == b || !s.has_vertex(a) || !s.has_vertex(b)) invalid_input("a and b must be distinct vertices");
  std::vector<int> added;
  Structure buf = append_buffer(s, buffer, seed, &added);
  AutTower out;
  out.c = added.front();
  std::vector<Element> base = concat(acl_of_vertices(buf, {a, out.c}).elements(), acl_of_vertices(buf, {b, out.c}).elements());
  DclResult d = dcl(buf, base);
  out.dcl_exact = d.exact;
  ClosedSet ab({a, b});
  for (const Element& e : d.elements)
    if (ab.contains(e)) out.tilde.push_back(e);
  auto grp = aut_group(buf, ab, concat(acl_of_vertices(buf, {a}).elements(), acl_of_vertices(buf, {b}).elements()));
  std::set<std::vector<int>> perms;
  for (const PartialMap& m : grp.elements) {
    std::vector<int> row;
    bool keeps = true;
    for (const Element& e : out.tilde) {
      auto it = std::find(out.tilde.begin(), out.tilde.end(), m.apply(e));
      if (it == out.tilde.end()) {
        keeps = false;
        break;
      }
      row.push_back(static_cast<int>(it - out.tilde.begin()));
    }
    if (keeps) perms.insert(row);
  }
  out.perms.assign(perms.begin(), perms.end());
  const int n = out.order();
  out.table.assign(n, std::vector<int>(n, -1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<int> p(out.tilde.size());
      for (std::size_t x = 0; x < p.size(); ++x) p[x] = out.perms[i][out.perms[j][x]];
      auto it = std::lower_bound(out.perms.begin(), out.perms.end(), p);
      if (it == out.perms.end() || *it != p) internal_error("restricted automorphisms are not closed");
      out.table[i][j] = static_cast<int>(it - out.perms.begin());
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (out.table[i][j] != out.table[j][i]) out.abelian = false;
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline json witness_to_json(const SymmetricWitness& w) {
  json j;
  j["objects"] = w.objects;
  j["fibers"] = json::array();
  for (const Element& e : w.fibers) j["fibers"].push_back(element_to_json(e));
  j["offsets"] = w.offsets;
  j["full"] = w.full;
  j["clauses"] = {{"in_closure", w.clauses.in_closure},   {"not_definable", w.clauses.not_definable},
                  {"same_type", w.clauses.same_type},     {"theta_unique", w.clauses.theta_unique},
                  {"isolated", w.clauses.isolated}};
  return j;
}

inline json morphism_to_json(const Morphism& m) { return json::array({m.src, m.dst, m.parity}); }

inline json groupoid_to_json(const FiniteGroupoid& g) {
  json j;
  j["objects"] = g.objects;
  j["morphisms"] = json::array();
  for (const Morphism& m : g.morphisms) j["morphisms"].push_back(morphism_to_json(m));
  j["composition"] = json::array();
  for (const auto& [gf, h] : g.table) j["composition"].push_back(json::array({gf.first, gf.second, h}));
  return j;
}

inline json binding_to_json(const BindingGroup& bg) {
  json j;
  j["order"] = bg.order();
  j["abelian"] = bg.is_abelian();
  j["identity"] = bg.identity;
  j["table"] = bg.table;
  j["classes"] = json::array();
  for (const auto& cls : bg.classes) {
    json c = json::array();
    for (const auto& [a, m] : cls) c.push_back(morphism_to_json(m));
    j["classes"].push_back(c);
  }
  j["laws"] = {{"left_equals_right", bg.law_commute}, {"compose", bg.law_compose}, {"product", bg.law_product}};
  return j;
}

}  // namespace amalgam
