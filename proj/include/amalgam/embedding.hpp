#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amalgam/structure.hpp"

namespace amalgam {

// Vertex injection plus one shift bit per source pair: the image of
// <ab, d> is <f(a)f(b), d + shift(ab)>.
struct PartialMap {
  std::map<int, int> vertex_map;
  std::map<Pair, int> shift;

  auto operator<=>(const PartialMap&) const = default;

  static PartialMap identity(const Region& r) {
    PartialMap m;
    for (int v : r.vertices) m.vertex_map[v] = v;
    for (const Pair& p : r.pairs) m.shift[p] = 0;
    return m;
  }
  static PartialMap identity(const ClosedSet& c) { return identity(Region(c)); }

  bool maps_vertex(int v) const { return vertex_map.count(v) > 0; }
  int operator()(int v) const {
    auto it = vertex_map.find(v);
    if (it == vertex_map.end()) invalid_input("vertex " + std::to_string(v) + " outside the map's domain");
    return it->second;
  }
  Pair map_pair(const Pair& p) const { return pair_of((*this)(p.a), (*this)(p.b)); }
  int shift_of(const Pair& p) const {
    auto it = shift.find(p);
    if (it == shift.end()) invalid_input("pair " + to_string(Element::pair(p)) + " outside the map's domain");
    return it->second;
  }
  Element apply(const Element& e) const {
    switch (e.sort) {
      case Sort::Vertex: return Element::vertex((*this)(e.a));
      case Sort::Pair: shift_of(e.pair_of()); return Element::pair(map_pair(e.pair_of()));
      case Sort::Fiber: return Element::fiber(map_pair(e.pair_of()), e.parity ^ shift_of(e.pair_of()));
    }
    return e;
  }

  Region domain() const {
    std::vector<int> vs;
    for (auto [v, w] : vertex_map) vs.push_back(v);
    std::vector<Pair> ps;
    for (auto [p, b] : shift) ps.push_back(p);
    return Region(vs, ps);
  }
  Region image() const {
    std::vector<int> vs;
    for (auto [v, w] : vertex_map) vs.push_back(w);
    std::vector<Pair> ps;
    for (auto [p, b] : shift) ps.push_back(map_pair(p));
    return Region(vs, ps);
  }
  bool injective() const {
    std::set<int> seen;
    for (auto [v, w] : vertex_map)
      if (!seen.insert(w).second) return false;
    return true;
  }
  bool is_identity() const {
    for (auto [v, w] : vertex_map)
      if (v != w) return false;
    for (auto [p, b] : shift)
      if (b) return false;
    return true;
  }
  void check_well_formed() const {
    for (auto [p, b] : shift) {
      if (!maps_vertex(p.a) || !maps_vertex(p.b)) invalid_input("shifted pair without vertex images");
      if (b != 0 && b != 1) invalid_input("shift must be 0 or 1");
    }
    if (!injective()) invalid_input("vertex map is not injective");
  }
};

// g after f, on the part of f's domain that g can continue.
inline PartialMap compose(const PartialMap& g, const PartialMap& f) {
  PartialMap out;
  for (auto [v, w] : f.vertex_map)
    if (g.maps_vertex(w)) out.vertex_map[v] = g(w);
  for (auto [p, b] : f.shift) {
    if (!g.maps_vertex(f(p.a)) || !g.maps_vertex(f(p.b))) continue;
    Pair q = f.map_pair(p);
    auto it = g.shift.find(q);
    if (it != g.shift.end()) out.shift[p] = b ^ it->second;
  }
  return out;
}

inline PartialMap inverse(const PartialMap& f) {
  if (!f.injective()) invalid_input("cannot invert a non-injective map");
  PartialMap out;
  for (auto [v, w] : f.vertex_map) out.vertex_map[w] = v;
  for (auto [p, b] : f.shift) out.shift[f.map_pair(p)] = b;
  return out;
}

inline PartialMap restrict_to(const PartialMap& f, const Region& r) {
  PartialMap out;
  for (int v : r.vertices) out.vertex_map[v] = f(v);
  for (const Pair& p : r.pairs) out.shift[p] = f.shift_of(p);
  return out;
}

// Union of maps; nullopt names the first disagreement through *conflict.
inline std::optional<PartialMap> merge_maps(const std::vector<PartialMap>& parts, std::string* conflict = nullptr) {
  PartialMap out;
  for (const PartialMap& m : parts) {
    for (auto [v, w] : m.vertex_map) {
      auto [it, fresh] = out.vertex_map.emplace(v, w);
      if (!fresh && it->second != w) {
        if (conflict) *conflict = "vertex " + std::to_string(v) + " sent to two images";
        return std::nullopt;
      }
    }
    for (auto [p, b] : m.shift) {
      auto [it, fresh] = out.shift.emplace(p, b);
      if (!fresh && it->second != b) {
        if (conflict) *conflict = "pair " + to_string(Element::pair(p)) + " given two shifts";
        return std::nullopt;
      }
    }
  }
  if (!out.injective()) {
    if (conflict) *conflict = "union is not injective on vertices";
    return std::nullopt;
  }
  return out;
}

struct ElementaryVerdict {
  bool ok = true;
  std::string reason;
  std::optional<Triple> triangle;  // source triangle carrying the failure
};

namespace detail {

struct ShiftSystem {
  std::vector<Pair> pairs;
  std::map<Pair, int> var;
  Gf2System sys{0};
  std::vector<std::optional<Triple>> row_triangle;

  explicit ShiftSystem(const std::vector<int>& vs) : pairs(pairs_over(vs)), sys(static_cast<int>(pairs.size())) {
    for (std::size_t i = 0; i < pairs.size(); ++i) var[pairs[i]] = static_cast<int>(i);
  }
  void pin(const Pair& p, int bit) {
    sys.add_row({var.at(p)}, bit != 0);
    row_triangle.push_back(std::nullopt);
  }
  void triangle(const Triple& t, int rhs) {
    sys.add_row({var.at({t[0], t[1]}), var.at({t[0], t[2]}), var.at({t[1], t[2]})}, (rhs & 1) != 0);
    row_triangle.push_back(t);
  }
};

// R-status match plus triangle equations over the closure of the domain vertices.
inline ElementaryVerdict shift_equations(const Structure& src, const Structure& dst, const PartialMap& m,
                                         const std::vector<int>& closure_vertices, ShiftSystem& ss) {
  for (const Triple& t : triples_over(closure_vertices)) {
    int c = src.status(t);
    int c2 = dst.status(m(t[0]), m(t[1]), m(t[2]));
    if ((c == kAbsent) != (c2 == kAbsent))
      return {false, "R-status differs on " + to_string(t), t};
    if (c != kAbsent) ss.triangle(t, c + c2);
  }
  for (auto [p, b] : m.shift) ss.pin(p, b);
  return {};
}

}  // namespace detail

// Elementary iff R-status is preserved on domain triangles and the given shifts
// complete to a Q-preserving shift vector on the closure of the domain.
inline ElementaryVerdict is_elementary(const Structure& src, const Structure& dst, const PartialMap& m) {
  m.check_well_formed();
  for (auto [v, w] : m.vertex_map) {
    if (!src.has_vertex(v)) return {false, "vertex " + std::to_string(v) + " not in the source", std::nullopt};
    if (!dst.has_vertex(w)) return {false, "vertex " + std::to_string(w) + " not in the target", std::nullopt};
  }
  std::vector<int> vs;
  for (auto [v, w] : m.vertex_map) vs.push_back(v);
  detail::ShiftSystem ss(vs);
  ElementaryVerdict v = detail::shift_equations(src, dst, m, vs, ss);
  if (!v.ok) return v;
  auto res = ss.sys.solve();
  if (res.feasible) return {};
  for (int r : res.certificate)
    if (ss.row_triangle[r]) return {false, "Q not preserved on " + to_string(*ss.row_triangle[r]), ss.row_triangle[r]};
  return {false, "inconsistent shifts", std::nullopt};
}

inline ElementaryVerdict is_elementary(const Structure& s, const PartialMap& m) { return is_elementary(s, s, m); }

// Direct scan: does m preserve Q on every compatible triple of fibers it maps?
inline bool preserves_Q_scan(const Structure& src, const Structure& dst, const PartialMap& m) {
  std::vector<int> vs;
  for (auto [v, w] : m.vertex_map) vs.push_back(v);
  for (const Triple& t : triples_over(vs)) {
    Pair p{t[0], t[1]}, q{t[0], t[2]}, r{t[1], t[2]};
    if (!m.shift.count(p) || !m.shift.count(q) || !m.shift.count(r)) continue;
    if ((src.status(t) == kAbsent) != (dst.status(m(t[0]), m(t[1]), m(t[2])) == kAbsent)) return false;
    for (int code = 0; code < 8; ++code) {
      Element x = Element::fiber(p, code & 1), y = Element::fiber(q, (code >> 1) & 1), z = Element::fiber(r, code >> 2);
      if (eval_Q(src, x, y, z) != eval_Q(dst, m.apply(x), m.apply(y), m.apply(z))) return false;
    }
  }
  return true;
}

struct ClosureExtension {
  PartialMap map;
  std::vector<Pair> chosen;  // shifts not forced by the data, set to 0
};

inline ClosureExtension extend_to_closure(const Structure& src, const Structure& dst, const PartialMap& m,
                                          const ClosedSet& target) {
  m.check_well_formed();
  Region dom = m.domain();
  if (!dom.subset_of(Region(target))) invalid_input("target must contain the map's domain");
  for (int v : target.vertices) {
    if (!src.has_vertex(v)) invalid_input("target vertex " + std::to_string(v) + " not in the source");
    if (!m.maps_vertex(v)) invalid_input("vertex " + std::to_string(v) + " of the target has no image");
    if (!dst.has_vertex(m(v))) invalid_input("image vertex " + std::to_string(m(v)) + " not in the target structure");
  }
  PartialMap core = m;
  for (auto it = core.vertex_map.begin(); it != core.vertex_map.end();)
    it = target.has_vertex(it->first) ? std::next(it) : core.vertex_map.erase(it);
  detail::ShiftSystem ss(target.vertices);
  ElementaryVerdict v = detail::shift_equations(src, dst, core, target.vertices, ss);
  if (!v.ok) throw Error(ErrorKind::NoExtension, "no elementary extension: " + v.reason);
  auto res = ss.sys.solve();
  if (!res.feasible) {
    for (int r : res.certificate)
      if (ss.row_triangle[r])
        throw Error(ErrorKind::NoExtension,
                    "no elementary extension: triangle equation fails on " + to_string(*ss.row_triangle[r]));
    throw Error(ErrorKind::NoExtension, "no elementary extension");
  }
  ClosureExtension out;
  out.map.vertex_map = core.vertex_map;
  for (std::size_t i = 0; i < ss.pairs.size(); ++i) {
    out.map.shift[ss.pairs[i]] = res.solution[i];
    if (!res.forced[i]) out.chosen.push_back(ss.pairs[i]);
  }
  return out;
}

inline ClosureExtension extend_to_closure(const Structure& s, const PartialMap& m, const ClosedSet& target) {
  return extend_to_closure(s, s, m, target);
}

struct AutomorphismGroup {
  std::vector<PartialMap> elements;  // sorted; identity included
  std::vector<std::vector<int>> table;  // table[i][j] = index of elements[i] after elements[j]
  int identity = 0;

  int order() const { return static_cast<int>(elements.size()); }
  int index_of(const PartialMap& m) const {
    auto it = std::lower_bound(elements.begin(), elements.end(), m);
    if (it == elements.end() || *it != m) return -1;
    return static_cast<int>(it - elements.begin());
  }
  int inverse_of(int i) const {
    for (int j = 0; j < order(); ++j)
      if (table[i][j] == identity) return j;
    return -1;
  }
  bool is_abelian() const {
    for (int i = 0; i < order(); ++i)
      for (int j = 0; j < i; ++j)
        if (table[i][j] != table[j][i]) return false;
    return true;
  }
  std::set<Element> orbit(const Element& e) const {
    std::set<Element> out;
    for (const PartialMap& m : elements) out.insert(m.apply(e));
    return out;
  }
};

// All elementary self-maps of moving that fix the given elements.
inline AutomorphismGroup aut_group(const Structure& s, const ClosedSet& moving, const std::vector<Element>& fixed,
                                   std::uint64_t max_elems = enumeration_cap()) {
  for (const Element& e : fixed) {
    require_member(s, e);
    if (!moving.contains(e)) invalid_input("fixed element " + to_string(e) + " outside the moving set");
  }
  Structure sub = induced(s, moving.vertices);
  SymmetryQuery q;
  q.max_candidates = max_elems;
  std::set<Pair> setwise;
  for (const Element& e : fixed) {
    if (e.sort == Sort::Vertex) q.vertex_images[e.a] = e.a;
    if (e.sort != Sort::Vertex) setwise.insert(e.pair_of());
    if (e.sort == Sort::Fiber) q.required_shift[e.pair_of()] = 0;
  }
  q.setwise_pairs.assign(setwise.begin(), setwise.end());
  const std::vector<Pair> pairs = pairs_over(sub.vertices);
  AutomorphismGroup g;
  bool overflow = false;
  auto st = enumerate_symmetries(sub, q, [&](const std::vector<int>& perm, const Gf2System::Result& r) {
    std::size_t kdim = r.kernel.size();
    if (kdim > 20 || g.elements.size() + (std::size_t{1} << kdim) > max_elems) {
      overflow = true;
      return false;
    }
    PartialMap base;
    for (std::size_t i = 0; i < sub.vertices.size(); ++i) base.vertex_map[sub.vertices[i]] = sub.vertices[perm[i]];
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << kdim); ++mask) {
      PartialMap m = base;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        int bit = r.solution[k];
        for (std::size_t j = 0; j < kdim; ++j)
          if ((mask >> j) & 1) bit ^= r.kernel[j][k];
        m.shift[pairs[k]] = bit;
      }
      g.elements.push_back(std::move(m));
    }
    return true;
  });
  if (overflow || st.truncated)
    throw Error(ErrorKind::ResourceLimit, "automorphism enumeration exceeds " + std::to_string(max_elems) + " maps");
  std::sort(g.elements.begin(), g.elements.end());
  const int n = g.order();
  g.identity = g.index_of(PartialMap::identity(moving));
  if (g.identity < 0) internal_error("identity missing from automorphism group");
  if (static_cast<std::uint64_t>(n) * n <= max_elems * 16) {
    g.table.assign(n, std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        int k = g.index_of(compose(g.elements[i], g.elements[j]));
        if (k < 0) internal_error("automorphisms not closed under composition");
        g.table[i][j] = k;
      }
  }
  return g;
}

inline json map_to_json(const PartialMap& m) {
  json vm = json::array(), sh = json::array();
  for (auto [v, w] : m.vertex_map) vm.push_back({v, w});
  for (auto [p, b] : m.shift) sh.push_back({{"pair", {p.a, p.b}}, {"bit", b}});
  return {{"vertex_map", vm}, {"shift", sh}};
}

inline PartialMap map_from_json(const json& j) {
  if (!j.is_object()) invalid_input("map must be a JSON object");
  PartialMap m;
  if (j.contains("vertex_map")) {
    if (!j["vertex_map"].is_array()) invalid_input("vertex_map must be an array");
    for (const auto& e : j["vertex_map"]) {
      std::vector<int> vw = int_list(e, "vertex_map entry");
      if (vw.size() != 2) invalid_input("vertex_map entries are [src, dst]");
      if (!m.vertex_map.emplace(vw[0], vw[1]).second) invalid_input("vertex mapped twice");
    }
  }
  if (j.contains("shift")) {
    if (!j["shift"].is_array()) invalid_input("shift must be an array");
    for (const auto& e : j["shift"]) {
      if (!e.is_object() || !e.contains("pair") || !e.contains("bit")) invalid_input("bad shift entry");
      std::vector<int> p = int_list(e["pair"], "shift pair");
      if (p.size() != 2) invalid_input("shift pair needs two vertices");
      if (!e["bit"].is_number_integer()) invalid_input("shift bit must be 0 or 1");
      if (!m.shift.emplace(pair_of(p[0], p[1]), e["bit"].get<int>()).second) invalid_input("pair shifted twice");
    }
  }
  m.check_well_formed();
  return m;
}

}  // namespace amalgam
