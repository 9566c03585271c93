#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "amalgam/errors.hpp"
#include "amalgam/gf2.hpp"

namespace amalgam {

using json = nlohmann::json;

enum class Flavor { Example1, Example2 };

inline const char* flavor_name(Flavor f) { return f == Flavor::Example1 ? "example1" : "example2"; }

inline Flavor parse_flavor(const std::string& s) {
  if (s == "example1") return Flavor::Example1;
  if (s == "example2") return Flavor::Example2;
  invalid_input("unknown flavor '" + s + "'");
}

// Triangle status: kAbsent (R fails) or the base bit c.
constexpr int kAbsent = -1;

struct Pair {
  int a = 0;
  int b = 0;
  auto operator<=>(const Pair&) const = default;
};

inline Pair pair_of(int x, int y) {
  if (x == y) invalid_input("pair needs two distinct vertices, got " + std::to_string(x) + " twice");
  return x < y ? Pair{x, y} : Pair{y, x};
}

using Triple = std::array<int, 3>;

inline Triple triple_of(int x, int y, int z) {
  Triple t{x, y, z};
  std::sort(t.begin(), t.end());
  if (t[0] == t[1] || t[1] == t[2]) invalid_input("triple needs three distinct vertices");
  return t;
}

enum class Sort : std::uint8_t { Vertex = 0, Pair = 1, Fiber = 2 };

// Vertex: a = id. Pair: a < b. Fiber: pair (a, b) with parity.
struct Element {
  Sort sort = Sort::Vertex;
  int a = 0;
  int b = -1;
  int parity = 0;

  static Element vertex(int v) { return {Sort::Vertex, v, -1, 0}; }
  static Element pair(Pair p) { return {Sort::Pair, p.a, p.b, 0}; }
  static Element fiber(Pair p, int d) { return {Sort::Fiber, p.a, p.b, d & 1}; }

  Pair pair_of() const { return {a, b}; }
  auto operator<=>(const Element&) const = default;
};

inline std::string to_string(const Element& e) {
  switch (e.sort) {
    case Sort::Vertex: return std::to_string(e.a);
    case Sort::Pair: return "{" + std::to_string(e.a) + "," + std::to_string(e.b) + "}";
    case Sort::Fiber:
      return "<" + std::to_string(e.a) + std::to_string(e.b) + "," + std::to_string(e.parity) + ">";
  }
  return "?";
}

inline std::string to_string(const Triple& t) {
  return "{" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]) + "}";
}

inline std::vector<Pair> pairs_over(const std::vector<int>& vs) {
  std::vector<Pair> out;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j) out.push_back(pair_of(vs[i], vs[j]));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Triple> triples_over(const std::vector<int>& vs) {
  std::vector<Triple> out;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j)
      for (std::size_t k = j + 1; k < vs.size(); ++k) out.push_back(triple_of(vs[i], vs[j], vs[k]));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct Structure {
  Flavor flavor = Flavor::Example1;
  std::vector<int> vertices;   // sorted, unique
  std::map<Triple, int> base;  // total on 3-subsets

  bool has_vertex(int v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }

  int status(int x, int y, int z) const { return status(triple_of(x, y, z)); }
  int status(const Triple& t) const {
    auto it = base.find(t);
    if (it == base.end()) invalid_input("no triangle " + to_string(t) + " in structure");
    return it->second;
  }

  bool contains(const Element& e) const {
    if (e.sort == Sort::Vertex) return has_vertex(e.a);
    if (e.a >= e.b || !has_vertex(e.a) || !has_vertex(e.b)) return false;
    return e.sort == Sort::Pair || e.parity == 0 || e.parity == 1;
  }

  int max_vertex() const { return vertices.empty() ? -1 : vertices.back(); }

  bool operator==(const Structure&) const = default;
};

// Omitted triangles get the flavor default: Bit(0) for Example1, Absent for Example2.
inline Structure make_structure(Flavor f, std::vector<int> vertices) {
  Structure s;
  s.flavor = f;
  s.vertices = sorted_unique(std::move(vertices));
  for (const Triple& t : triples_over(s.vertices)) s.base[t] = (f == Flavor::Example1) ? 0 : kAbsent;
  return s;
}

// The closed substructure generated by a vertex set: the vertices, every pair
// over them and both fibers over each pair.
struct ClosedSet {
  std::vector<int> vertices;

  ClosedSet() = default;
  explicit ClosedSet(std::vector<int> vs) : vertices(sorted_unique(std::move(vs))) {}

  bool has_vertex(int v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }
  bool contains(const Element& e) const {
    if (e.sort == Sort::Vertex) return has_vertex(e.a);
    return has_vertex(e.a) && has_vertex(e.b);
  }
  std::vector<Element> elements() const {
    std::vector<Element> out;
    for (int v : vertices) out.push_back(Element::vertex(v));
    for (const Pair& p : pairs_over(vertices)) {
      out.push_back(Element::pair(p));
      out.push_back(Element::fiber(p, 0));
      out.push_back(Element::fiber(p, 1));
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t size() const {
    std::size_t n = vertices.size();
    return n + 3 * (n * (n - 1) / 2);
  }
  bool operator==(const ClosedSet&) const = default;
};

// A union of closures: vertices plus selected pairs (each with both fibers).
// Skeletal functor values live here; a ClosedSet is the Region with every pair.
struct Region {
  std::vector<int> vertices;
  std::vector<Pair> pairs;

  Region() = default;
  Region(std::vector<int> vs, std::vector<Pair> ps) : vertices(sorted_unique(std::move(vs))), pairs(std::move(ps)) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    for (const Pair& p : pairs)
      if (!has_vertex(p.a) || !has_vertex(p.b)) invalid_input("region pair outside its vertex set");
  }
  explicit Region(const ClosedSet& c) : vertices(c.vertices), pairs(pairs_over(c.vertices)) {}

  static Region vertices_only(std::vector<int> vs) { return Region(std::move(vs), {}); }

  bool has_vertex(int v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }
  bool has_pair(const Pair& p) const { return std::binary_search(pairs.begin(), pairs.end(), p); }
  bool contains(const Element& e) const {
    if (e.sort == Sort::Vertex) return has_vertex(e.a);
    return has_pair(e.pair_of());
  }
  bool is_closed() const { return pairs.size() == vertices.size() * (vertices.size() - (vertices.empty() ? 0 : 1)) / 2; }
  ClosedSet closure() const { return ClosedSet(vertices); }
  std::vector<Element> elements() const {
    std::vector<Element> out;
    for (int v : vertices) out.push_back(Element::vertex(v));
    for (const Pair& p : pairs) {
      out.push_back(Element::pair(p));
      out.push_back(Element::fiber(p, 0));
      out.push_back(Element::fiber(p, 1));
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  bool subset_of(const Region& o) const {
    return std::includes(o.vertices.begin(), o.vertices.end(), vertices.begin(), vertices.end()) &&
           std::includes(o.pairs.begin(), o.pairs.end(), pairs.begin(), pairs.end());
  }
  bool operator==(const Region&) const = default;
};

inline Region region_union(const Region& x, const Region& y) {
  std::vector<int> vs = x.vertices;
  vs.insert(vs.end(), y.vertices.begin(), y.vertices.end());
  std::vector<Pair> ps = x.pairs;
  ps.insert(ps.end(), y.pairs.begin(), y.pairs.end());
  return Region(vs, ps);
}

inline void require_member(const Structure& s, const Element& e) {
  if (!s.contains(e)) invalid_input("element " + to_string(e) + " is not in the structure");
}

// Q is the parity condition on a Bit triangle; Absent triangles never satisfy it.
inline bool eval_Q(const Structure& s, const Element& x, const Element& y, const Element& z) {
  for (const Element* e : {&x, &y, &z}) {
    if (e->sort != Sort::Fiber) invalid_input("Q takes fiber elements, got " + to_string(*e));
    require_member(s, *e);
  }
  Pair p = x.pair_of(), q = y.pair_of(), r = z.pair_of();
  if (p == q || p == r || q == r) return false;
  std::vector<int> vs = sorted_unique({p.a, p.b, q.a, q.b, r.a, r.b});
  if (vs.size() != 3) return false;
  int c = s.status(vs[0], vs[1], vs[2]);
  if (c == kAbsent) return false;
  return ((x.parity + y.parity + z.parity) & 1) == c;
}

// Vertex support: vertices, endpoints of pairs, endpoints of the projection of fibers.
inline std::vector<int> support(const std::vector<Element>& c) {
  std::vector<int> vs;
  for (const Element& e : c) {
    vs.push_back(e.a);
    if (e.sort != Sort::Vertex) vs.push_back(e.b);
  }
  return sorted_unique(vs);
}

inline ClosedSet acl(const Structure& s, const std::vector<Element>& c) {
  for (const Element& e : c) require_member(s, e);
  return ClosedSet(support(c));
}

inline ClosedSet acl_of_vertices(const Structure& s, const std::vector<int>& vs) {
  std::vector<Element> c;
  for (int v : vs) c.push_back(Element::vertex(v));
  return acl(s, c);
}

inline std::vector<Element> to_elements(const std::vector<int>& vs) {
  std::vector<Element> out;
  for (int v : vs) out.push_back(Element::vertex(v));
  return out;
}

inline std::vector<Element> concat(std::vector<Element> a, const std::vector<Element>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// a is independent from b over base iff acl(a base) and acl(b base) meet inside acl(base).
inline bool is_independent(const Structure& s, const std::vector<Element>& a, const std::vector<Element>& b,
                           const std::vector<Element>& base) {
  ClosedSet left = acl(s, concat(a, base)), right = acl(s, concat(b, base)), bottom = acl(s, base);
  std::vector<int> meet;
  std::set_intersection(left.vertices.begin(), left.vertices.end(), right.vertices.begin(), right.vertices.end(),
                        std::back_inserter(meet));
  return std::includes(bottom.vertices.begin(), bottom.vertices.end(), meet.begin(), meet.end());
}

// ---------------------------------------------------------------------------
// Automorphism enumeration. A self-map of a structure is a vertex permutation
// plus a shift bit per pair; it preserves Q iff every Bit triangle T satisfies
// shift(ab)+shift(ac)+shift(bc) = c(T) + c(image of T), and R-status is kept.

struct SymmetryQuery {
  std::map<int, int> vertex_images;  // forced images; v -> v fixes v
  std::vector<Pair> setwise_pairs;   // pairs mapped onto themselves
  std::map<Pair, int> required_shift;  // shift bit demanded on a source pair
  std::uint64_t max_candidates = enumeration_cap();
};

struct SymmetryStats {
  std::uint64_t candidates = 0;
  bool truncated = false;
};

namespace detail {

struct DenseView {
  int n = 0;
  std::vector<int> ids;
  std::map<int, int> pos;
  std::vector<int> tri;     // n^3, kAbsent / 0 / 1, -2 on degenerate
  std::vector<int> pindex;  // n^2 -> pair index
  std::vector<Pair> pair_pos;

  explicit DenseView(const Structure& s) : n(static_cast<int>(s.vertices.size())), ids(s.vertices) {
    for (int i = 0; i < n; ++i) pos[ids[i]] = i;
    tri.assign(static_cast<std::size_t>(n) * n * n, -2);
    for (const auto& [t, c] : s.base) {
      int p[3] = {pos.at(t[0]), pos.at(t[1]), pos.at(t[2])};
      int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      for (auto& q : perm) tri[(p[q[0]] * n + p[q[1]]) * n + p[q[2]]] = c;
    }
    pindex.assign(static_cast<std::size_t>(n) * n, -1);
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        pindex[i * n + j] = pindex[j * n + i] = k++;
        pair_pos.push_back({i, j});
      }
  }
  int t(int i, int j, int k) const { return tri[(i * n + j) * n + k]; }
  int p(int i, int j) const { return pindex[i * n + j]; }
  int npairs() const { return n * (n - 1) / 2; }
};

}  // namespace detail

// Calls visit(perm, solution) for every vertex permutation (perm[i] = image
// position of vertices[i]) whose shift system is solvable.
inline SymmetryStats enumerate_symmetries(
    const Structure& s, const SymmetryQuery& q,
    const std::function<bool(const std::vector<int>&, const Gf2System::Result&)>& visit) {
  detail::DenseView d(s);
  const int n = d.n;
  std::vector<int> forced(n, -1);
  for (auto [v, w] : q.vertex_images) {
    auto it = d.pos.find(v);
    auto jt = d.pos.find(w);
    if (it == d.pos.end() || jt == d.pos.end())
      invalid_input("vertex image " + std::to_string(v) + "->" + std::to_string(w) + " outside the structure");
    forced[it->second] = jt->second;
  }
  std::vector<std::pair<int, int>> setwise;
  for (const Pair& p : q.setwise_pairs) setwise.push_back({d.pos.at(p.a), d.pos.at(p.b)});
  std::vector<std::pair<int, bool>> demanded;
  for (auto [p, bit] : q.required_shift) {
    if (!d.pos.count(p.a) || !d.pos.count(p.b)) invalid_input("required shift on a pair outside the structure");
    demanded.push_back({d.p(d.pos.at(p.a), d.pos.at(p.b)), bit != 0});
  }

  std::vector<char> reserved(n, 0);
  for (int i = 0; i < n; ++i)
    if (forced[i] >= 0) {
      if (reserved[forced[i]]) invalid_input("two vertices forced onto one image");
      reserved[forced[i]] = 1;
    }

  SymmetryStats st;
  std::vector<int> perm(n, -1);
  std::vector<char> used(n, 0);
  bool stop = false;

  auto consistent = [&](int i) {
    for (auto [u, v] : setwise) {
      if (u > i || v > i) continue;
      if (u != i && v != i) continue;
      int pu = perm[u], pv = perm[v];
      if (!((pu == u && pv == v) || (pu == v && pv == u))) return false;
    }
    for (int j = 0; j < i; ++j)
      for (int k = j + 1; k < i; ++k) {
        int a = d.t(j, k, i), b = d.t(perm[j], perm[k], perm[i]);
        if ((a == kAbsent) != (b == kAbsent)) return false;
      }
    // four Bit triangles on a 4-set: their equations sum to zero on the left
    for (int j = 0; j < i; ++j)
      for (int k = j + 1; k < i; ++k)
        for (int l = k + 1; l < i; ++l) {
          int t1 = d.t(j, k, l), t2 = d.t(j, k, i), t3 = d.t(j, l, i), t4 = d.t(k, l, i);
          if (t1 == kAbsent || t2 == kAbsent || t3 == kAbsent || t4 == kAbsent) continue;
          int u1 = d.t(perm[j], perm[k], perm[l]), u2 = d.t(perm[j], perm[k], perm[i]);
          int u3 = d.t(perm[j], perm[l], perm[i]), u4 = d.t(perm[k], perm[l], perm[i]);
          if (((t1 + t2 + t3 + t4 + u1 + u2 + u3 + u4) & 1) != 0) return false;
        }
    return true;
  };

  std::function<void(int)> rec = [&](int i) {
    if (stop) return;
    if (i == n) {
      if (++st.candidates > q.max_candidates) {
        st.truncated = true;
        stop = true;
        return;
      }
      Gf2System sys(d.npairs());
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          for (int c = b + 1; c < n; ++c) {
            int x = d.t(a, b, c);
            if (x == kAbsent) continue;
            int y = d.t(perm[a], perm[b], perm[c]);
            sys.add_row({d.p(a, b), d.p(a, c), d.p(b, c)}, ((x + y) & 1) != 0);
          }
      for (auto [z, bit] : demanded) sys.add_row({z}, bit);
      auto res = sys.solve();
      if (res.feasible && !visit(perm, res)) stop = true;
      return;
    }
    for (int img = 0; img < n; ++img) {
      if (used[img]) continue;
      if (forced[i] >= 0 ? img != forced[i] : reserved[img]) continue;
      perm[i] = img;
      used[img] = 1;
      if (consistent(i)) rec(i + 1);
      used[img] = 0;
      perm[i] = -1;
      if (stop) return;
    }
  };
  rec(0);
  return st;
}

struct DclResult {
  std::set<Element> elements;
  bool exact = true;  // false: enumeration cap hit, elements is the propagation fixpoint
  std::uint64_t candidates = 0;
};

// Sound under-approximation: close c under the definable operations of the
// language (pair of two vertices, projection, endpoints, common endpoint of two
// pairs, the other fiber element, and the unique Q-completion on Bit triangles).
inline std::set<Element> dcl_fixpoint(const Structure& s, const std::vector<Element>& c) {
  for (const Element& e : c) require_member(s, e);
  std::set<Element> d(c.begin(), c.end());
  bool changed = true;
  auto add = [&](const Element& e) {
    if (d.insert(e).second) changed = true;
  };
  while (changed) {
    changed = false;
    std::vector<Element> cur(d.begin(), d.end());
    std::vector<int> vs;
    std::vector<Pair> ps;
    std::vector<Element> fs;
    for (const Element& e : cur) {
      if (e.sort == Sort::Vertex) vs.push_back(e.a);
      if (e.sort == Sort::Pair) ps.push_back(e.pair_of());
      if (e.sort == Sort::Fiber) fs.push_back(e);
    }
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = i + 1; j < vs.size(); ++j) add(Element::pair(pair_of(vs[i], vs[j])));
    for (const Element& f : fs) {
      add(Element::pair(f.pair_of()));
      add(Element::fiber(f.pair_of(), f.parity ^ 1));
    }
    for (const Pair& p : ps) {
      if (std::find(vs.begin(), vs.end(), p.a) != vs.end()) add(Element::vertex(p.b));
      if (std::find(vs.begin(), vs.end(), p.b) != vs.end()) add(Element::vertex(p.a));
    }
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        const Pair &p = ps[i], &q = ps[j];
        for (int x : {p.a, p.b})
          if (x == q.a || x == q.b) add(Element::vertex(x));
      }
    for (const Element& x : fs)
      for (const Element& y : fs) {
        Pair p = x.pair_of(), q = y.pair_of();
        if (p == q) continue;
        std::vector<int> u = sorted_unique({p.a, p.b, q.a, q.b});
        if (u.size() != 3) continue;
        int c3 = s.status(u[0], u[1], u[2]);
        if (c3 == kAbsent) continue;
        int shared = (p.a == q.a || p.a == q.b) ? p.a : p.b;
        int o1 = (p.a == shared) ? p.b : p.a;
        int o2 = (q.a == shared) ? q.b : q.a;
        Pair r = pair_of(o1, o2);
        add(Element::fiber(r, (c3 + x.parity + y.parity) & 1));
      }
  }
  return d;
}

// Elements fixed by every automorphism of s fixing c pointwise.
inline DclResult dcl(const Structure& s, const std::vector<Element>& c, std::uint64_t max_candidates = enumeration_cap()) {
  for (const Element& e : c) require_member(s, e);
  SymmetryQuery q;
  q.max_candidates = max_candidates;
  std::set<Pair> setwise;
  for (const Element& e : c) {
    if (e.sort == Sort::Vertex) q.vertex_images[e.a] = e.a;
    if (e.sort != Sort::Vertex) setwise.insert(e.pair_of());
    if (e.sort == Sort::Fiber) q.required_shift[e.pair_of()] = 0;
  }
  q.setwise_pairs.assign(setwise.begin(), setwise.end());

  detail::DenseView d(s);
  const int n = d.n;
  std::vector<char> vfix(n, 1), pfix(d.npairs(), 1), ffix(d.npairs(), 1);
  auto st = enumerate_symmetries(s, q, [&](const std::vector<int>& perm, const Gf2System::Result& r) {
    for (int i = 0; i < n; ++i)
      if (perm[i] != i) vfix[i] = 0;
    for (int k = 0; k < d.npairs(); ++k) {
      auto [i, j] = d.pair_pos[k];
      bool same = (perm[i] == i && perm[j] == j) || (perm[i] == j && perm[j] == i);
      if (!same) {
        pfix[k] = 0;
        ffix[k] = 0;
      } else if (!(r.forced[k] && r.solution[k] == 0)) {
        ffix[k] = 0;
      }
    }
    return true;
  });
  DclResult out;
  out.candidates = st.candidates;
  if (st.truncated) {
    out.exact = false;
    out.elements = dcl_fixpoint(s, c);
    return out;
  }
  for (int i = 0; i < n; ++i)
    if (vfix[i]) out.elements.insert(Element::vertex(d.ids[i]));
  for (int k = 0; k < d.npairs(); ++k) {
    Pair p{d.ids[d.pair_pos[k].a], d.ids[d.pair_pos[k].b]};
    if (pfix[k]) out.elements.insert(Element::pair(p));
    if (ffix[k]) {
      out.elements.insert(Element::fiber(p, 0));
      out.elements.insert(Element::fiber(p, 1));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Explicit relational form, used to validate the axioms and to express
// corruptions. Fibers are indexed 2*pair_index + parity.

struct Relational {
  Flavor flavor = Flavor::Example1;
  std::vector<int> vertices;
  std::vector<std::uint8_t> r;             // per triangle index (Example2 only)
  std::vector<std::array<int, 3>> q;       // ordered fiber triples, set semantics

  int n() const { return static_cast<int>(vertices.size()); }
  int npairs() const { return n() * (n() - 1) / 2; }
  int nfibers() const { return 2 * npairs(); }
  int ntriangles() const { return n() * (n() - 1) * (n() - 2) / 6; }
};

namespace detail {

struct RelIndex {
  int n = 0;
  std::vector<std::pair<int, int>> pair_pos;
  std::vector<int> pidx;  // n*n
  std::vector<int> tidx;  // n*n*n, sorted positions only
  std::vector<std::array<int, 3>> tri_pos;

  explicit RelIndex(int n_) : n(n_) {
    pidx.assign(static_cast<std::size_t>(n) * n, -1);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        pidx[i * n + j] = pidx[j * n + i] = static_cast<int>(pair_pos.size());
        pair_pos.push_back({i, j});
      }
    tidx.assign(static_cast<std::size_t>(n) * n * n, -1);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          tidx[(i * n + j) * n + k] = static_cast<int>(tri_pos.size());
          tri_pos.push_back({i, j, k});
        }
  }
};

// For two pairs meeting in one vertex: their triangle, the third pair, and
// the slots (01, 02, 12 of the sorted triangle) of both pairs.
struct PairMeet {
  struct Entry {
    std::int32_t tri = -1;
    std::int16_t third = -1;
    std::int8_t slot_first = -1, slot_second = -1;
  };
  int np = 0;
  std::vector<Entry> at;

  explicit PairMeet(const RelIndex& ix) : np(static_cast<int>(ix.pair_pos.size())) {
    at.assign(static_cast<std::size_t>(np) * np, Entry{});
    for (int t = 0; t < static_cast<int>(ix.tri_pos.size()); ++t) {
      auto [i, j, k] = ix.tri_pos[t];
      const int canon[3] = {ix.pidx[i * ix.n + j], ix.pidx[i * ix.n + k], ix.pidx[j * ix.n + k]};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          if (a == b) continue;
          Entry& e = at[static_cast<std::size_t>(canon[a]) * np + canon[b]];
          e.tri = t;
          e.third = static_cast<std::int16_t>(canon[3 - a - b]);
          e.slot_first = static_cast<std::int8_t>(a);
          e.slot_second = static_cast<std::int8_t>(b);
        }
    }
  }
};

struct RelTables {
  RelIndex ix;
  PairMeet meet;
  // up to 64 fibers: (a << 12 | b << 6 | c) -> triangle * 64 + mask bit, or -1
  static constexpr unsigned kOutside = 1u << 18;
  std::vector<std::int16_t> flat;

  explicit RelTables(int n) : ix(n), meet(ix) {
    const int nf = 2 * meet.np;
    if (nf > 64) return;
    static const int perm_code[3][3] = {{-1, 0, 1}, {2, -1, 3}, {4, 5, -1}};
    flat.assign(kOutside + 1, -1);
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b) {
        const auto& m = meet.at[static_cast<std::size_t>(a >> 1) * meet.np + (b >> 1)];
        if (m.tri < 0) continue;
        const int s0 = m.slot_first, s1 = m.slot_second, s2 = 3 - s0 - s1;
        for (int d = 0; d < 2; ++d) {
          const int c = 2 * m.third + d;
          const int code = ((a & 1) << s0) | ((b & 1) << s1) | (d << s2);
          flat[(a << 12) | (b << 6) | c] = static_cast<std::int16_t>(m.tri * 64 + perm_code[s0][s1] * 8 + code);
        }
      }
  }
};

// Index tables depend only on the vertex count; built once per count and thread.
inline const RelTables& rel_tables(int n) {
  thread_local std::map<int, std::unique_ptr<RelTables>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RelTables>(n);
  return *slot;
}

}  // namespace detail

inline Relational materialize(const Structure& s) {
  Relational rel;
  rel.flavor = s.flavor;
  rel.vertices = s.vertices;
  detail::RelIndex ix(rel.n());
  rel.r.assign(ix.tri_pos.size(), 0);
  for (std::size_t t = 0; t < ix.tri_pos.size(); ++t) {
    auto [i, j, k] = ix.tri_pos[t];
    int c = s.status(s.vertices[i], s.vertices[j], s.vertices[k]);
    if (s.flavor == Flavor::Example2) rel.r[t] = (c != kAbsent);
    if (c == kAbsent) continue;
    int pij = ix.pidx[i * ix.n + j], pik = ix.pidx[i * ix.n + k], pjk = ix.pidx[j * ix.n + k];
    for (int code = 0; code < 8; ++code) {
      int d0 = code & 1, d1 = (code >> 1) & 1, d2 = (code >> 2) & 1;
      if (((d0 + d1 + d2) & 1) != c) continue;
      std::array<int, 3> f{2 * pij + d0, 2 * pik + d1, 2 * pjk + d2};
      std::array<int, 3> o{0, 1, 2};
      do rel.q.push_back({f[o[0]], f[o[1]], f[o[2]]});
      while (std::next_permutation(o.begin(), o.end()));
    }
  }
  std::sort(rel.q.begin(), rel.q.end());
  return rel;
}

struct Violation {
  std::string kind;  // compatibility | requires_R | symmetry | one_flip | flavor | base
  std::string where;
  bool operator==(const Violation&) const = default;
};

struct AxiomReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the finite part of the axioms on the explicit tables: Q only on
// compatible triples (and on R-triangles for Example2), symmetry, and the
// one-flip rule on every triangle where it applies.
inline AxiomReport validate_axioms(const Relational& rel) {
  AxiomReport rep;
  const int n = rel.n();
  const detail::RelTables& tables = detail::rel_tables(n);
  const detail::RelIndex& ix = tables.ix;
  const int T = static_cast<int>(ix.tri_pos.size());
  std::vector<std::uint64_t> mask(T, 0);
  std::vector<std::array<int, 3>> bad;
  auto label = [&](int t) {
    auto [i, j, k] = ix.tri_pos[t];
    return to_string(Triple{rel.vertices[i], rel.vertices[j], rel.vertices[k]});
  };
  const detail::PairMeet& meet = tables.meet;
  const unsigned nf = static_cast<unsigned>(rel.nfibers());
  static const int perm_code[3][3] = {{-1, 0, 1}, {2, -1, 3}, {4, 5, -1}};
  std::uint64_t* mk = mask.data();
  if (!tables.flat.empty()) {
    const std::int16_t* flat = tables.flat.data();
    for (const auto& e : rel.q) {
      const unsigned e0 = static_cast<unsigned>(e[0]), e1 = static_cast<unsigned>(e[1]),
                     e2 = static_cast<unsigned>(e[2]);
      const unsigned at = (e0 | e1 | e2) < 64 ? (e0 << 12) | (e1 << 6) | e2 : detail::RelTables::kOutside;
      const int v = flat[at];
      if (v < 0) [[unlikely]] {
        bad.push_back(e);
        continue;
      }
      mk[v >> 6] |= std::uint64_t{1} << (v & 63);
    }
  } else {
    for (const auto& e : rel.q) {
      if (static_cast<unsigned>(e[0]) >= nf || static_cast<unsigned>(e[1]) >= nf ||
          static_cast<unsigned>(e[2]) >= nf) {
        bad.push_back(e);
        continue;
      }
      const auto& m = meet.at[static_cast<std::size_t>(e[0] >> 1) * meet.np + (e[1] >> 1)];
      if (m.tri < 0 || m.third != (e[2] >> 1)) {
        bad.push_back(e);
        continue;
      }
      const int s0 = m.slot_first, s1 = m.slot_second, s2 = 3 - s0 - s1;
      const int code = ((e[0] & 1) << s0) | ((e[1] & 1) << s1) | ((e[2] & 1) << s2);
      mk[m.tri] |= std::uint64_t{1} << (perm_code[s0][s1] * 8 + code);
    }
  }
  std::sort(bad.begin(), bad.end());
  bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
  for (const auto& e : bad)
    rep.violations.push_back({"compatibility", "(" + std::to_string(e[0]) + "," + std::to_string(e[1]) + "," +
                                                   std::to_string(e[2]) + ")"});
  for (int t = 0; t < T; ++t) {
    std::uint64_t m = mask[t];
    std::uint64_t row = m & 0xff;
    bool symmetric = true;
    for (int o = 1; o < 6; ++o)
      if (((m >> (8 * o)) & 0xff) != row) symmetric = false;
    if (!symmetric) rep.violations.push_back({"symmetry", label(t)});
    bool has_r = rel.flavor == Flavor::Example1 || rel.r[t];
    if (!has_r) {
      if (m != 0) rep.violations.push_back({"requires_R", label(t)});
      continue;
    }
    // one flip in any coordinate toggles Q: the row is exactly the odd or the even codes
    std::uint64_t rows[6];
    for (int o = 0; o < 6; ++o) rows[o] = (m >> (8 * o)) & 0xff;
    bool flip_ok = true;
    for (int o = 0; o < 6; ++o)
      if (rows[o] != 0x69 && rows[o] != 0x96) flip_ok = false;
    if (!flip_ok) rep.violations.push_back({"one_flip", label(t)});
  }
  return rep;
}

inline AxiomReport validate_axioms(const Structure& s) {
  AxiomReport rep;
  for (const Triple& t : triples_over(s.vertices)) {
    auto it = s.base.find(t);
    if (it == s.base.end()) {
      rep.violations.push_back({"base", "missing " + to_string(t)});
      continue;
    }
    int c = it->second;
    if (c != kAbsent && c != 0 && c != 1) rep.violations.push_back({"base", "bad status at " + to_string(t)});
    if (s.flavor == Flavor::Example1 && c == kAbsent)
      rep.violations.push_back({"flavor", "absent triangle " + to_string(t) + " in example1"});
    if (s.flavor == Flavor::Example2 && c == 1)
      rep.violations.push_back({"flavor", "bit 1 on " + to_string(t) + " in example2"});
  }
  if (s.base.size() != triples_over(s.vertices).size())
    rep.violations.push_back({"base", "triangles outside the vertex set"});
  if (!rep.ok()) return rep;
  return validate_axioms(materialize(s));
}

// ---------------------------------------------------------------------------
// JSON

inline json status_to_json(int c) { return c == kAbsent ? json("absent") : json{{"bit", c}}; }

inline int status_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "absent") return kAbsent;
  if (j.is_object() && j.size() == 1 && j.contains("bit") && j["bit"].is_number_integer()) {
    int b = j["bit"].get<int>();
    if (b == 0 || b == 1) return b;
  }
  invalid_input("bad triangle status " + j.dump());
}

inline json to_json(const Structure& s) {
  json base = json::array();
  for (const auto& [t, c] : s.base) base.push_back({{"triple", {t[0], t[1], t[2]}}, {"status", status_to_json(c)}});
  return {{"flavor", flavor_name(s.flavor)}, {"vertices", s.vertices}, {"base", base}};
}

inline std::vector<int> int_list(const json& j, const std::string& what) {
  if (!j.is_array()) invalid_input(what + " must be an array of integers");
  std::vector<int> out;
  for (const auto& x : j) {
    if (!x.is_number_integer()) invalid_input(what + " must be an array of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

inline Structure structure_from_json(const json& j) {
  if (!j.is_object()) invalid_input("structure must be a JSON object");
  if (!j.contains("flavor") || !j["flavor"].is_string()) invalid_input("structure needs a flavor");
  if (!j.contains("vertices")) invalid_input("structure needs vertices");
  Flavor f = parse_flavor(j["flavor"].get<std::string>());
  std::vector<int> vs = int_list(j["vertices"], "vertices");
  if (sorted_unique(vs).size() != vs.size()) invalid_input("duplicate vertex ids");
  for (int v : vs)
    if (v < 0) invalid_input("vertex ids must be non-negative");
  Structure s = make_structure(f, vs);
  if (j.contains("base")) {
    if (!j["base"].is_array()) invalid_input("base must be an array");
    std::set<Triple> seen;
    for (const auto& e : j["base"]) {
      if (!e.is_object() || !e.contains("triple") || !e.contains("status")) invalid_input("bad base entry");
      std::vector<int> t = int_list(e["triple"], "triple");
      if (t.size() != 3) invalid_input("triple must have three vertices");
      Triple tr = triple_of(t[0], t[1], t[2]);
      for (int v : tr)
        if (!s.has_vertex(v)) invalid_input("triple " + to_string(tr) + " uses an unknown vertex");
      if (!seen.insert(tr).second) invalid_input("triple " + to_string(tr) + " listed twice");
      s.base[tr] = status_from_json(e["status"]);
    }
  }
  return s;
}

inline json element_to_json(const Element& e) {
  switch (e.sort) {
    case Sort::Vertex: return e.a;
    case Sort::Pair: return json::array({e.a, e.b});
    case Sort::Fiber: return {{"pair", {e.a, e.b}}, {"parity", e.parity}};
  }
  return nullptr;
}

inline Structure induced(const Structure& s, const std::vector<int>& vs) {
  Structure out;
  out.flavor = s.flavor;
  out.vertices = sorted_unique(vs);
  for (int v : out.vertices)
    if (!s.has_vertex(v)) invalid_input("vertex " + std::to_string(v) + " not in structure");
  for (const Triple& t : triples_over(out.vertices)) out.base[t] = s.status(t);
  return out;
}

}  // namespace amalgam
