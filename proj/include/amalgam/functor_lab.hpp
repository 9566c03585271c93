#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "amalgam/builder.hpp"
#include "amalgam/embedding.hpp"
#include "amalgam/structure.hpp"

namespace amalgam {

using Subset = std::uint32_t;

inline int set_size(Subset s) { return std::popcount(s); }
inline bool is_subset(Subset a, Subset b) { return (a & ~b) == 0; }
inline std::vector<int> members(Subset s) {
  std::vector<int> out;
  for (int i = 0; s; ++i, s >>= 1)
    if (s & 1) out.push_back(i);
  return out;
}
inline Subset subset_of_list(const std::vector<int>& xs, int n) {
  Subset s = 0;
  for (int x : xs) {
    if (x < 0 || x >= n) invalid_input("index " + std::to_string(x) + " outside 0.." + std::to_string(n - 1));
    s |= Subset{1} << x;
  }
  return s;
}
inline std::string subset_name(Subset s) {
  std::string out = "{";
  for (int i : members(s)) out += (out.size() > 1 ? "," : "") + std::to_string(i);
  return out + "}";
}
// smaller sets first, then by bit pattern
inline bool subset_less(Subset a, Subset b) {
  return set_size(a) != set_size(b) ? set_size(a) < set_size(b) : a < b;
}

struct IndexFamily {
  int n = 0;
  std::vector<Subset> sets;

  static IndexFamily from_sets(int n, std::vector<Subset> sets) {
    if (n < 0 || n > 12) invalid_input("index dimension must be in 0..12");
    std::sort(sets.begin(), sets.end(), subset_less);
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    for (Subset s : sets)
      if (s >> n) invalid_input("index set " + subset_name(s) + " outside n");
    return {n, sets};
  }
  static IndexFamily full(int n) {
    std::vector<Subset> s;
    for (Subset x = 0; x < (Subset{1} << n); ++x) s.push_back(x);
    return from_sets(n, s);
  }
  static IndexFamily proper(int n) {
    std::vector<Subset> s;
    for (Subset x = 0; x + 1 < (Subset{1} << n); ++x) s.push_back(x);
    return from_sets(n, s);
  }
  Subset top() const { return (Subset{1} << n) - 1; }
  bool contains(Subset s) const { return std::binary_search(sets.begin(), sets.end(), s, subset_less); }
  bool downward_closed() const {
    for (Subset s : sets)
      for (int i : members(s))
        if (!contains(s & ~(Subset{1} << i))) return false;
    return true;
  }
  bool is_full() const { return sets.size() == (std::size_t{1} << n); }
  bool is_proper() const { return sets.size() + 1 == (std::size_t{1} << n) && !contains(top()); }
  bool operator==(const IndexFamily&) const = default;
};

// Values are Regions: closed sets for ordinary problems, unions of closures
// for skeletal functors. Unlisted transitions are inclusions.
struct DiagramFunctor {
  IndexFamily index;
  Structure ambient;
  std::map<Subset, Region> value;
  std::map<std::pair<Subset, Subset>, PartialMap> transitions;

  const Region& at(Subset s) const {
    auto it = value.find(s);
    if (it == value.end()) invalid_input("functor has no value at " + subset_name(s));
    return it->second;
  }
  PartialMap transition(Subset s, Subset t) const {
    if (!is_subset(s, t)) invalid_input("transition needs " + subset_name(s) + " inside " + subset_name(t));
    if (s != t) {
      auto it = transitions.find({s, t});
      if (it != transitions.end()) return it->second;
    }
    return PartialMap::identity(at(s));
  }
  // a_t(s): the image of a(s) inside a(t)
  Region image_in(Subset s, Subset t) const { return transition(s, t).image(); }
  bool operator==(const DiagramFunctor&) const = default;
};

struct NaturalIso {
  std::map<Subset, PartialMap> components;
};

struct FunctorReport {
  bool functorial = true;
  bool closed = true;
  bool independent = true;
  bool untwisted = true;
  bool elementary = true;
  std::vector<std::string> problems;

  bool ok() const { return functorial && closed && independent && elementary; }
};

inline Region closure_region(const std::vector<int>& vs) { return Region(ClosedSet(vs)); }

inline FunctorReport validate_functor(const DiagramFunctor& f) {
  FunctorReport rep;
  auto note = [&](bool& flag, const std::string& msg) {
    flag = false;
    if (rep.problems.size() < 64) rep.problems.push_back(msg);
  };
  if (!f.index.downward_closed()) note(rep.functorial, "index family is not closed under subsets");
  for (Subset s : f.index.sets)
    if (!f.value.count(s)) note(rep.functorial, "no value at " + subset_name(s));
  for (const auto& [s, r] : f.value) {
    if (!f.index.contains(s)) note(rep.functorial, "value outside the index at " + subset_name(s));
    for (int v : r.vertices)
      if (!f.ambient.has_vertex(v)) note(rep.functorial, "value at " + subset_name(s) + " leaves the ambient");
  }
  if (!rep.functorial) return rep;
  for (const auto& [st, m] : f.transitions)
    if (!f.index.contains(st.first) || !f.index.contains(st.second) || !is_subset(st.first, st.second) ||
        st.first == st.second)
      note(rep.functorial, "stray transition " + subset_name(st.first) + "->" + subset_name(st.second));

  std::map<std::pair<Subset, Subset>, PartialMap> maps;
  for (Subset s : f.index.sets)
    for (Subset t : f.index.sets) {
      if (s == t || !is_subset(s, t)) continue;
      PartialMap m = f.transition(s, t);
      maps[{s, t}] = m;
      std::string name = subset_name(s) + "->" + subset_name(t);
      if (!(m.domain() == f.at(s))) {
        note(rep.functorial, "transition " + name + " is not defined exactly on its source");
        continue;
      }
      if (!m.injective() || !m.image().subset_of(f.at(t))) {
        note(rep.functorial, "transition " + name + " does not land in its target");
        continue;
      }
      if (!m.is_identity()) note(rep.untwisted, "transition " + name + " is not an inclusion");
      auto ev = is_elementary(f.ambient, m);
      if (!ev.ok) note(rep.elementary, "transition " + name + " is not elementary: " + ev.reason);
    }
  if (!rep.functorial) return rep;
  for (Subset s : f.index.sets)
    for (Subset t : f.index.sets) {
      if (s == t || !is_subset(s, t)) continue;
      for (Subset u : f.index.sets) {
        if (u == t || !is_subset(t, u)) continue;
        if (compose(maps[{t, u}], maps[{s, t}]) != maps[{s, u}])
          note(rep.functorial, "composition " + subset_name(s) + "->" + subset_name(t) + "->" + subset_name(u) +
                                   " differs from the direct map");
      }
    }
  if (!rep.functorial) return rep;
  for (Subset s : f.index.sets) {
    if (s == 0) continue;
    std::vector<int> all;
    std::vector<std::vector<int>> parts;
    for (int i : members(s)) {
      Subset si = Subset{1} << i;
      if (!f.index.contains(si)) continue;
      parts.push_back(f.image_in(si, s).vertices);
      all.insert(all.end(), parts.back().begin(), parts.back().end());
    }
    if (!(f.at(s) == closure_region(all)))
      note(rep.closed, "value at " + subset_name(s) + " is not the closure of its singleton images");
    std::vector<int> base = f.index.contains(0) ? f.image_in(0, s).vertices : std::vector<int>{};
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::set<int> others;
      for (std::size_t j = 0; j < parts.size(); ++j)
        if (j != i) others.insert(parts[j].begin(), parts[j].end());
      for (int v : parts[i])
        if (others.count(v) && !std::binary_search(base.begin(), base.end(), v)) {
          note(rep.independent, "singleton images meet outside the base at " + subset_name(s));
          break;
        }
    }
  }
  return rep;
}

inline DiagramFunctor localize(const DiagramFunctor& f, Subset u) {
  if (!f.index.contains(u)) invalid_input("localization set " + subset_name(u) + " is not in the index");
  std::vector<int> rest;
  for (int i = 0; i < f.index.n; ++i)
    if (!((u >> i) & 1)) rest.push_back(i);
  auto lift = [&](Subset s) {
    Subset out = u;
    for (std::size_t k = 0; k < rest.size(); ++k)
      if ((s >> k) & 1) out |= Subset{1} << rest[k];
    return out;
  };
  const int n2 = static_cast<int>(rest.size());
  std::vector<Subset> sets;
  for (Subset s = 0; s < (Subset{1} << n2); ++s)
    if (f.index.contains(lift(s))) sets.push_back(s);
  DiagramFunctor out;
  out.index = IndexFamily::from_sets(n2, sets);
  out.ambient = f.ambient;
  for (Subset s : out.index.sets) out.value[s] = f.at(lift(s));
  for (Subset s : out.index.sets)
    for (Subset t : out.index.sets)
      if (s != t && is_subset(s, t)) {
        PartialMap m = f.transition(lift(s), lift(t));
        if (!m.is_identity()) out.transitions[{s, t}] = m;
      }
  return out;
}

inline std::optional<std::string> check_natural(const DiagramFunctor& a, const DiagramFunctor& b, const NaturalIso& iso,
                                                const std::vector<Subset>& sets) {
  for (Subset s : sets) {
    auto it = iso.components.find(s);
    if (it == iso.components.end()) return "missing component at " + subset_name(s);
    const PartialMap& c = it->second;
    if (!(c.domain() == a.at(s))) return "component at " + subset_name(s) + " is not defined on a(s)";
    if (!c.injective() || !(c.image() == b.at(s))) return "component at " + subset_name(s) + " is not onto b(s)";
    if (!is_elementary(a.ambient, b.ambient, c).ok) return "component at " + subset_name(s) + " is not elementary";
  }
  for (Subset s : sets)
    for (Subset t : sets)
      if (s != t && is_subset(s, t)) {
        PartialMap left = compose(iso.components.at(t), a.transition(s, t));
        PartialMap right = compose(b.transition(s, t), iso.components.at(s));
        if (left != right) return "square " + subset_name(s) + "->" + subset_name(t) + " does not commute";
      }
  return std::nullopt;
}

struct Untwisted {
  DiagramFunctor functor;
  NaturalIso iso;  // from the input to the untwisted functor
};

inline Untwisted untwist(const DiagramFunctor& f) {
  if (f.index.is_proper())
    throw Error(ErrorKind::Unsupported, "untwisting a problem on the proper subsets amounts to solving it");
  if (!f.index.is_full()) invalid_input("untwist needs a functor on the full power set");
  const Subset top = f.index.top();
  Untwisted out;
  out.functor.index = f.index;
  out.functor.ambient = f.ambient;
  for (Subset s : f.index.sets) {
    PartialMap eta = f.transition(s, top);
    out.functor.value[s] = eta.image();
    out.iso.components[s] = eta;
  }
  if (auto bad = check_natural(f, out.functor, out.iso, f.index.sets)) internal_error("untwist: " + *bad);
  return out;
}

// ---------------------------------------------------------------------------
// B(n) and relative uniqueness

inline void require_distinct_vertices(const Structure& s, const std::vector<int>& vs) {
  for (int v : vs)
    if (!s.has_vertex(v)) invalid_input("vertex " + std::to_string(v) + " not in structure");
  for (std::size_t i = 0; i < vs.size(); ++i) {
    std::vector<Element> rest;
    for (std::size_t j = 0; j < vs.size(); ++j)
      if (j != i) rest.push_back(Element::vertex(vs[j]));
    if (!is_independent(s, {Element::vertex(vs[i])}, rest, {}))
      invalid_input("vertices are not independent: " + std::to_string(vs[i]) + " repeats");
  }
}

inline std::vector<int> pick(const std::vector<int>& vs, Subset u) {
  std::vector<int> out;
  for (int i : members(u)) out.push_back(vs[i]);
  return out;
}

inline std::vector<Element> subface_elements(const std::vector<int>& vs, Subset u, int size) {
  std::set<Element> out;
  for (Subset w = 0; w <= u; ++w)
    if (is_subset(w, u) && set_size(w) == size)
      for (const Element& e : ClosedSet(pick(vs, w)).elements()) out.insert(e);
  return {out.begin(), out.end()};
}

struct BnVerdict {
  bool pass = true;
  std::optional<PartialMap> witness;  // automorphism with no extension
  int buffer = 0;
  std::vector<int> buffer_vertices;
  int automorphisms = 0;
};

inline BnVerdict check_Bn(const Structure& s, const std::vector<int>& vertices, int buffer, std::uint64_t seed = 0) {
  const int n = static_cast<int>(vertices.size());
  if (n < 2) invalid_input("B(n) needs n >= 2 vertices");
  require_distinct_vertices(s, vertices);
  BnVerdict out;
  out.buffer = buffer;
  Structure buf = append_buffer(s, buffer, seed, &out.buffer_vertices);
  std::vector<int> all = vertices;
  all.insert(all.end(), out.buffer_vertices.begin(), out.buffer_vertices.end());
  Structure sub = induced(buf, all);

  const Subset face = (Subset{1} << (n - 1)) - 1;
  auto group = aut_group(sub, ClosedSet(pick(vertices, face)), subface_elements(vertices, face, n - 2));
  out.automorphisms = group.order();
  const Subset full = (Subset{1} << n) - 1;
  for (const PartialMap& sigma : group.elements) {
    SymmetryQuery q;
    for (auto [v, w] : sigma.vertex_map) q.vertex_images[v] = w;
    q.vertex_images[vertices[n - 1]] = vertices[n - 1];
    for (auto [p, b] : sigma.shift) q.required_shift[p] = b;
    for (int i = 0; i + 1 < n; ++i)
      for (const Pair& p : pairs_over(pick(vertices, full & ~(Subset{1} << i)))) q.required_shift[p] = 0;
    bool found = false;
    auto st = enumerate_symmetries(sub, q, [&](const std::vector<int>&, const Gf2System::Result&) {
      found = true;
      return false;
    });
    if (st.truncated) throw Error(ErrorKind::ResourceLimit, "extension search for B(n) exceeds the enumeration cap");
    if (!found) {
      out.pass = false;
      out.witness = sigma;
      return out;
    }
  }
  return out;
}

struct RelUniqVerdict {
  bool pass = true;
  std::string obstruction;
  std::optional<Triple> triangle;
  std::map<Subset, PartialMap> family;  // the failing family when !pass
  std::uint64_t families = 0;
};

// Each sigma_u must be an automorphism of acl(a_u) that is the identity on
// every proper subface closure.
inline void check_face_automorphism(const Structure& s, const std::vector<int>& vs, Subset u, const PartialMap& m) {
  ClosedSet dom(pick(vs, u));
  std::string where = "sigma at " + subset_name(u);
  if (!(m.domain() == Region(dom)) || !(m.image() == Region(dom))) invalid_input(where + " is not a self-map of its closure");
  if (!is_elementary(s, m).ok) invalid_input(where + " is not elementary");
  for (const Element& e : subface_elements(vs, u, set_size(u) - 1))
    if (m.apply(e) != e) invalid_input(where + " moves " + to_string(e) + " of a proper subface");
}

inline RelUniqVerdict check_relative_uniqueness(const Structure& s, int k, const std::vector<int>& vertices,
                                                std::map<Subset, PartialMap> maps, int buffer, std::uint64_t seed = 0) {
  const int n = static_cast<int>(vertices.size());
  if (k < 2 || k > n) invalid_input("relative uniqueness needs 2 <= k <= n");
  require_distinct_vertices(s, vertices);
  for (Subset u = 0; u < (Subset{1} << n); ++u)
    if (set_size(u) == k - 1 && !maps.count(u)) maps[u] = PartialMap::identity(ClosedSet(pick(vertices, u)));
  std::vector<PartialMap> parts;
  for (const auto& [u, m] : maps) {
    if ((u >> n) || set_size(u) != k - 1) invalid_input("sigma given on " + subset_name(u) + ", which has the wrong size");
    check_face_automorphism(s, vertices, u, m);
    parts.push_back(m);
  }
  RelUniqVerdict out;
  out.families = 1;
  Structure buf = append_buffer(s, buffer, seed);
  std::string conflict;
  auto joined = merge_maps(parts, &conflict);
  if (!joined) {
    out.pass = false;
    out.obstruction = conflict;
    out.family = maps;
    return out;
  }
  auto ev = is_elementary(buf, *joined);
  if (!ev.ok) {
    out.pass = false;
    out.obstruction = ev.reason;
    out.triangle = ev.triangle;
    out.family = maps;
  }
  return out;
}

// Every admissible family, exhaustively.
inline RelUniqVerdict check_relative_uniqueness_all(const Structure& s, int k, const std::vector<int>& vertices,
                                                    int buffer, std::uint64_t seed = 0) {
  const int n = static_cast<int>(vertices.size());
  if (k < 2 || k > n) invalid_input("relative uniqueness needs 2 <= k <= n");
  require_distinct_vertices(s, vertices);
  std::vector<Subset> faces;
  std::vector<AutomorphismGroup> groups;
  for (Subset u = 0; u < (Subset{1} << n); ++u)
    if (set_size(u) == k - 1) {
      faces.push_back(u);
      groups.push_back(aut_group(s, ClosedSet(pick(vertices, u)), subface_elements(vertices, u, k - 2)));
    }
  std::uint64_t total = 1;
  for (const auto& g : groups) {
    total *= static_cast<std::uint64_t>(g.order());
    if (total > enumeration_cap()) throw Error(ErrorKind::ResourceLimit, "too many automorphism families");
  }
  RelUniqVerdict out;
  std::vector<int> idx(faces.size(), 0);
  for (std::uint64_t it = 0; it < total; ++it) {
    std::map<Subset, PartialMap> fam;
    for (std::size_t f = 0; f < faces.size(); ++f) fam[faces[f]] = groups[f].elements[idx[f]];
    RelUniqVerdict v = check_relative_uniqueness(s, k, vertices, fam, buffer, seed);
    ++out.families;
    if (!v.pass) {
      v.families = out.families;
      return v;
    }
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (++idx[f] < groups[f].order()) break;
      idx[f] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Existence

struct ExistenceOptions {
  int budget = 2;
  std::uint64_t seed = 0;
};

struct ExistenceResult {
  bool sat = false;
  DiagramFunctor solution;  // on the full power set, over the possibly extended ambient
  std::vector<int> fresh;   // vertices added to the ambient
  std::uint64_t candidates = 0;
  std::uint64_t ambient_candidates = 0;  // candidates using no fresh vertex
  std::string obstruction;
  int budget = 0;
};

namespace detail {

struct SlotModel {
  // slot -> (label, source vertex); label -1 is the base
  std::vector<std::pair<int, int>> slots;
  // per index set: vertex of a(s) -> slot
  std::map<Subset, std::map<int, int>> slot_of;
};

inline SlotModel build_slots(const DiagramFunctor& f) {
  SlotModel m;
  const bool has_base = f.index.contains(0);
  std::set<int> base_image;
  if (has_base)
    for (int v : f.at(0).vertices) m.slots.push_back({-1, v});
  for (int i = 0; i < f.index.n; ++i) {
    Subset si = Subset{1} << i;
    if (!f.index.contains(si)) continue;
    std::vector<int> from_base = has_base ? f.image_in(0, si).vertices : std::vector<int>{};
    for (int v : f.at(si).vertices)
      if (!std::binary_search(from_base.begin(), from_base.end(), v)) m.slots.push_back({i, v});
  }
  for (Subset s : f.index.sets) {
    auto& sm = m.slot_of[s];
    for (int k = 0; k < static_cast<int>(m.slots.size()); ++k) {
      auto [label, v] = m.slots[k];
      Subset src = label < 0 ? 0 : Subset{1} << label;
      if (!is_subset(src, s)) continue;
      int w = f.transition(src, s)(v);
      if (!sm.emplace(w, k).second) invalid_input("problem is not independent: two slots meet at " + subset_name(s));
    }
    for (int v : f.at(s).vertices)
      if (!sm.count(v)) invalid_input("problem is not closed: vertex " + std::to_string(v) + " at " + subset_name(s));
  }
  return m;
}

struct TopSystem {
  Gf2System sys{0};
  std::map<std::pair<Subset, Pair>, int> g;  // shift of g_s on a pair of a(s)
  std::map<Triple, int> cvar;                // free target bits (fresh triangles, example1)
  std::vector<std::string> labels;
  std::vector<std::pair<Subset, Pair>> gvars;
};

}  // namespace detail

inline ExistenceResult solve_existence(const DiagramFunctor& problem, const ExistenceOptions& opt = {}) {
  if (!problem.index.is_proper()) invalid_input("an existence problem lives on the proper subsets of n");
  if (problem.index.n < 1) invalid_input("existence needs n >= 1");
  FunctorReport rep = validate_functor(problem);
  if (!rep.ok()) invalid_input("invalid problem: " + (rep.problems.empty() ? std::string("?") : rep.problems.front()));
  if (opt.budget < 0) invalid_input("budget must be non-negative");

  const Structure& amb = problem.ambient;
  const detail::SlotModel model = detail::build_slots(problem);
  const int L = static_cast<int>(model.slots.size());
  const int fresh_base = amb.max_vertex() + 1;
  const std::uint64_t cap = enumeration_cap();

  // triangles inside each face, as slot triples with their source status
  struct FaceTriangle {
    Subset s;
    Triple src;
    std::array<int, 3> slot;
    int status;
  };
  std::vector<FaceTriangle> face_tris;
  std::vector<std::vector<int>> tris_by_last_slot(L);
  for (Subset s : problem.index.sets)
    for (const Triple& t : triples_over(problem.at(s).vertices)) {
      const auto& sm = model.slot_of.at(s);
      std::array<int, 3> sl{sm.at(t[0]), sm.at(t[1]), sm.at(t[2])};
      face_tris.push_back({s, t, sl, amb.status(t)});
      tris_by_last_slot[*std::max_element(sl.begin(), sl.end())].push_back(static_cast<int>(face_tris.size()) - 1);
    }

  std::vector<int> image(L, -1);
  std::vector<char> used(amb.vertices.size(), 0);
  int fresh_used = 0;
  std::map<Triple, int> required;  // example2 statuses demanded on triangles with a fresh vertex
  std::vector<std::vector<Triple>> required_log(L);

  ExistenceResult res;
  res.budget = opt.budget;
  bool done = false;
  std::optional<Gf2System::Result> winner;
  detail::TopSystem winner_sys;

  auto is_fresh = [&](int v) { return v >= fresh_base; };
  auto target_status = [&](const Triple& t) -> std::optional<int> {
    if (!is_fresh(t[2])) return amb.status(t);
    return std::nullopt;
  };

  auto build_system = [&](const Structure& target, bool free_fresh_bits) {
    detail::TopSystem ts;
    for (Subset s : problem.index.sets)
      for (const Pair& p : problem.at(s).pairs) {
        ts.g[{s, p}] = static_cast<int>(ts.gvars.size());
        ts.gvars.push_back({s, p});
      }
    int nv = static_cast<int>(ts.gvars.size());
    std::vector<std::pair<std::vector<int>, bool>> rows;
    auto img = [&](int slot) { return image[slot]; };
    for (Subset s : problem.index.sets)
      for (int i = 0; i < problem.index.n; ++i) {
        Subset t = s | (Subset{1} << i);
        if (t == s || !problem.index.contains(t)) continue;
        PartialMap a = problem.transition(s, t);
        for (const Pair& p : problem.at(s).pairs) {
          rows.push_back({{ts.g.at({s, p}), ts.g.at({t, a.map_pair(p)})}, a.shift_of(p) != 0});
          ts.labels.push_back("functoriality " + subset_name(s) + "->" + subset_name(t));
        }
      }
    for (const FaceTriangle& ft : face_tris) {
      if (ft.status == kAbsent) continue;
      Triple tt = triple_of(img(ft.slot[0]), img(ft.slot[1]), img(ft.slot[2]));
      std::vector<int> vars{ts.g.at({ft.s, Pair{ft.src[0], ft.src[1]}}), ts.g.at({ft.s, Pair{ft.src[0], ft.src[2]}}),
                            ts.g.at({ft.s, Pair{ft.src[1], ft.src[2]}})};
      int rhs = ft.status;
      if (free_fresh_bits && is_fresh(tt[2]) && amb.flavor == Flavor::Example2) {
        // fresh example2 triangles carrying R are Bit(0)
      } else if (free_fresh_bits && is_fresh(tt[2])) {
        auto [it, fresh] = ts.cvar.emplace(tt, nv);
        if (fresh) ++nv;
        vars.push_back(it->second);
      } else {
        int c = target.status(tt);
        if (c == kAbsent) internal_error("status mismatch survived pruning");
        rhs += c;
      }
      rows.push_back({vars, (rhs & 1) != 0});
      ts.labels.push_back("face " + subset_name(ft.s) + " triangle " + to_string(ft.src));
    }
    ts.sys = Gf2System(nv);
    for (auto& [v, b] : rows) ts.sys.add_row(v, b);
    return ts;
  };

  auto leaf = [&]() {
    ++res.candidates;
    if (fresh_used == 0) ++res.ambient_candidates;
    if (res.candidates > cap) throw Error(ErrorKind::ResourceLimit, "existence search exceeds the enumeration cap");
    detail::TopSystem ts = build_system(amb, true);
    auto r = ts.sys.solve();
    if (r.feasible) {
      winner = r;
      winner_sys = std::move(ts);
      done = true;
      return;
    }
    if (res.obstruction.empty()) {
      std::set<std::string> why;
      for (int row : r.certificate) why.insert(ts.labels[row]);
      std::string msg;
      for (const auto& w : why) msg += (msg.empty() ? "" : "; ") + w;
      res.obstruction = "parity conflict among: " + msg;
    }
  };

  std::function<void(int)> dfs = [&](int k) {
    if (done) return;
    if (k == L) {
      leaf();
      return;
    }
    auto consistent = [&]() {
      for (int ti : tris_by_last_slot[k]) {
        const FaceTriangle& ft = face_tris[ti];
        Triple tt = triple_of(image[ft.slot[0]], image[ft.slot[1]], image[ft.slot[2]]);
        auto ts = target_status(tt);
        if (ts) {
          if ((*ts == kAbsent) != (ft.status == kAbsent)) return false;
          continue;
        }
        if (amb.flavor == Flavor::Example1) continue;
        int want = ft.status == kAbsent ? kAbsent : 0;
        auto [it, fresh] = required.emplace(tt, want);
        if (!fresh && it->second != want) return false;
        if (fresh) required_log[k].push_back(tt);
      }
      return true;
    };
    auto undo = [&]() {
      for (const Triple& t : required_log[k]) required.erase(t);
      required_log[k].clear();
    };
    for (std::size_t a = 0; a < amb.vertices.size() && !done; ++a) {
      if (used[a]) continue;
      used[a] = 1;
      image[k] = amb.vertices[a];
      if (consistent()) dfs(k + 1);
      if (done) return;
      undo();
      used[a] = 0;
    }
    if (!done && fresh_used < opt.budget) {
      image[k] = fresh_base + fresh_used;
      ++fresh_used;
      if (consistent()) dfs(k + 1);
      if (done) return;
      undo();
      --fresh_used;
    }
    image[k] = -1;
  };
  dfs(0);

  if (!done) {
    if (res.obstruction.empty()) res.obstruction = "no placement of the problem vertices respects the R-statuses";
    return res;
  }

  // realize fresh vertices, then re-solve against the concrete ambient
  Structure ext = amb;
  std::vector<int> tops;
  for (int v : image) tops.push_back(v);
  std::sort(tops.begin(), tops.end());
  for (int f = 0; f < fresh_used; ++f) {
    int b = fresh_base + f;
    std::vector<int> anchors;
    for (int v : tops)
      if (v < b) anchors.push_back(v);
    if (amb.flavor == Flavor::Example1) {
      ExtensionRequest req;
      req.anchors = anchors;
      for (int i = 0; i < static_cast<int>(anchors.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(anchors.size()); ++j) {
          Triple t = triple_of(anchors[i], anchors[j], b);
          int bit = 0;
          auto it = winner_sys.cvar.find(t);
          if (it != winner_sys.cvar.end()) bit = winner->solution[it->second];
          if (bit == 0) req.pattern.insert({i, j});
        }
      ExtensionOptions eo;
      eo.seed = opt.seed + static_cast<std::uint64_t>(f) * 7919;
      auto er = extend_axiom4(ext, req, eo);
      if (er.vertex != b) internal_error("fresh vertex numbering drifted");
      ext = er.structure;
    } else {
      std::map<Pair, int> st;
      for (const auto& [t, c] : required)
        if (t[2] == b) st[pair_of(t[0], t[1])] = c;
      ext = add_vertex(ext, st, kAbsent);
    }
    res.fresh.push_back(b);
  }
  detail::TopSystem ts = build_system(ext, false);
  auto r = ts.sys.solve();
  if (!r.feasible) {
    std::string why;
    for (int row : r.certificate) why += ts.labels[row] + "; ";
    internal_error("realized extension does not carry the solution: " + why);
  }

  DiagramFunctor sol;
  sol.index = IndexFamily::full(problem.index.n);
  sol.ambient = ext;
  sol.value = problem.value;
  sol.transitions = problem.transitions;
  const Subset top = sol.index.top();
  sol.value[top] = closure_region(tops);
  for (Subset s : problem.index.sets) {
    PartialMap g;
    for (auto [v, slot] : model.slot_of.at(s)) g.vertex_map[v] = image[slot];
    for (const Pair& p : problem.at(s).pairs) g.shift[p] = r.solution[ts.g.at({s, p})];
    if (!g.is_identity()) sol.transitions[{s, top}] = g;
  }
  FunctorReport check = validate_functor(sol);
  if (!check.ok()) internal_error("solution fails validation: " + check.problems.front());
  res.sat = true;
  res.solution = std::move(sol);
  res.obstruction.clear();
  return res;
}

// ---------------------------------------------------------------------------
// Uniqueness

struct UniquenessVerdict {
  bool pass = true;
  std::string obstruction;
  std::optional<Triple> triangle;
};

inline UniquenessVerdict check_uniqueness(const DiagramFunctor& a, const DiagramFunctor& b, const NaturalIso& base_iso) {
  if (!a.index.is_full() || !b.index.is_full() || a.index.n != b.index.n)
    invalid_input("uniqueness compares two functors on the same full power set");
  const int n = a.index.n;
  const Subset top = a.index.top();
  std::vector<Subset> lower;
  for (Subset s : a.index.sets)
    if (s != top) lower.push_back(s);
  if (auto bad = check_natural(a, b, base_iso, lower)) invalid_input("base isomorphism: " + *bad);
  std::vector<PartialMap> parts;
  for (int i = 0; i < n; ++i) {
    Subset s = top & ~(Subset{1} << i);
    PartialMap piece =
        compose(b.transition(s, top), compose(base_iso.components.at(s), inverse(a.transition(s, top))));
    parts.push_back(piece);
  }
  UniquenessVerdict out;
  std::string conflict;
  auto joined = merge_maps(parts, &conflict);
  if (!joined) {
    out.pass = false;
    out.obstruction = conflict;
    return out;
  }
  auto ev = is_elementary(a.ambient, b.ambient, *joined);
  if (!ev.ok) {
    out.pass = false;
    out.obstruction = ev.reason;
    out.triangle = ev.triangle;
  }
  return out;
}

inline NaturalIso identity_iso(const DiagramFunctor& a) {
  NaturalIso iso;
  for (Subset s : a.index.sets)
    if (s != a.index.top() || !a.index.is_full()) iso.components[s] = PartialMap::identity(a.at(s));
  return iso;
}

// One-side twistings of a solution at the maximal face `face`: automorphisms
// of a(face) fixing the images of its proper subfaces.
inline std::vector<NaturalIso> one_side_twistings(const DiagramFunctor& a, Subset face) {
  if (!a.index.is_full()) invalid_input("one-side twistings need a functor on the full power set");
  if (set_size(face) != a.index.n - 1) invalid_input("twisting face must have n-1 elements");
  const Region& r = a.at(face);
  if (!r.is_closed()) invalid_input("twisting face value must be closed");
  std::set<Element> fixed;
  for (Subset t : a.index.sets)
    if (t != face && is_subset(t, face))
      for (const Element& e : a.image_in(t, face).elements()) fixed.insert(e);
  auto g = aut_group(a.ambient, r.closure(), {fixed.begin(), fixed.end()});
  std::vector<NaturalIso> out;
  for (const PartialMap& m : g.elements) {
    NaturalIso iso = identity_iso(a);
    iso.components[face] = m;
    out.push_back(iso);
  }
  return out;
}

// a with the transition from `face` to the top precomposed by eta.
inline DiagramFunctor apply_twist(const DiagramFunctor& a, Subset face, const PartialMap& eta) {
  DiagramFunctor b = a;
  const Subset top = a.index.top();
  PartialMap m = compose(a.transition(face, top), eta);
  if (m.is_identity()) b.transitions.erase({face, top});
  else b.transitions[{face, top}] = m;
  return b;
}

// The untwisted functor on P(n) whose values are closures of vertex subsets.
inline DiagramFunctor closure_functor(const Structure& s, const std::vector<int>& vertices, bool full = true,
                                      const std::vector<int>& base = {}) {
  const int n = static_cast<int>(vertices.size());
  DiagramFunctor f;
  f.index = full ? IndexFamily::full(n) : IndexFamily::proper(n);
  f.ambient = s;
  for (Subset u : f.index.sets) {
    std::vector<int> vs = pick(vertices, u);
    vs.insert(vs.end(), base.begin(), base.end());
    f.value[u] = closure_region(vs);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Skeletal functors

inline Region skeletal_value(const DiagramFunctor& f, Subset u, int k) {
  std::vector<int> vs = f.at(u).vertices;
  std::vector<Pair> ps;
  for (Subset v : f.index.sets)
    if (is_subset(v, u) && set_size(v) <= k)
      for (const Pair& p : pairs_over(f.image_in(v, u).vertices)) ps.push_back(p);
  return Region(vs, ps);
}

inline bool is_skeletal(const DiagramFunctor& f, int k) {
  FunctorReport rep = validate_functor(f);
  if (!rep.functorial || !rep.independent) return false;
  for (Subset u : f.index.sets)
    if (!(f.at(u) == skeletal_value(f, u, k))) return false;
  return true;
}

struct SkeletalResult {
  bool ok = true;
  bool unchanged = false;
  DiagramFunctor functor;
  std::string obstruction;
  std::optional<Subset> face;
  std::optional<Triple> triangle;
};

// Level-by-level lift of a (k-1)-skeletal functor to a k-skeletal one. For
// each face w the maps from its codimension-one subfaces are found together:
// they extend the old transitions, stay elementary, and agree on overlaps.
// Unconstrained shifts are taken to be 0.
inline SkeletalResult extend_skeletal(const DiagramFunctor& f, int k) {
  if (k < 2) invalid_input("skeletal level must be at least 2");
  SkeletalResult out;
  if (is_skeletal(f, k)) {
    out.unchanged = true;
    out.functor = f;
    return out;
  }
  if (!is_skeletal(f, k - 1)) invalid_input("input is not " + std::to_string(k - 1) + "-skeletal");
  const Structure& amb = f.ambient;

  DiagramFunctor h;
  h.index = f.index;
  h.ambient = amb;
  for (Subset u : f.index.sets) h.value[u] = skeletal_value(f, u, k);
  std::map<std::pair<Subset, Subset>, PartialMap> maps;
  auto get = [&](Subset s, Subset t) -> PartialMap {
    if (s == t) return PartialMap::identity(h.at(s));
    return maps.at({s, t});
  };
  int max_size = 0;
  for (Subset u : f.index.sets) max_size = std::max(max_size, set_size(u));
  // levels up to k keep the old maps: their sources are already closed
  for (Subset s : f.index.sets)
    for (Subset t : f.index.sets)
      if (s != t && is_subset(s, t) && set_size(t) <= k) {
        if (!(h.at(s) == f.at(s))) internal_error("low level value changed");
        maps[{s, t}] = f.transition(s, t);
      }

  for (int m = k + 1; m <= max_size; ++m)
    for (Subset w : f.index.sets) {
      if (set_size(w) != m) continue;
      std::vector<Subset> subs;
      for (int i : members(w)) subs.push_back(w & ~(Subset{1} << i));
      // one block of variables per subface: pairs over its closure
      std::vector<std::map<Pair, int>> var(subs.size());
      int nv = 0;
      for (std::size_t j = 0; j < subs.size(); ++j)
        for (const Pair& p : pairs_over(h.at(subs[j]).vertices)) var[j][p] = nv++;
      Gf2System sys(nv);
      std::vector<std::string> label;
      std::vector<std::optional<Triple>> tri;
      std::vector<PartialMap> old(subs.size());
      for (std::size_t j = 0; j < subs.size(); ++j) {
        old[j] = f.transition(subs[j], w);
        for (auto [p, b] : old[j].shift) {
          sys.add_row({var[j].at(p)}, b != 0);
          label.push_back("extends the old map from " + subset_name(subs[j]));
          tri.push_back(std::nullopt);
        }
        for (const Triple& t : triples_over(h.at(subs[j]).vertices)) {
          int c = amb.status(t);
          int c2 = amb.status(old[j](t[0]), old[j](t[1]), old[j](t[2]));
          if ((c == kAbsent) != (c2 == kAbsent)) {
            out.ok = false;
            out.face = w;
            out.triangle = t;
            out.obstruction = "R-status changes on " + to_string(t) + " into face " + subset_name(w);
            return out;
          }
          if (c == kAbsent) continue;
          sys.add_row({var[j].at({t[0], t[1]}), var[j].at({t[0], t[2]}), var[j].at({t[1], t[2]})}, ((c + c2) & 1) != 0);
          label.push_back("elementarity from " + subset_name(subs[j]));
          tri.push_back(t);
        }
      }
      for (std::size_t i = 0; i < subs.size(); ++i)
        for (std::size_t j = i + 1; j < subs.size(); ++j) {
          Subset u = subs[i] & subs[j];
          PartialMap ui = get(u, subs[i]), uj = get(u, subs[j]);
          for (const Pair& p : h.at(u).pairs) {
            Pair pi = ui.map_pair(p), pj = uj.map_pair(p);
            if (old[i].map_pair(pi) != old[j].map_pair(pj)) internal_error("vertex maps disagree on an overlap");
            sys.add_row({var[i].at(pi), var[j].at(pj)}, ((ui.shift_of(p) + uj.shift_of(p)) & 1) != 0);
            label.push_back("overlap " + subset_name(u));
            tri.push_back(std::nullopt);
          }
        }
      auto r = sys.solve();
      if (!r.feasible) {
        out.ok = false;
        out.face = w;
        std::set<std::string> why;
        for (int row : r.certificate) {
          why.insert(label[row]);
          if (tri[row] && !out.triangle) out.triangle = tri[row];
        }
        out.obstruction = "no correction into face " + subset_name(w);
        if (out.triangle) out.obstruction += " (triangle " + to_string(*out.triangle) + ")";
        return out;
      }
      for (std::size_t j = 0; j < subs.size(); ++j) {
        PartialMap g;
        for (int v : h.at(subs[j]).vertices) g.vertex_map[v] = old[j](v);
        for (const Pair& p : h.at(subs[j]).pairs) g.shift[p] = r.solution[var[j].at(p)];
        maps[{subs[j], w}] = g;
      }
      for (Subset u : f.index.sets) {
        if (!is_subset(u, w) || set_size(u) >= m - 1) continue;
        for (std::size_t j = 0; j < subs.size(); ++j)
          if (is_subset(u, subs[j])) {
            maps[{u, w}] = compose(maps.at({subs[j], w}), get(u, subs[j]));
            break;
          }
      }
    }
  for (const auto& [st, m] : maps)
    if (!m.is_identity()) h.transitions[st] = m;
  if (!is_skeletal(h, k)) internal_error("lifted functor is not skeletal");
  FunctorReport rep = validate_functor(h);
  if (!rep.functorial || !rep.independent) internal_error("lifted functor: " + rep.problems.front());
  if (!rep.elementary) {
    out.ok = false;
    out.obstruction = rep.problems.front();
    return out;
  }
  out.functor = std::move(h);
  return out;
}

// ---------------------------------------------------------------------------
// Problem generators

namespace detail {

// A random elementary map with the given vertex map and pinned shifts on the
// closure of the source vertices.
inline PartialMap random_elementary(const Structure& s, const std::map<int, int>& vmap, const std::map<Pair, int>& pinned,
                                    std::mt19937_64& rng) {
  std::vector<int> vs;
  for (auto [v, w] : vmap) vs.push_back(v);
  std::vector<Pair> ps = pairs_over(vs);
  Gf2System sys(static_cast<int>(ps.size()));
  auto idx = [&](const Pair& p) { return static_cast<int>(std::lower_bound(ps.begin(), ps.end(), p) - ps.begin()); };
  for (const Triple& t : triples_over(vs)) {
    int c = s.status(t), c2 = s.status(vmap.at(t[0]), vmap.at(t[1]), vmap.at(t[2]));
    if ((c == kAbsent) != (c2 == kAbsent)) invalid_input("generator asked for a status-changing map");
    if (c != kAbsent) sys.add_row({idx({t[0], t[1]}), idx({t[0], t[2]}), idx({t[1], t[2]})}, ((c + c2) & 1) != 0);
  }
  for (auto [p, b] : pinned) sys.add_row({idx(p)}, b != 0);
  auto r = sys.solve();
  if (!r.feasible) invalid_input("generator asked for a non-elementary map");
  PartialMap m;
  m.vertex_map = vmap;
  std::vector<std::uint8_t> x = r.solution;
  for (const auto& k : r.kernel)
    if (random_bit(rng))
      for (std::size_t i = 0; i < x.size(); ++i) x[i] ^= k[i];
  for (std::size_t i = 0; i < ps.size(); ++i) m.shift[ps[i]] = x[i];
  return m;
}

}  // namespace detail

// n = 3 problem over a random example1 structure: a base of up to two
// vertices, each edge placed on its own vertices, random twists.
inline DiagramFunctor existence_problem_n3(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Structure s = generate(Flavor::Example1, 9, seed);
  std::vector<int> pool = s.vertices;
  std::shuffle(pool.begin(), pool.end(), rng);
  int nb = static_cast<int>(rng() % 3);
  std::vector<int> base(pool.begin(), pool.begin() + nb);
  std::vector<int> rest(pool.begin() + nb, pool.end());
  DiagramFunctor f;
  f.index = IndexFamily::proper(3);
  f.ambient = s;
  f.value[0] = closure_region(base);
  std::vector<int> single(3);
  for (int i = 0; i < 3; ++i) {
    single[i] = rest[i];
    std::vector<int> vs = base;
    vs.push_back(single[i]);
    f.value[Subset{1} << i] = closure_region(vs);
  }
  // edge {i,j} sits on two further vertices chosen from the pool
  std::map<Subset, std::pair<int, int>> place;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      std::vector<int> cand(rest.begin(), rest.end());
      std::shuffle(cand.begin(), cand.end(), rng);
      Subset e = (Subset{1} << i) | (Subset{1} << j);
      place[e] = {cand[0], cand[1]};
      std::vector<int> vs = base;
      vs.push_back(cand[0]);
      vs.push_back(cand[1]);
      f.value[e] = closure_region(vs);
    }
  std::map<Pair, int> none;
  for (int i = 0; i < 3; ++i) {
    Subset si = Subset{1} << i;
    std::map<int, int> vm;
    for (int b : base) vm[b] = b;
    if (!base.empty()) {
      PartialMap id = PartialMap::identity(f.value[0]);
      if (!id.is_identity()) f.transitions[{0, si}] = id;
    }
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      Subset e = si | (Subset{1} << j);
      auto [x, y] = place[e];
      std::map<int, int> em = vm;
      em[single[i]] = i < j ? x : y;
      std::map<Pair, int> pinned;
      for (const Pair& p : pairs_over(base)) pinned[p] = 0;
      PartialMap m = detail::random_elementary(s, em, pinned, rng);
      f.transitions[{si, e}] = m;
    }
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      Subset e = (Subset{1} << i) | (Subset{1} << j);
      std::map<int, int> vm;
      for (int b : base) vm[b] = b;
      PartialMap m;
      m.vertex_map = vm;
      for (const Pair& p : pairs_over(base)) m.shift[p] = 0;
      if (!m.is_identity()) f.transitions[{0, e}] = m;
    }
  for (auto it = f.transitions.begin(); it != f.transitions.end();)
    it = it->second.is_identity() ? f.transitions.erase(it) : std::next(it);
  return f;
}

// n = 4 problem on an example1 ambient of exactly four vertices; the
// edge-to-face twists are chosen with odd total, so no placement inside the
// ambient works and one fresh vertex is needed.
inline DiagramFunctor existence_problem_n4(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Structure s = generate(Flavor::Example1, 4, seed);
  DiagramFunctor f = closure_functor(s, {0, 1, 2, 3}, false);
  std::vector<std::pair<Subset, Subset>> edges;
  for (Subset e : f.index.sets)
    if (set_size(e) == 2)
      for (Subset t : f.index.sets)
        if (set_size(t) == 3 && is_subset(e, t)) edges.push_back({e, t});
  int total = 0;
  std::map<std::pair<Subset, Subset>, int> bit;
  for (auto et : edges) total += bit[et] = random_bit(rng);
  if (total % 2 == 0) bit[edges[rng() % edges.size()]] ^= 1;
  for (auto [et, b] : bit) {
    if (!b) continue;
    PartialMap m = PartialMap::identity(f.value[et.first]);
    auto ps = members(et.first);
    m.shift[pair_of(ps[0], ps[1])] = 1;
    f.transitions[et] = m;
  }
  return f;
}

// n = 4 problem over the blocked configuration: every face is the blocked
// triangle over the model, labelled by position; one edge-to-face map flips
// the fiber over the edge.
inline DiagramFunctor blocked_problem(std::uint64_t seed) {
  BlockedConfiguration bc = blocked_configuration(seed);
  const auto& M = bc.model;
  const int copies[3] = {bc.triple[0], bc.triple[1], bc.triple[2]};
  DiagramFunctor f;
  f.index = IndexFamily::proper(4);
  f.ambient = bc.structure;
  auto val = [&](int count) {
    std::vector<int> vs = M;
    for (int i = 0; i < count; ++i) vs.push_back(copies[i]);
    return closure_region(vs);
  };
  for (Subset s : f.index.sets) f.value[s] = val(set_size(s));
  for (Subset s : f.index.sets)
    for (Subset t : f.index.sets) {
      if (s == t || !is_subset(s, t)) continue;
      auto ms = members(s), mt = members(t);
      PartialMap m;
      for (int v : M) m.vertex_map[v] = v;
      for (std::size_t a = 0; a < ms.size(); ++a) {
        int pos = static_cast<int>(std::find(mt.begin(), mt.end(), ms[a]) - mt.begin());
        m.vertex_map[copies[a]] = copies[pos];
      }
      for (const Pair& p : f.value[s].pairs) m.shift[p] = 0;
      if (s == 0b0011 && t == 0b0111) m.shift[pair_of(copies[0], copies[1])] = 1;
      if (!m.is_identity()) f.transitions[{s, t}] = m;
    }
  return f;
}

// A k-skeletal functor on the proper subsets of n over distinct vertices,
// twisted by random automorphisms of each value.
inline DiagramFunctor skeletal_problem(const Structure& s, const std::vector<int>& vertices, int k, std::uint64_t seed,
                                       bool twisted = true) {
  const int n = static_cast<int>(vertices.size());
  require_distinct_vertices(s, vertices);
  std::mt19937_64 rng(seed);
  DiagramFunctor f;
  f.index = IndexFamily::proper(n);
  f.ambient = s;
  for (Subset u : f.index.sets) {
    std::vector<Pair> ps;
    for (Subset v = 0; v <= u; ++v)
      if (is_subset(v, u) && set_size(v) <= k)
        for (const Pair& p : pairs_over(pick(vertices, v))) ps.push_back(p);
    f.value[u] = Region(pick(vertices, u), ps);
  }
  // tau_u(xy) = g_u(x) + g_u(y) is an automorphism of any region; transitions
  // are tau_t after tau_s inverted
  std::map<Subset, std::map<int, int>> g;
  for (Subset u : f.index.sets)
    for (int v : f.value[u].vertices) g[u][v] = twisted ? random_bit(rng) : 0;
  for (Subset a : f.index.sets)
    for (Subset b : f.index.sets) {
      if (a == b || !is_subset(a, b)) continue;
      PartialMap m = PartialMap::identity(f.value[a]);
      for (auto& [p, bit] : m.shift) bit = (g[a][p.a] + g[a][p.b] + g[b][p.a] + g[b][p.b]) & 1;
      if (!m.is_identity()) f.transitions[{a, b}] = m;
    }
  return f;
}

// ---------------------------------------------------------------------------
// JSON

inline json subset_to_json(Subset s) { return members(s); }

inline json functor_to_json(const DiagramFunctor& f) {
  json assignment = json::array(), trans = json::array();
  for (Subset s : f.index.sets) {
    const Region& r = f.at(s);
    json e = {{"s", subset_to_json(s)}, {"vertices", r.vertices}};
    if (!r.is_closed()) {
      json ps = json::array();
      for (const Pair& p : r.pairs) ps.push_back({p.a, p.b});
      e["pairs"] = ps;
    }
    assignment.push_back(e);
  }
  for (const auto& [st, m] : f.transitions)
    if (!m.is_identity())
      trans.push_back({{"from", subset_to_json(st.first)}, {"to", subset_to_json(st.second)}, {"map", map_to_json(m)}});
  return {{"n", f.index.n}, {"ambient", to_json(f.ambient)}, {"assignment", assignment}, {"transitions", trans}};
}

inline DiagramFunctor functor_from_json(const json& j) {
  if (!j.is_object()) invalid_input("problem must be a JSON object");
  if (!j.contains("n") || !j["n"].is_number_integer()) invalid_input("problem needs an integer n");
  if (!j.contains("ambient")) invalid_input("problem needs an ambient structure");
  if (!j.contains("assignment") || !j["assignment"].is_array()) invalid_input("problem needs an assignment array");
  DiagramFunctor f;
  int n = j["n"].get<int>();
  f.ambient = structure_from_json(j["ambient"]);
  std::vector<Subset> sets;
  for (const auto& e : j["assignment"]) {
    if (!e.is_object() || !e.contains("s") || !e.contains("vertices")) invalid_input("bad assignment entry");
    Subset s = subset_of_list(int_list(e["s"], "s"), n);
    std::vector<int> vs = int_list(e["vertices"], "vertices");
    Region r;
    if (e.contains("pairs")) {
      std::vector<Pair> ps;
      if (!e["pairs"].is_array()) invalid_input("pairs must be an array");
      for (const auto& p : e["pairs"]) {
        std::vector<int> ab = int_list(p, "pair");
        if (ab.size() != 2) invalid_input("pair needs two vertices");
        ps.push_back(pair_of(ab[0], ab[1]));
      }
      r = Region(vs, ps);
    } else {
      r = closure_region(vs);
    }
    if (!f.value.emplace(s, r).second) invalid_input("set " + subset_name(s) + " assigned twice");
    sets.push_back(s);
  }
  f.index = IndexFamily::from_sets(n, sets);
  if (!f.index.downward_closed()) invalid_input("assignment domain is not closed under subsets");
  if (j.contains("transitions")) {
    if (!j["transitions"].is_array()) invalid_input("transitions must be an array");
    for (const auto& e : j["transitions"]) {
      if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e.contains("map"))
        invalid_input("bad transition entry");
      Subset s = subset_of_list(int_list(e["from"], "from"), n);
      Subset t = subset_of_list(int_list(e["to"], "to"), n);
      if (s == t || !is_subset(s, t) || !f.index.contains(s) || !f.index.contains(t))
        invalid_input("transition " + subset_name(s) + "->" + subset_name(t) + " is not between nested index sets");
      if (!f.transitions.emplace(std::make_pair(s, t), map_from_json(e["map"])).second)
        invalid_input("transition listed twice");
    }
  }
  return f;
}

}  // namespace amalgam
