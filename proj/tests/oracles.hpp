#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance runner. Everything here is exhaustive and only meant for tiny inputs.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "amalgam/builder.hpp"
#include "amalgam/embedding.hpp"
#include "amalgam/structure.hpp"

namespace oracle {

using namespace amalgam;

// Q read straight off the definition: a Bit triangle, parities summing to its bit.
inline bool q_holds(const Structure& s, const Triple& t, int p01, int p02, int p12) {
  int c = s.status(t);
  return c != kAbsent && ((p01 + p02 + p12) & 1) == c;
}

// Every vertex permutation times every shift vector, kept when R and Q are
// preserved on all 8 fiber triples of every triangle.
inline std::vector<PartialMap> automorphisms(const Structure& s, const std::vector<int>& moving) {
  std::vector<int> vs = sorted_unique(moving);
  std::vector<Pair> ps = pairs_over(vs);
  std::vector<Triple> ts = triples_over(vs);
  std::vector<PartialMap> out;
  std::vector<int> img = vs;
  do {
    PartialMap base;
    for (std::size_t i = 0; i < vs.size(); ++i) base.vertex_map[vs[i]] = img[i];
    bool r_ok = true;
    for (const Triple& t : ts)
      if ((s.status(t) == kAbsent) != (s.status(base(t[0]), base(t[1]), base(t[2])) == kAbsent)) r_ok = false;
    if (!r_ok) continue;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ps.size()); ++mask) {
      PartialMap m = base;
      for (std::size_t k = 0; k < ps.size(); ++k) m.shift[ps[k]] = (mask >> k) & 1;
      bool ok = true;
      for (const Triple& t : ts) {
        Pair p{t[0], t[1]}, q{t[0], t[2]}, r{t[1], t[2]};
        Triple u = triple_of(m(t[0]), m(t[1]), m(t[2]));
        for (int code = 0; code < 8 && ok; ++code) {
          Element x = m.apply(Element::fiber(p, code & 1)), y = m.apply(Element::fiber(q, (code >> 1) & 1)),
                  z = m.apply(Element::fiber(r, code >> 2));
          int par[3] = {0, 0, 0};
          for (const Element* e : {&x, &y, &z}) {
            int slot = e->pair_of() == Pair{u[0], u[1]} ? 0 : e->pair_of() == Pair{u[0], u[2]} ? 1 : 2;
            par[slot] = e->parity;
          }
          if (q_holds(s, t, code & 1, (code >> 1) & 1, code >> 2) != q_holds(s, u, par[0], par[1], par[2])) ok = false;
        }
        if (!ok) break;
      }
      if (ok) out.push_back(m);
    }
  } while (std::next_permutation(img.begin(), img.end()));
  std::sort(out.begin(), out.end());
  return out;
}

inline bool fixes(const PartialMap& m, const std::vector<Element>& c) {
  for (const Element& e : c)
    if (m.apply(e) != e) return false;
  return true;
}

// Elements of s fixed by every automorphism of s that fixes c pointwise.
inline std::set<Element> definable_closure(const Structure& s, const std::vector<Element>& c) {
  std::vector<PartialMap> auts;
  for (const PartialMap& m : automorphisms(s, s.vertices))
    if (fixes(m, c)) auts.push_back(m);
  std::set<Element> out;
  for (const Element& e : ClosedSet(s.vertices).elements()) {
    bool fixed = true;
    for (const PartialMap& m : auts)
      if (m.apply(e) != e) fixed = false;
    if (fixed) out.insert(e);
  }
  return out;
}

// Base bits of the form g(ab) + g(ac) + g(bc): every 4-set is even.
inline Structure coboundary(int n, std::uint64_t seed) {
  Structure s = generate(Flavor::Example1, n, 0, true);
  std::mt19937_64 rng(seed);
  std::map<Pair, int> g;
  for (const Pair& p : pairs_over(s.vertices)) g[p] = random_bit(rng);
  for (auto& [t, c] : s.base) c = (g[{t[0], t[1]}] + g[{t[1], t[2]}] + g[{t[0], t[2]}]) & 1;
  return s;
}

inline std::set<Element> element_set(const ClosedSet& c) {
  auto e = c.elements();
  return {e.begin(), e.end()};
}

// Toggle membership of one ordered fiber triple in the explicit Q table.
inline void toggle(Relational& rel, const std::array<int, 3>& e) {
  auto it = std::lower_bound(rel.q.begin(), rel.q.end(), e);
  if (it != rel.q.end() && *it == e) rel.q.erase(it);
  else rel.q.insert(it, e);
}

}  // namespace oracle
