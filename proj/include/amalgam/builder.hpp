#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "amalgam/structure.hpp"

namespace amalgam {

inline int random_bit(std::mt19937_64& rng) { return static_cast<int>(rng() >> 63); }

// One uniform bit per 3-subset, in lexicographic order of the triple.
inline Structure generate(Flavor flavor, int n_vertices, std::uint64_t seed, bool all_zero = false) {
  if (n_vertices < 0) invalid_input("vertex count must be non-negative");
  std::vector<int> vs;
  for (int i = 0; i < n_vertices; ++i) vs.push_back(i);
  Structure s = make_structure(flavor, vs);
  std::mt19937_64 rng(seed);
  for (auto& [t, c] : s.base) {
    int r = all_zero ? 0 : random_bit(rng);
    c = flavor == Flavor::Example1 ? r : (r ? 0 : kAbsent);
  }
  return s;
}

// Adds vertex max+1. statuses lists triangles {v, w, new}; the rest get fill.
inline Structure add_vertex(const Structure& s, const std::map<Pair, int>& statuses, int fill) {
  Structure out = s;
  int b = s.max_vertex() + 1;
  out.vertices.push_back(b);
  for (const Pair& p : pairs_over(s.vertices)) {
    auto it = statuses.find(p);
    out.base[triple_of(p.a, p.b, b)] = it == statuses.end() ? fill : it->second;
  }
  return out;
}

// Neutral padding: Example1 buffer triangles get seeded random bits, Example2
// buffer vertices carry no R at all.
inline Structure append_buffer(const Structure& s, int count, std::uint64_t seed, std::vector<int>* added = nullptr) {
  if (count < 0) invalid_input("buffer must be non-negative");
  Structure out = s;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int k = 0; k < count; ++k) {
    std::map<Pair, int> st;
    for (const Pair& p : pairs_over(out.vertices))
      st[p] = out.flavor == Flavor::Example1 ? random_bit(rng) : kAbsent;
    out = add_vertex(out, st, kAbsent);
    if (added) added->push_back(out.max_vertex());
  }
  return out;
}

struct ExtensionRequest {
  std::vector<int> anchors;
  std::map<std::pair<int, int>, int> chosen;  // (i, j) anchor indices, i < j -> parity of x_ij; missing = 0
  std::set<std::pair<int, int>> pattern;      // W: index pairs where Q(x_ij, y_i, y_j) must hold
};

struct ExtensionOptions {
  std::uint64_t seed = 0;
  bool zero_fresh = false;  // unconstrained new triangles get Bit(0)
};

struct ExtensionResult {
  Structure structure;
  int vertex = -1;
  std::vector<Element> fibers;  // y_i over (anchor_i, vertex)
};

inline ExtensionResult extend_axiom4(const Structure& s, const ExtensionRequest& req, const ExtensionOptions& opt = {}) {
  if (s.flavor != Flavor::Example1) throw Error(ErrorKind::Unsupported, "the extension axiom is not part of example2");
  const int n = static_cast<int>(req.anchors.size());
  if (sorted_unique(req.anchors).size() != req.anchors.size()) invalid_input("anchors must be distinct");
  for (int a : req.anchors)
    if (!s.has_vertex(a)) invalid_input("anchor " + std::to_string(a) + " not in structure");
  for (auto [ij, d] : req.chosen) {
    if (ij.first < 0 || ij.second >= n || ij.first >= ij.second) invalid_input("chosen fiber outside the anchors");
    if (d != 0 && d != 1) invalid_input("fiber parity must be 0 or 1");
  }
  for (auto ij : req.pattern)
    if (ij.first < 0 || ij.second >= n || ij.first >= ij.second) invalid_input("pattern pair outside the anchors");

  // unknowns: bits of (a_i, a_j, b) first so pivots land there, then y_i
  std::vector<std::pair<int, int>> idx;
  std::map<std::pair<int, int>, int> var;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      var[{i, j}] = static_cast<int>(idx.size());
      idx.push_back({i, j});
    }
  const int m = static_cast<int>(idx.size());
  Gf2System sys(m + n);
  for (auto [i, j] : idx) {
    auto it = req.chosen.find({i, j});
    int x = it == req.chosen.end() ? 0 : it->second;
    bool in_w = req.pattern.count({i, j}) > 0;
    sys.add_row({var[{i, j}], m + i, m + j}, ((x + (in_w ? 0 : 1)) & 1) != 0);
  }
  auto res = sys.solve();
  if (!res.feasible) internal_error("extension system infeasible");

  int b = s.max_vertex() + 1;
  std::map<Pair, int> statuses;
  std::mt19937_64 rng(opt.seed);
  std::map<Pair, int> pinned;
  for (auto [i, j] : idx) pinned[pair_of(req.anchors[i], req.anchors[j])] = res.solution[var[{i, j}]];
  for (const Pair& p : pairs_over(s.vertices)) {
    auto it = pinned.find(p);
    if (it != pinned.end()) {
      statuses[p] = it->second;
    } else {
      int r = random_bit(rng);
      statuses[p] = opt.zero_fresh ? 0 : r;
    }
  }
  ExtensionResult out;
  out.structure = add_vertex(s, statuses, 0);
  out.vertex = b;
  for (int i = 0; i < n; ++i) out.fibers.push_back(Element::fiber(pair_of(req.anchors[i], b), res.solution[m + i]));

  for (auto [i, j] : idx) {
    auto it = req.chosen.find({i, j});
    Element x = Element::fiber(pair_of(req.anchors[i], req.anchors[j]), it == req.chosen.end() ? 0 : it->second);
    if (eval_Q(out.structure, x, out.fibers[i], out.fibers[j]) != (req.pattern.count({i, j}) > 0))
      internal_error("extension misses the requested pattern");
  }
  return out;
}

// R on the triple, and no third vertex forms an R-triangle with two of its points.
inline bool is_blocked(const Structure& s, const Triple& t) {
  if (s.flavor != Flavor::Example2) return false;
  if (s.status(t) == kAbsent) return false;
  for (int v : s.vertices) {
    if (v == t[0] || v == t[1] || v == t[2]) continue;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (s.status(t[i], t[j], v) != kAbsent) return false;
  }
  return true;
}

// Example2 extension by one vertex. With a blocked triple to preserve, the
// triangles through two of its points are forced to stay without R.
inline Structure extend_example2(const Structure& s, std::map<Pair, int> statuses,
                                 const std::optional<Triple>& preserve = std::nullopt) {
  if (s.flavor != Flavor::Example2) invalid_input("extend_example2 needs an example2 structure");
  for (auto& [p, c] : statuses)
    if (c != kAbsent && c != 0) invalid_input("example2 triangles are absent or bit 0");
  if (preserve)
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) statuses[pair_of((*preserve)[i], (*preserve)[j])] = kAbsent;
  return add_vertex(s, statuses, kAbsent);
}

struct BlockedConfiguration {
  Structure structure;
  Triple triple{};
  std::vector<int> model;  // the vertices outside the triple
};

// Three model vertices plus a1, a2, a3 sharing one R-pattern over the model pairs.
inline BlockedConfiguration blocked_configuration(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<int> model{0, 1, 2};
  const Triple t{3, 4, 5};
  Structure s = make_structure(Flavor::Example2, {0, 1, 2, 3, 4, 5});
  s.base[{0, 1, 2}] = random_bit(rng) ? 0 : kAbsent;
  std::map<Pair, int> pattern;
  for (const Pair& p : pairs_over(model)) pattern[p] = random_bit(rng) ? 0 : kAbsent;
  for (int a : t)
    for (const Pair& p : pairs_over(model)) s.base[triple_of(a, p.a, p.b)] = pattern[p];
  s.base[t] = 0;
  return {s, t, model};
}

}  // namespace amalgam
