#pragma once

#include <cstdint>
#include <vector>

namespace amalgam {

// Dense linear system over GF(2). Rows keep a record of which input rows were
// combined into them so an inconsistency comes with a certificate.
class Gf2System {
 public:
  explicit Gf2System(int vars) : vars_(vars), words_((vars + 63) / 64) {}

  int vars() const { return vars_; }
  int rows() const { return static_cast<int>(rhs_.size()); }

  // Repeated variables cancel, as they would in a sum.
  int add_row(const std::vector<int>& vars, bool rhs) {
    std::vector<std::uint64_t> row(words_, 0);
    for (int v : vars) row[v / 64] ^= std::uint64_t{1} << (v % 64);
    bits_.push_back(std::move(row));
    rhs_.push_back(rhs ? 1 : 0);
    return rows() - 1;
  }

  struct Result {
    bool feasible = false;
    std::vector<int> certificate;        // input rows summing to 0 = 1 when infeasible
    std::vector<std::uint8_t> solution;  // free variables set to 0
    std::vector<std::uint8_t> forced;    // 1 if the variable has the same value in every solution
    std::vector<int> free_vars;
    std::vector<std::vector<std::uint8_t>> kernel;  // one basis vector per free variable
  };

  Result solve() const {
    const int n = rows();
    const int rw = (n + 63) / 64;
    std::vector<std::vector<std::uint64_t>> a = bits_;
    std::vector<std::uint8_t> b = rhs_;
    std::vector<std::vector<std::uint64_t>> origin(n, std::vector<std::uint64_t>(rw, 0));
    for (int i = 0; i < n; ++i) origin[i][i / 64] |= std::uint64_t{1} << (i % 64);

    auto get = [](const std::vector<std::uint64_t>& r, int v) { return (r[v / 64] >> (v % 64)) & 1; };
    std::vector<int> pivot_col;
    int r = 0;
    for (int c = 0; c < vars_ && r < n; ++c) {
      int p = -1;
      for (int i = r; i < n; ++i)
        if (get(a[i], c)) { p = i; break; }
      if (p < 0) continue;
      std::swap(a[p], a[r]);
      std::swap(b[p], b[r]);
      std::swap(origin[p], origin[r]);
      for (int i = 0; i < n; ++i) {
        if (i == r || !get(a[i], c)) continue;
        for (int w = 0; w < words_; ++w) a[i][w] ^= a[r][w];
        for (int w = 0; w < rw; ++w) origin[i][w] ^= origin[r][w];
        b[i] ^= b[r];
      }
      pivot_col.push_back(c);
      ++r;
    }

    Result res;
    for (int i = r; i < n; ++i) {
      if (!b[i]) continue;
      for (int j = 0; j < n; ++j)
        if (get(origin[i], j)) res.certificate.push_back(j);
      return res;
    }
    res.feasible = true;
    std::vector<std::uint8_t> is_pivot(vars_, 0);
    for (int c : pivot_col) is_pivot[c] = 1;
    for (int c = 0; c < vars_; ++c)
      if (!is_pivot[c]) res.free_vars.push_back(c);
    res.solution.assign(vars_, 0);
    res.forced.assign(vars_, 0);
    for (int i = 0; i < r; ++i) {
      int c = pivot_col[i];
      res.solution[c] = b[i];
      bool touches_free = false;
      for (int f : res.free_vars)
        if (get(a[i], f)) { touches_free = true; break; }
      res.forced[c] = touches_free ? 0 : 1;
    }
    for (int f : res.free_vars) {
      std::vector<std::uint8_t> k(vars_, 0);
      k[f] = 1;
      for (int i = 0; i < r; ++i)
        if (get(a[i], f)) k[pivot_col[i]] = 1;
      res.kernel.push_back(std::move(k));
    }
    return res;
  }

 private:
  int vars_;
  int words_;
  std::vector<std::vector<std::uint64_t>> bits_;
  std::vector<std::uint8_t> rhs_;
};

}  // namespace amalgam
