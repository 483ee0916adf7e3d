/** @file dyadic.hpp
 *  Shifted dyadic intervals and cubes with exact endpoint arithmetic.
 *
 *  An interval of the grid with shift sigma = s/3 at scale j is
 *  2^j (k + [0,1) + (-1)^j sigma). Intervals are half-open so that a
 *  single scale partitions the line. Every predicate here is exact.
 */
#pragma once

#include <algorithm>
#include <map>
#include <tuple>
#include <vector>

#include "ttlab/core.hpp"

namespace ttlab {

/// Half-open rational interval [lo, hi).
struct Interval {
  Rat lo, hi;

  Rat length() const { return hi - lo; }
  Rat center() const { return (lo + hi) / 2; }
  /// Same center, length scaled by c.
  Interval dilate(const Rat& c) const {
    Rat half = c * (hi - lo) / 2;
    Rat m = center();
    return {m - half, m + half};
  }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Interval& o) const { return lo < o.hi && o.lo < hi; }
  bool contains_point(const Rat& x) const { return lo <= x && x < hi; }
  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

/// Distance from a point to the closure of an interval.
inline Rat dist(const Rat& x, const Interval& I) {
  if (x < I.lo) return I.lo - x;
  if (x > I.hi) return x - I.hi;
  return Rat(0);
}

/// Gap between two intervals (0 when they touch or overlap).
inline Rat dist(const Interval& a, const Interval& b) {
  if (a.hi <= b.lo) return b.lo - a.hi;
  if (b.hi <= a.lo) return a.lo - b.hi;
  return Rat(0);
}

/// Signed shift (-1)^j * s/3 used by the grid formula.
inline Rat grid_offset(long j, int s) {
  Rat off(s, 3);
  off.canonicalize();
  return (j % 2 == 0) ? off : Rat(-off);
}

/// One interval of a shifted dyadic grid.
class DyadicInterval {
 public:
  DyadicInterval() : DyadicInterval(0, BigInt(0), 0) {}
  DyadicInterval(long j, BigInt k, int s) : j_(j), k_(std::move(k)), s_(s) {
    if (s < 0 || s > 2) throw InvalidArgument("shift numerator must be 0, 1 or 2");
    Rat scale = pow2(j_);
    Rat left = Rat(k_) + grid_offset(j_, s_);
    lo_ = scale * left;
    hi_ = lo_ + scale;
  }

  long j() const { return j_; }
  const BigInt& k() const { return k_; }
  int s() const { return s_; }
  const Rat& lo() const { return lo_; }
  const Rat& hi() const { return hi_; }
  Rat length() const { return hi_ - lo_; }
  Rat center() const { return (lo_ + hi_) / 2; }
  Interval interval() const { return {lo_, hi_}; }
  Interval dilate(const Rat& c) const { return interval().dilate(c); }

  bool operator==(const DyadicInterval& o) const { return j_ == o.j_ && s_ == o.s_ && k_ == o.k_; }
  bool operator!=(const DyadicInterval& o) const { return !(*this == o); }
  bool operator<(const DyadicInterval& o) const {
    return std::tie(j_, s_) < std::tie(o.j_, o.s_) || (j_ == o.j_ && s_ == o.s_ && k_ < o.k_);
  }

 private:
  long j_;
  BigInt k_;
  int s_;
  Rat lo_, hi_;
};

/// Endpoints 2^j(k + (-1)^j sigma) and 2^j(k + 1 + (-1)^j sigma).
inline std::pair<Rat, Rat> endpoints(const DyadicInterval& I) { return {I.lo(), I.hi()}; }

/// True iff c'I' is contained in cI.
inline bool dilated_contains(const DyadicInterval& I, const Rat& c, const DyadicInterval& Ip,
                             const Rat& cp) {
  if (c <= 0 || cp <= 0) throw InvalidArgument("dilation factors must be positive");
  return I.dilate(c).contains(Ip.dilate(cp));
}

/// The grid interval at scale j and shift s containing the point x.
inline DyadicInterval containing_interval(long j, int s, const Rat& x) {
  BigInt k = floor_rat(x / pow2(j) - grid_offset(j, s));
  return DyadicInterval(j, k, s);
}

/// Grid intervals of shift s at scale j meeting [lo, hi] (closed window).
/// A half-open interval [l, r) is reported iff l <= hi and r > lo.
inline std::vector<DyadicInterval> enumerate_grid_1d(int s, long j, const Rat& lo, const Rat& hi) {
  std::vector<DyadicInterval> out;
  if (hi < lo) return out;
  Rat scale = pow2(j);
  Rat off = grid_offset(j, s);
  BigInt kmax = floor_rat(hi / scale - off);
  BigInt kmin = floor_rat(lo / scale - off - 1) + 1;
  for (BigInt k = kmin; k <= kmax; ++k) out.emplace_back(j, k, s);
  return out;
}

/// Cube of a shifted n-dyadic grid, n in {1,2,3}.
class ShiftedDyadicCube {
 public:
  ShiftedDyadicCube() = default;
  ShiftedDyadicCube(long j, std::vector<BigInt> k, std::vector<int> s) : j_(j) {
    if (k.size() != s.size() || k.empty() || k.size() > 3)
      throw InvalidArgument("cube dimension must be 1..3 with matching shift vector");
    for (std::size_t d = 0; d < k.size(); ++d) comps_.emplace_back(j, k[d], s[d]);
  }
  explicit ShiftedDyadicCube(std::vector<DyadicInterval> comps) : comps_(std::move(comps)) {
    if (comps_.empty() || comps_.size() > 3) throw InvalidArgument("cube dimension must be 1..3");
    j_ = comps_[0].j();
    for (auto& c : comps_)
      if (c.j() != j_) throw InvalidArgument("cube components must share one scale");
  }

  std::size_t dim() const { return comps_.size(); }
  long j() const { return j_; }
  const DyadicInterval& component(std::size_t d) const { return comps_.at(d); }
  const std::vector<DyadicInterval>& components() const { return comps_; }
  Rat side() const { return pow2(j_); }
  std::vector<int> shift() const {
    std::vector<int> s;
    for (auto& c : comps_) s.push_back(c.s());
    return s;
  }

  bool operator==(const ShiftedDyadicCube& o) const { return comps_ == o.comps_; }
  bool operator!=(const ShiftedDyadicCube& o) const { return !(*this == o); }
  bool operator<(const ShiftedDyadicCube& o) const { return comps_ < o.comps_; }

  /// cQ intersects c'Q' (all components).
  bool dilated_intersects(const Rat& c, const ShiftedDyadicCube& o, const Rat& co) const {
    for (std::size_t d = 0; d < dim(); ++d)
      if (!comps_[d].dilate(c).intersects(o.comps_[d].dilate(co))) return false;
    return true;
  }
  /// c'Q' is contained in cQ.
  bool dilated_contains(const Rat& c, const ShiftedDyadicCube& o, const Rat& co) const {
    for (std::size_t d = 0; d < dim(); ++d)
      if (!comps_[d].dilate(c).contains(o.comps_[d].dilate(co))) return false;
    return true;
  }

 private:
  long j_ = 0;
  std::vector<DyadicInterval> comps_;
};

/// Cubes of D^n_sigma with j in [j_lo, j_hi] meeting the closed box [lo_d, hi_d]^n,
/// ordered lexicographically in (j, k).
inline std::vector<ShiftedDyadicCube> enumerate_grid(const std::vector<int>& sigma, long j_lo,
                                                     long j_hi, const std::vector<Rat>& lo,
                                                     const std::vector<Rat>& hi) {
  std::vector<ShiftedDyadicCube> out;
  const std::size_t n = sigma.size();
  if (n == 0 || n > 3 || lo.size() != n || hi.size() != n)
    throw InvalidArgument("enumerate_grid: dimension mismatch");
  for (long j = j_lo; j <= j_hi; ++j) {
    std::vector<std::vector<DyadicInterval>> per(n);
    bool empty = false;
    for (std::size_t d = 0; d < n; ++d) {
      per[d] = enumerate_grid_1d(sigma[d], j, lo[d], hi[d]);
      if (per[d].empty()) empty = true;
    }
    if (empty) continue;
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      std::vector<DyadicInterval> comps;
      for (std::size_t d = 0; d < n; ++d) comps.push_back(per[d][idx[d]]);
      out.emplace_back(std::move(comps));
      std::size_t d = n;
      while (d > 0) {
        --d;
        if (++idx[d] < per[d].size()) break;
        idx[d] = 0;
        if (d == 0) goto next_scale;
      }
    }
  next_scale:;
  }
  return out;
}

inline constexpr long kSparseScaleGap = 30;  // 2^30 > 10^9

/// Direct pairwise test of the sparseness conditions (side lengths compare scales).
inline bool is_sparse(const std::vector<ShiftedDyadicCube>& cubes) {
  static const Rat big(1000000000);
  for (std::size_t a = 0; a < cubes.size(); ++a)
    for (std::size_t b = a + 1; b < cubes.size(); ++b) {
      const auto& Q = cubes[a];
      const auto& R = cubes[b];
      if (Q == R) continue;
      if (Q.j() != R.j()) {
        const auto& small = Q.j() < R.j() ? Q : R;
        const auto& large = Q.j() < R.j() ? R : Q;
        if (!(big * small.side() < large.side())) return false;
      } else if (Q.dilated_intersects(big, R, big)) {
        return false;
      }
    }
  return true;
}

/// Upper bound on the number of classes produced by split_sparse in dimension n.
inline BigInt split_sparse_class_bound(std::size_t n) {
  BigInt b = kSparseScaleGap;
  mpz_mul_2exp(b.get_mpz_t(), b.get_mpz_t(), 30 * n);
  return b;
}

/// Splits cubes of one grid into sparse classes keyed by (j mod 30, k_d mod 2^30).
/// Only nonempty classes are returned, in key order.
inline std::vector<std::vector<ShiftedDyadicCube>> split_sparse(
    const std::vector<ShiftedDyadicCube>& cubes) {
  std::vector<std::vector<ShiftedDyadicCube>> out;
  if (cubes.empty()) return out;
  const auto shift = cubes.front().shift();
  for (auto& q : cubes)
    if (q.shift() != shift) throw ShiftMismatch("split_sparse: cubes from different shifted grids");
  BigInt mod = 1;
  mpz_mul_2exp(mod.get_mpz_t(), mod.get_mpz_t(), 30);
  std::map<std::vector<BigInt>, std::vector<ShiftedDyadicCube>> classes;
  for (auto& q : cubes) {
    std::vector<BigInt> key;
    long jm = ((q.j() % kSparseScaleGap) + kSparseScaleGap) % kSparseScaleGap;
    key.emplace_back(jm);
    for (std::size_t d = 0; d < q.dim(); ++d) {
      BigInt r;
      mpz_fdiv_r(r.get_mpz_t(), q.component(d).k().get_mpz_t(), mod.get_mpz_t());
      key.push_back(r);
    }
    auto& cls = classes[key];
    if (std::find(cls.begin(), cls.end(), q) == cls.end()) cls.push_back(q);
  }
  for (auto& [key, cls] : classes) out.push_back(std::move(cls));
  return out;
}

}  // namespace ttlab
