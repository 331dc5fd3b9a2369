#include "openimage/cusps.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace openimage {

// lift a primitive pair mod N to coprime integers congruent to it
static std::pair<int64_t, int64_t> coprime_lift(int64_t x, int64_t y, int64_t N) {
  for (int64_t k = 0; k <= 2 * N + 2; ++k) {
    if (std::gcd(std::abs(x + k * N), std::abs(y)) == 1) return {x + k * N, y};
    if (std::gcd(std::abs(x), std::abs(y + k * N)) == 1) return {x, y + k * N};
  }
  throw std::logic_error("coprime_lift: search failed");
}

// Bezout completion: given coprime (a, c), a matrix [a b; c d] in SL2(Z).
static std::pair<int64_t, int64_t> bezout_column(int64_t a, int64_t c) {
  int64_t old_r = a, r = c, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    int64_t q = old_r / r;
    std::swap(old_r -= q * r, r);
    std::swap(old_s -= q * s, s);
    std::swap(old_t -= q * t, t);
  }
  if (old_r < 0) {
    old_s = -old_s;
    old_t = -old_t;
  }
  // a*old_s + c*old_t = 1; second column (b, d) = (-old_t, old_s)
  return {-old_t, old_s};
}

std::array<int64_t, 4> sl2z_lift(const ZModMat& A) {
  int64_t N = A.n;
  if (A.det() != 1 % N) throw std::domain_error("sl2z_lift: matrix not in SL2(Z/N)");
  auto [a, c] = coprime_lift(A.a, A.c, N);
  auto [b0, d0] = bezout_column(a, c);
  ZModMat B(N, a, b0, c, d0);
  ZModMat U = B.inverse() * A;
  if (U.a != 1 % N || U.c != 0 || U.d != 1 % N)
    throw std::logic_error("sl2z_lift: residual not unipotent");
  int64_t k = U.b;
  return {a, b0 + a * k, c, d0 + c * k};
}

int64_t CuspStructure::canon_class(int64_t x, int64_t y) const {
  x = mod_reduce(x, N_);
  y = mod_reduce(y, N_);
  int64_t nx = mod_reduce(-x, N_), ny = mod_reduce(-y, N_);
  return std::min(x * N_ + y, nx * N_ + ny);
}

CuspStructure::CuspStructure(const FinSubgroup& G)
    : N_(G.modulus()), G_(G), H_(G.sl2_intersection()) {
  if (!G_.det_full()) throw std::domain_error("CuspStructure: determinant not full");
  if (N_ == 1) {
    CuspData c;
    c.lift = {1, 0, 0, 1};
    cusps_.push_back(c);
    data_.index = 1;
    data_.pindex = 1;
    data_.v2 = data_.v3 = 1;
    data_.genus = 0;
    data_.cusp_count = 1;
    class_to_cusp_ = {0};
    orbit_count_ = 1;
    return;
  }
  compute_cusps();
  compute_elliptic_and_genus();
  compute_galois_orbits();
}

void CuspStructure::compute_cusps() {
  // orbits of H = G cap SL2 on primitive vectors mod N, up to sign
  std::map<int64_t, int64_t> cusp_of;
  std::vector<std::pair<int64_t, int64_t>> reps;
  for (int64_t x = 0; x < N_; ++x)
    for (int64_t y = 0; y < N_; ++y) {
      if (std::gcd(std::gcd(x, y), N_) != 1) continue;
      int64_t key = canon_class(x, y);
      if (cusp_of.count(key)) continue;
      int64_t idx = (int64_t)reps.size();
      reps.push_back({x, y});
      std::vector<std::pair<int64_t, int64_t>> queue{{x, y}};
      cusp_of[key] = idx;
      for (size_t i = 0; i < queue.size(); ++i) {
        auto [vx, vy] = queue[i];
        for (const auto& g : H_.generators()) {
          int64_t wx = mod_reduce(g.a * vx + g.b * vy, N_);
          int64_t wy = mod_reduce(g.c * vx + g.d * vy, N_);
          int64_t wkey = canon_class(wx, wy);
          if (!cusp_of.count(wkey)) {
            cusp_of[wkey] = idx;
            queue.push_back({wx, wy});
          }
        }
      }
    }

  data_.index = sl2_order(N_) / H_.order();
  bool minus_in_h = H_.contains(ZModMat::scalar(N_, N_ - 1));
  data_.pindex = minus_in_h ? data_.index : data_.index / 2;

  ZModMat minus = ZModMat::scalar(N_, N_ - 1);
  for (auto& [x, y] : reps) {
    CuspData c;
    c.vx = x;
    c.vy = y;
    auto [a, cc] = coprime_lift(x, y, N_);
    auto [b0, d0] = bezout_column(a, cc);
    c.lift = {a, b0, cc, d0};
    ZModMat A(N_, a, b0, cc, d0);
    ZModMat Ai = A.inverse();
    for (int64_t m : divisors(N_)) {
      ZModMat conj = A * ZModMat(N_, 1, m % N_, 0, 1) * Ai;
      if (H_.contains(conj)) {
        c.width = m;
        break;
      }
    }
    for (int64_t m : divisors(N_)) {
      ZModMat conj = A * ZModMat(N_, 1, m % N_, 0, 1) * Ai;
      if (H_.contains(conj) || H_.contains(minus * conj)) {
        c.h = m;
        break;
      }
    }
    c.regular = (c.width == c.h);
    cusps_.push_back(c);
  }
  data_.cusp_count = (int64_t)cusps_.size();

  class_to_cusp_.assign(N_ * N_, -1);
  for (auto& [key, idx] : cusp_of) class_to_cusp_[key] = idx;

  // ramification indices over the j-line always sum to the +-Gamma index;
  // with -I in Gamma_G this is the statement that widths sum to the index
  Int hsum = 0, wsum = 0;
  for (auto& c : cusps_) {
    hsum += c.h;
    wsum += c.width;
  }
  if (hsum != data_.pindex)
    throw std::logic_error("CuspStructure: cusp ramification does not sum to the index");
  if (minus_in_h && wsum != data_.index)
    throw std::logic_error("CuspStructure: widths do not sum to the index");
}

int64_t CuspStructure::cusp_of_vector(int64_t x, int64_t y) const {
  if (N_ == 1) return 0;
  int64_t key = canon_class(x, y);
  if (key < 0 || key >= (int64_t)class_to_cusp_.size() || class_to_cusp_[key] < 0)
    throw std::domain_error("cusp_of_vector: not a primitive vector");
  return class_to_cusp_[key];
}

void CuspStructure::compute_elliptic_and_genus() {
  FinSubgroup pmH = H_.joined_with({ZModMat::scalar(N_, N_ - 1)});
  FinSubgroup sl(N_, sl2_generators(N_));
  std::vector<ZModMat> reps{ZModMat::identity(N_)};
  for (size_t i = 0; i < reps.size(); ++i)
    for (const auto& g : sl.generators()) {
      ZModMat x = reps[i] * g;
      bool found = false;
      for (const auto& r : reps)
        if (pmH.contains(x * r.inverse())) {
          found = true;
          break;
        }
      if (!found) reps.push_back(x);
    }
  Int mu = sl2_order(N_) / pmH.order();
  if (Int((int64_t)reps.size()) != mu)
    throw std::logic_error("CuspStructure: coset enumeration incomplete");
  ZModMat S(N_, 0, -1, 1, 0), ST(N_, 0, -1, 1, 1);
  int64_t v2 = 0, v3 = 0;
  for (const auto& r : reps) {
    ZModMat ri = r.inverse();
    if (pmH.contains(r * S * ri)) ++v2;
    if (pmH.contains(r * ST * ri)) ++v3;
  }
  data_.v2 = v2;
  data_.v3 = v3;
  Rat g = Rat(1) + Rat(data_.pindex) / 12 - frac(v2, 4) - frac(v3, 3) - frac(data_.cusp_count, 2);
  g.canonicalize();
  if (g.get_den() != 1 || g < 0) throw std::logic_error("CuspStructure: genus identity failed");
  data_.genus = (int64_t)g.get_num().get_si();
}

void CuspStructure::compute_galois_orbits() {
  std::vector<int64_t> orbit(cusps_.size(), -1);
  int64_t next = 0;
  auto ugens = unit_group_generators(N_);
  for (size_t start = 0; start < cusps_.size(); ++start) {
    if (orbit[start] >= 0) continue;
    std::vector<int64_t> queue{(int64_t)start};
    orbit[start] = next;
    for (size_t i = 0; i < queue.size(); ++i)
      for (int64_t m : ugens) {
        int64_t img = galois_act(m, queue[i]);
        if (orbit[img] < 0) {
          orbit[img] = next;
          queue.push_back(img);
        }
      }
    ++next;
  }
  for (size_t i = 0; i < cusps_.size(); ++i) cusps_[i].galois_orbit = orbit[i];
  orbit_count_ = next;
}

int64_t CuspStructure::galois_act(int64_t m, int64_t cusp_index) const {
  if (N_ == 1) return 0;
  m = mod_reduce(m, N_);
  if (std::gcd(m, N_) != 1) throw std::domain_error("galois_act: m not a unit");
  auto trans = G_.det_transversal();
  int64_t want = inv_mod(m, N_);
  ZModMat g = ZModMat::identity(N_);
  bool found = false;
  for (auto& [d, r] : trans)
    if (d == want) {
      g = r;
      found = true;
    }
  if (!found) throw std::logic_error("galois_act: determinant transversal incomplete");
  const CuspData& c = cusps_[cusp_index];
  int64_t wx = mod_reduce(g.a * c.vx + g.b * c.vy, N_);
  int64_t wy = mod_reduce(g.c * c.vx + g.d * c.vy, N_);
  return cusp_of_vector(wx, wy);
}

GammaData gamma_data(const FinSubgroup& G) { return CuspStructure(G).gamma(); }
int64_t genus_of(const FinSubgroup& G) { return CuspStructure(G).gamma().genus; }

bool has_real_points(const FinSubgroup& G, int64_t class_cap) {
  int64_t N = G.modulus();
  if (!G.det_full()) throw std::domain_error("has_real_points: determinant not full");
  if (!G.contains(ZModMat::scalar(N, N - 1)))
    throw std::domain_error("has_real_points: -I must lie in G");
  if (N == 1) return true;
  for (ZModMat J : {ZModMat(N, 1, 0, 0, -1), ZModMat(N, 1, 1, 0, -1)}) {
    if (G.contains(J)) return true;
    std::set<unsigned __int128> cls{J.key128()};
    std::vector<ZModMat> queue{J};
    auto gens = gl2_generators(N);
    for (size_t i = 0; i < queue.size(); ++i)
      for (const auto& g : gens) {
        ZModMat x = g * queue[i] * g.inverse();
        if (cls.insert(x.key128()).second) {
          if ((int64_t)cls.size() > class_cap)
            throw std::domain_error("has_real_points: conjugacy class exceeds cap");
          if (G.contains(x)) return true;
          queue.push_back(x);
        }
      }
  }
  return false;
}

}  // namespace openimage
