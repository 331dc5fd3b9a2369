#include "openimage/gl2.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

namespace openimage {

// ---------------------------------------------------------------- ProjDomain

ProjDomain::ProjDomain(int64_t N) : N_(N) {
  for (auto& [p, e] : factorize(N)) {
    int64_t q = 1;
    for (int i = 0; i < e; ++i) q *= p;
    Piece pc;
    pc.q = q;
    pc.p = p;
    pc.offset = size_;
    pc.count = q + q / p;
    size_ += pc.count;
    pieces_.push_back(pc);
  }
}

int64_t ProjDomain::canon(const Piece& pc, int64_t x, int64_t y) const {
  // representatives: (1,t) -> index t; (s,1) with p | s -> index q + s/p
  if (x % pc.p != 0) {
    int64_t xi = inv_mod(x, pc.q);
    return pc.offset + mul_mod(y, xi, pc.q);
  }
  int64_t yi = inv_mod(y, pc.q);
  int64_t s = mul_mod(x, yi, pc.q);
  return pc.offset + pc.q + s / pc.p;
}

int64_t ProjDomain::apply(const ZModMat& A, int64_t point) const {
  for (const Piece& pc : pieces_) {
    if (point >= pc.offset + pc.count) continue;
    int64_t idx = point - pc.offset;
    int64_t x, y;
    if (idx < pc.q) {
      x = 1;
      y = idx;
    } else {
      x = (idx - pc.q) * pc.p;
      y = 1;
    }
    int64_t a = A.a % pc.q, b = A.b % pc.q, c = A.c % pc.q, d = A.d % pc.q;
    int64_t nx = mod_reduce(a * x + b * y, pc.q);
    int64_t ny = mod_reduce(c * x + d * y, pc.q);
    return canon(pc, nx, ny);
  }
  throw std::logic_error("ProjDomain: point out of range");
}

std::shared_ptr<const ProjDomain> ProjDomain::get(int64_t N) {
  static std::mutex mu;
  static std::map<int64_t, std::shared_ptr<const ProjDomain>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[N];
  if (!slot) slot = std::make_shared<ProjDomain>(N);
  return slot;
}

// ----------------------------------------------------------------- StabChain

StabChain::StabChain(int64_t N) : N_(N), dom_(N > 1 ? ProjDomain::get(N) : nullptr) {
  scalar_kernel_.insert(1 % N_);
}

void StabChain::insert_scalar(int64_t s) {
  s = mod_reduce(s, N_);
  if (scalar_kernel_.count(s)) return;
  std::vector<int64_t> work{s};
  while (!work.empty()) {
    int64_t x = work.back();
    work.pop_back();
    if (scalar_kernel_.count(x)) continue;
    scalar_kernel_.insert(x);
    for (int64_t y : std::vector<int64_t>(scalar_kernel_.begin(), scalar_kernel_.end()))
      work.push_back(mul_mod(x, y, N_));
  }
}

void StabChain::rebuild_orbit(size_t lvl) {
  Level& L = levels_[lvl];
  L.act_gens.clear();
  for (size_t k = lvl; k < levels_.size(); ++k)
    L.act_gens.insert(L.act_gens.end(), levels_[k].gens.begin(), levels_[k].gens.end());
  L.via.assign(dom_->size(), 0);
  L.via[L.base] = -1;
  std::vector<int64_t> queue{L.base};
  L.orbit_size = 1;
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    int64_t p = queue[qi];
    for (size_t gi = 0; gi < L.act_gens.size(); ++gi) {
      int64_t im = dom_->apply(L.act_gens[gi], p);
      if (L.via[im] == 0) {
        L.via[im] = (int32_t)gi + 1;
        ++L.orbit_size;
        queue.push_back(im);
      }
    }
  }
}

ZModMat StabChain::transversal(size_t lvl, int64_t point) const {
  const Level& L = levels_[lvl];
  ZModMat u = ZModMat::identity(N_);
  int64_t cur = point;
  while (cur != L.base) {
    int32_t v = L.via[cur];
    if (v <= 0) throw std::logic_error("StabChain: point outside orbit");
    const ZModMat& g = L.act_gens[v - 1];
    u = u * g;  // point = g1(g2(...(base))), visiting g1 first
    cur = dom_->apply(g.inverse(), cur);
  }
  return u;
}

ZModMat StabChain::sift(ZModMat g, size_t from) const {
  for (size_t j = from; j < levels_.size(); ++j) {
    const Level& L = levels_[j];
    int64_t p = dom_->apply(g, L.base);
    if (p == L.base) continue;
    if (L.via[p] == 0) return g;
    g = transversal(j, p).inverse() * g;
  }
  return g;
}

size_t StabChain::place_residue(const ZModMat& r, size_t at_level) {
  for (size_t j = at_level; j < levels_.size(); ++j) {
    if (dom_->apply(r, levels_[j].base) != levels_[j].base) {
      levels_[j].gens.push_back(r);
      return j;
    }
  }
  int64_t moved = -1;
  for (int64_t p = 0; p < dom_->size(); ++p)
    if (dom_->apply(r, p) != p) {
      moved = p;
      break;
    }
  if (moved < 0) throw std::logic_error("StabChain: non-scalar residue acting trivially");
  Level L;
  L.base = moved;
  L.gens.push_back(r);
  levels_.push_back(std::move(L));
  return levels_.size() - 1;
}

bool StabChain::verify_level(size_t lvl, size_t* redo) {
  rebuild_orbit(lvl);
  std::vector<int64_t> orbit;
  orbit.reserve(levels_[lvl].orbit_size);
  for (int64_t p = 0; p < dom_->size(); ++p)
    if (levels_[lvl].via[p] != 0) orbit.push_back(p);
  size_t ngens = levels_[lvl].act_gens.size();
  for (int64_t p : orbit) {
    ZModMat up = transversal(lvl, p);
    for (size_t gi = 0; gi < ngens; ++gi) {
      ZModMat g = levels_[lvl].act_gens[gi];
      int64_t q = dom_->apply(g, p);
      ZModMat uq = transversal(lvl, q);
      ZModMat h = uq.inverse() * g * up;  // fixes this base
      ZModMat r = sift(h, lvl + 1);
      if (r == ZModMat::identity(N_)) continue;
      if (r.is_scalar()) {
        insert_scalar(r.a);  // central; no orbit is affected
        continue;
      }
      *redo = place_residue(r, lvl + 1);
      return false;
    }
  }
  return true;
}

void StabChain::complete_all() {
  if (levels_.empty()) return;
  size_t i = levels_.size() - 1;
  while (true) {
    size_t redo = 0;
    if (verify_level(i, &redo)) {
      if (i == 0) break;
      --i;
    } else {
      i = redo;
    }
  }
}

void StabChain::add_generator(const ZModMat& g) {
  if (N_ == 1) return;
  if (!g.invertible()) throw std::domain_error("StabChain: generator not invertible");
  if (contains(g)) return;
  gens_.push_back(g);
  if (g.is_scalar()) {
    insert_scalar(g.a);
    return;
  }
  if (levels_.empty()) {
    int64_t moved = -1;
    for (int64_t p = 0; p < dom_->size(); ++p)
      if (dom_->apply(g, p) != p) {
        moved = p;
        break;
      }
    Level L;
    L.base = moved;
    levels_.push_back(std::move(L));
  }
  levels_[0].gens.push_back(g);
  complete_all();
}

bool StabChain::contains(const ZModMat& g) const {
  if (N_ == 1) return true;
  ZModMat r = sift(g, 0);
  if (!r.is_scalar()) return false;
  return scalar_kernel_.count(r.a) > 0;
}

Int StabChain::order() const {
  Int o = scalar_kernel_.size();
  for (const Level& L : levels_) o *= L.orbit_size;
  return o;
}

// --------------------------------------------------------------- FinSubgroup

struct FinSubgroup::Cache {
  std::mutex mu;
  std::unique_ptr<StabChain> chain;
  std::optional<Int> order;
  std::optional<std::vector<ZModMat>> elements;
};

FinSubgroup::FinSubgroup(int64_t N, std::vector<ZModMat> gens)
    : N_(N), gens_(std::move(gens)), cache_(std::make_shared<Cache>()) {
  for (auto& g : gens_) {
    if (g.n != N_) throw std::domain_error("FinSubgroup: generator modulus mismatch");
    if (!g.invertible()) throw std::domain_error("FinSubgroup: generator not invertible");
  }
}

StabChain& FinSubgroup::chain() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->chain) {
    cache_->chain = std::make_unique<StabChain>(N_);
    for (const auto& g : gens_) cache_->chain->add_generator(g);
  }
  return *cache_->chain;
}

const Int& FinSubgroup::order() const {
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (cache_->order) return *cache_->order;
  }
  Int o = chain().order();
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->order = o;
  return *cache_->order;
}

bool FinSubgroup::contains(const ZModMat& g) const {
  if (g.n != N_) throw std::domain_error("contains: modulus mismatch");
  return chain().contains(g);
}

bool FinSubgroup::contains_group(const FinSubgroup& H) const {
  for (const auto& g : H.generators())
    if (!contains(g)) return false;
  return true;
}

bool FinSubgroup::same_group(const FinSubgroup& H) const {
  return N_ == H.N_ && contains_group(H) && order() == H.order();
}

const std::vector<ZModMat>& FinSubgroup::elements(int64_t cap) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (cache_->elements) return *cache_->elements;
  }
  if (order() > cap) throw std::domain_error("FinSubgroup::elements: order exceeds cap");
  std::vector<ZModMat> out{ZModMat::identity(N_)};
  std::set<unsigned __int128> seen{out[0].key128()};
  for (size_t i = 0; i < out.size(); ++i) {
    for (const auto& g : gens_) {
      ZModMat h = out[i] * g;
      if (seen.insert(h.key128()).second) out.push_back(h);
    }
  }
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->elements = std::move(out);
  return *cache_->elements;
}

std::vector<int64_t> FinSubgroup::det_image() const {
  std::set<int64_t> seen{1 % N_};
  std::vector<int64_t> queue{1 % N_};
  for (size_t i = 0; i < queue.size(); ++i)
    for (const auto& g : gens_) {
      int64_t d = mul_mod(queue[i], g.det(), N_);
      if (seen.insert(d).second) queue.push_back(d);
    }
  return std::vector<int64_t>(seen.begin(), seen.end());
}

bool FinSubgroup::det_full() const {
  return (int64_t)det_image().size() == (N_ == 1 ? 1 : euler_phi(N_));
}

bool FinSubgroup::contains_all_scalars() const {
  for (int64_t u : unit_group_generators(N_))
    if (!contains(ZModMat::scalar(N_, u))) return false;
  return true;
}

std::vector<std::pair<int64_t, ZModMat>> FinSubgroup::det_transversal() const {
  std::map<int64_t, ZModMat> reps;
  reps[1 % N_] = ZModMat::identity(N_);
  std::vector<int64_t> queue{1 % N_};
  for (size_t i = 0; i < queue.size(); ++i)
    for (const auto& g : gens_) {
      int64_t d = mul_mod(queue[i], g.det(), N_);
      if (!reps.count(d)) {
        reps[d] = reps[queue[i]] * g;
        queue.push_back(d);
      }
    }
  return std::vector<std::pair<int64_t, ZModMat>>(reps.begin(), reps.end());
}

// Drop generators that do not enlarge the group; keeps chains small.
std::vector<ZModMat> reduce_generators(int64_t N, const std::vector<ZModMat>& gens) {
  StabChain ch(N);
  std::vector<ZModMat> kept;
  for (const auto& g : gens) {
    if (!ch.contains(g)) {
      ch.add_generator(g);
      kept.push_back(g);
    }
  }
  return kept;
}

FinSubgroup FinSubgroup::sl2_intersection() const {
  auto reps = det_transversal();
  std::map<int64_t, ZModMat> rep_of;
  for (auto& [d, m] : reps) rep_of[d] = m;
  std::vector<ZModMat> schreier;
  for (auto& [d, r] : reps)
    for (const auto& g : gens_) {
      ZModMat x = r * g;
      ZModMat s = x * rep_of[x.det()].inverse();
      if (!(s == ZModMat::identity(N_))) schreier.push_back(s);
    }
  return FinSubgroup(N_, reduce_generators(N_, schreier));
}

FinSubgroup FinSubgroup::conjugate(const ZModMat& A) const {
  std::vector<ZModMat> out;
  ZModMat Ai = A.inverse();
  for (const auto& g : gens_) out.push_back(A * g * Ai);
  return FinSubgroup(N_, out);
}

FinSubgroup FinSubgroup::joined_with(const std::vector<ZModMat>& extra) const {
  std::vector<ZModMat> out = gens_;
  out.insert(out.end(), extra.begin(), extra.end());
  return FinSubgroup(N_, reduce_generators(N_, out));
}

FinSubgroup FinSubgroup::derived_subgroup() const {
  std::vector<ZModMat> seed;
  for (size_t i = 0; i < gens_.size(); ++i)
    for (size_t j = 0; j < gens_.size(); ++j)
      if (i != j) seed.push_back(commutator(gens_[i], gens_[j]));
  FinSubgroup D(N_, reduce_generators(N_, seed));
  return D.normal_closure_in(*this);
}

FinSubgroup FinSubgroup::normal_closure_in(const FinSubgroup& G) const {
  StabChain ch(N_);
  std::vector<ZModMat> closure_gens;
  std::vector<ZModMat> work = gens_;
  for (const auto& g : work)
    if (!ch.contains(g)) {
      ch.add_generator(g);
      closure_gens.push_back(g);
    }
  for (size_t i = 0; i < closure_gens.size(); ++i) {
    for (const auto& g : G.generators()) {
      ZModMat c = g * closure_gens[i] * g.inverse();
      if (!ch.contains(c)) {
        ch.add_generator(c);
        closure_gens.push_back(c);
      }
    }
  }
  return FinSubgroup(N_, closure_gens);
}

bool FinSubgroup::is_normal_in(const FinSubgroup& G) const {
  for (const auto& g : G.generators()) {
    ZModMat gi = g.inverse();
    for (const auto& h : gens_)
      if (!contains(g * h * gi)) return false;
  }
  return true;
}

FinSubgroup FinSubgroup::project(int64_t m) const {
  if (N_ % m != 0) throw std::domain_error("project: m must divide N");
  std::vector<ZModMat> out;
  for (const auto& g : gens_) out.push_back(g.reduce(m));
  return FinSubgroup(m, reduce_generators(m, out));
}

// -------------------------------------------------------------- OpenSubgroup

Int ambient_order(Ambient amb, int64_t n) {
  return amb == Ambient::GL2 ? gl2_order(n) : sl2_order(n);
}

OpenSubgroup::OpenSubgroup(Ambient amb, FinSubgroup image, bool minimal)
    : amb_(amb), img_(std::move(image)), minimal_(minimal) {
  if (amb == Ambient::SL2)
    for (const auto& g : img_.generators())
      if (g.det() != 1 % img_.modulus()) throw std::domain_error("OpenSubgroup: SL2 generator with det != 1");
}

OpenSubgroup OpenSubgroup::full(Ambient amb) {
  std::vector<ZModMat> gens = amb == Ambient::GL2 ? gl2_generators(2) : sl2_generators(2);
  return OpenSubgroup(amb, FinSubgroup(2, gens));  // level 1, presented mod 2
}

std::vector<ZModMat> kernel_generators(Ambient amb, int64_t M, int64_t t) {
  // kernel of reduction mod M inside matrices mod M*t, for t | M
  int64_t Mt = M * t;
  std::vector<ZModMat> ker;
  if (amb == Ambient::GL2) {
    ker.push_back(ZModMat(Mt, 1 + M, 0, 0, 1));
    ker.push_back(ZModMat(Mt, 1, M, 0, 1));
    ker.push_back(ZModMat(Mt, 1, 0, M, 1));
    ker.push_back(ZModMat(Mt, 1, 0, 0, 1 + M));
  } else {
    ker.push_back(ZModMat(Mt, 1, M, 0, 1));
    ker.push_back(ZModMat(Mt, 1, 0, M, 1));
    ker.push_back(ZModMat(Mt, 1 + M, 0, 0, mod_reduce(1 - M, Mt)));  // det = 1 - M^2 = 1 (t | M)
  }
  return ker;
}

FinSubgroup OpenSubgroup::image_mod(int64_t m) const {
  int64_t N = img_.modulus();
  FinSubgroup cur = img_;
  // 1. raise exponents of primes dividing N, in chunks t | current modulus
  int64_t target_old = 1;
  for (auto& [p, e] : factorize(N)) {
    int64_t v = 0, mm = m;
    while (mm % p == 0) mm /= p, ++v;
    int64_t ee = std::max<int64_t>(e, v);
    for (int64_t i = 0; i < ee; ++i) target_old *= p;
  }
  while (cur.modulus() != target_old) {
    int64_t M = cur.modulus();
    // largest t | M with M*t | target_old... grow prime by prime
    int64_t t = 1;
    for (auto& [p, e] : factorize(M)) {
      int64_t cur_e = e, tgt_e = 0, x = target_old;
      while (x % p == 0) x /= p, ++tgt_e;
      int64_t grow = std::min(cur_e, tgt_e - cur_e);
      for (int64_t i = 0; i < grow; ++i) t *= p;
    }
    if (t == 1) throw std::logic_error("image_mod: cannot grow modulus");
    int64_t Mt = M * t;
    std::vector<ZModMat> gens;
    for (const auto& g : cur.generators()) {
      ZModMat lift(Mt, g.a, g.b, g.c, g.d);
      if (amb_ == Ambient::SL2) {
        // the entrywise lift of a det-1 matrix has det in 1 + M Z/Mt; fix it
        // with a diagonal factor congruent to I mod M
        int64_t u = inv_mod(lift.det(), Mt);
        lift = lift * ZModMat(Mt, 1, 0, 0, u);
      }
      gens.push_back(lift);
    }
    for (const auto& k : kernel_generators(amb_, M, t)) gens.push_back(k);
    cur = FinSubgroup(Mt, gens);
  }
  // 2. adjoin full factors at new primes
  int64_t mm = m;
  for (auto& [p, e] : factorize(N)) {
    while (mm % p == 0) mm /= p;
  }
  if (mm > 1) {
    int64_t M = cur.modulus();
    int64_t Mt = M * mm;
    std::vector<ZModMat> gens;
    for (const auto& g : cur.generators())
      gens.push_back(ZModMat(Mt, crt(g.a, M, 1, mm), crt(g.b, M, 0, mm), crt(g.c, M, 0, mm),
                             crt(g.d, M, 1, mm)));
    auto fullg = amb_ == Ambient::GL2 ? gl2_generators(mm) : sl2_generators(mm);
    for (const auto& g : fullg)
      gens.push_back(ZModMat(Mt, crt(1, M, g.a, mm), crt(0, M, g.b, mm), crt(0, M, g.c, mm),
                             crt(1, M, g.d, mm)));
    cur = FinSubgroup(Mt, gens);
  }
  // 3. project down to m
  if (cur.modulus() != m) cur = cur.project(m);
  return cur;
}

OpenSubgroup OpenSubgroup::certify_level() const {
  if (minimal_) return *this;
  int64_t N = img_.modulus();
  Int full_order = img_.order();
  for (int64_t d : divisors(N)) {
    if (d == N) break;
    FinSubgroup down = d == 1 ? FinSubgroup(1, {}) : img_.project(d);
    Int kernel = ambient_order(amb_, N) / (d == 1 ? Int(1) : ambient_order(amb_, d));
    if (down.order() * kernel == full_order) {
      if (d == 1) {
        auto gens = amb_ == Ambient::GL2 ? gl2_generators(2) : sl2_generators(2);
        OpenSubgroup out(amb_, FinSubgroup(2, gens));
        out.minimal_ = true;  // level 1 presented mod 2
        return out;
      }
      OpenSubgroup out(amb_, down);
      out.minimal_ = true;
      return out;
    }
  }
  OpenSubgroup out(amb_, img_);
  out.minimal_ = true;
  return out;
}

int64_t OpenSubgroup::level() const {
  OpenSubgroup c = certify_level();
  int64_t N = c.modulus();
  // presented-at-2 convention for level 1
  if (N == 2 && c.image().order() == ambient_order(amb_, 2)) return 1;
  return N;
}

Int OpenSubgroup::index_in_ambient() const {
  return ambient_order(amb_, img_.modulus()) / img_.order();
}

bool OpenSubgroup::contains(const OpenSubgroup& H) const {
  int64_t L = lcm64(img_.modulus(), H.img_.modulus());
  FinSubgroup mine = image_mod(L);
  FinSubgroup theirs = H.image_mod(L);
  for (const auto& g : theirs.generators())
    if (!mine.contains(g)) return false;
  return true;
}

bool OpenSubgroup::same_group(const OpenSubgroup& H) const {
  int64_t L = lcm64(img_.modulus(), H.img_.modulus());
  FinSubgroup a = image_mod(L), b = H.image_mod(L);
  return a.same_group(b);
}

Int OpenSubgroup::index_of(const OpenSubgroup& H) const {
  if (!contains(H)) throw std::domain_error("index_of: not a subgroup");
  int64_t L = lcm64(img_.modulus(), H.img_.modulus());
  return image_mod(L).order() / H.image_mod(L).order();
}

bool OpenSubgroup::det_full() const { return amb_ == Ambient::SL2 || img_.det_full(); }

OpenSubgroup OpenSubgroup::sl2_part() const {
  if (amb_ == Ambient::SL2) return *this;
  return OpenSubgroup(Ambient::SL2, img_.sl2_intersection());
}

OpenSubgroup OpenSubgroup::transpose() const {
  std::vector<ZModMat> gens;
  for (const auto& g : img_.generators()) gens.push_back(g.transpose());
  return OpenSubgroup(amb_, FinSubgroup(img_.modulus(), gens), minimal_);
}

Int subgroup_index(const OpenSubgroup& H, const OpenSubgroup& G) { return G.index_of(H); }

// ---------------------------------------------------------------- generators

std::vector<ZModMat> sl2_generators(int64_t n) {
  if (n == 1) return {};
  return {ZModMat(n, 1, 1, 0, 1), ZModMat(n, 1, 0, 1, 1)};
}

std::vector<ZModMat> gl2_generators(int64_t n) {
  if (n == 1) return {};
  auto out = sl2_generators(n);
  for (int64_t u : unit_group_generators(n)) out.push_back(ZModMat(n, u, 0, 0, 1));
  return out;
}

std::vector<ZModMat> borel_generators(int64_t n) {
  std::vector<ZModMat> out{ZModMat(n, 1, 1, 0, 1)};
  for (int64_t u : unit_group_generators(n)) {
    out.push_back(ZModMat(n, u, 0, 0, 1));
    out.push_back(ZModMat(n, 1, 0, 0, u));
  }
  return out;
}

// ------------------------------------------------------------ commutator etc

OpenSubgroup commutator_open(const OpenSubgroup& G) {
  OpenSubgroup Gc = G.certify_level();
  int64_t NG = Gc.modulus();
  std::set<int64_t> P{2, 3};
  for (int64_t p : prime_divisors(NG)) P.insert(p);
  std::map<int64_t, int64_t> e;
  for (int64_t p : P) e[p] = std::max<int64_t>(p == 2 ? 2 : 1, [&] {
    int64_t v = 0, n = NG;
    while (n % p == 0) n /= p, ++v;
    return v;
  }());

  while (true) {
    bool ok = true;
    for (int64_t ell : P) {
      // N_ell = ell^{e_ell} * prod of other p in P with p^2 = 1 mod ell
      int64_t Nl = 1;
      for (int64_t i = 0; i < e[ell]; ++i) Nl *= ell;
      for (int64_t p : P)
        if (p != ell && mod_reduce(p * p, ell) == 1 % ell) Nl *= p;
      int64_t m = Nl * ell;
      FinSubgroup D = G.image_mod(m).derived_subgroup();
      for (const auto& k : kernel_generators(Ambient::SL2, Nl, ell)) {
        if (!D.contains(ZModMat(m, k.a, k.b, k.c, k.d))) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        e[ell] += 1;
        break;
      }
    }
    if (ok) break;
  }
  int64_t Nc = 1;
  for (int64_t p : P) {
    for (int64_t i = 0; i < e[p]; ++i) Nc *= p;
  }
  FinSubgroup D = G.image_mod(Nc).derived_subgroup();
  return OpenSubgroup(Ambient::SL2, D).certify_level();
}

OpenSubgroup adjoin_scalars(const OpenSubgroup& H) {
  if (H.ambient() != Ambient::GL2) throw std::domain_error("adjoin_scalars: GL2 ambient required");
  OpenSubgroup S = H.sl2_part().certify_level();
  int64_t N0 = S.level();
  if (N0 % 4 == 2) throw std::domain_error("adjoin_scalars: level of SL2 part is 2 mod 4");
  int64_t N1 = (N0 % 2 == 1) ? N0 : 2 * N0;
  int64_t L = lcm64(std::max<int64_t>(N1, 2), H.certify_level().level() == 1 ? 2 : H.certify_level().level());
  FinSubgroup img = H.image_mod(L);
  std::vector<ZModMat> extra;
  for (int64_t u : unit_group_generators(L)) extra.push_back(ZModMat::scalar(L, u));
  return OpenSubgroup(Ambient::GL2, img.joined_with(extra)).certify_level();
}

bool is_full_sl2(int64_t ell, const FinSubgroup& image) {
  int64_t need = ell == 2 ? 8 : ell == 3 ? 9 : ell;
  int64_t m = image.modulus();
  if (m % need != 0) throw std::domain_error("is_full_sl2: modulus below certification threshold");
  FinSubgroup at = m == need ? image : image.project(need);
  return at.order() == sl2_order(need);
}

bool is_full_gl2(int64_t ell, const FinSubgroup& image) {
  if (ell < 5) throw std::domain_error("is_full_gl2: criterion requires ell >= 5");
  if (image.modulus() % ell != 0) throw std::domain_error("is_full_gl2: need image mod ell");
  FinSubgroup at = image.modulus() == ell ? image : image.project(ell);
  return at.order() == gl2_order(ell);
}

// ---------------------------------------------------------------------- phi3

namespace {
struct Phi3Table {
  // maps each of the 48 elements of GL2(F3) to a permutation of {0,1,2}
  std::map<unsigned __int128, std::array<int, 3>> table;
  Phi3Table() {
    FinSubgroup sl2(3, sl2_generators(3));
    FinSubgroup q8 = sl2.derived_subgroup();  // order 8
    ZModMat r(3, 1, 1, 0, 1);  // order 3 mod Q8, inside SL2
    ZModMat t(3, 0, 1, 1, 0);  // det -1, order 2 mod Q8
    if (q8.order() != 8) throw std::logic_error("phi3: [SL2(F3),SL2(F3)] should have order 8");
    std::array<int, 3> rot{1, 2, 0}, flip{1, 0, 2}, id{0, 1, 2};
    auto compose = [](std::array<int, 3> a, std::array<int, 3> b) {
      return std::array<int, 3>{a[b[0]], a[b[1]], a[b[2]]};
    };
    FinSubgroup gl2(3, gl2_generators(3));
    for (const auto& A : gl2.elements()) {
      bool found = false;
      for (int i = 0; i < 3 && !found; ++i) {
        for (int j = 0; j < 2 && !found; ++j) {
          ZModMat rep = r.pow(i) * t.pow(j);
          if (q8.contains(rep.inverse() * A)) {
            std::array<int, 3> p = id;
            for (int k = 0; k < i; ++k) p = compose(rot, p);
            if (j) p = compose(p, flip);
            table[A.key128()] = p;
            found = true;
          }
        }
      }
      if (!found) throw std::logic_error("phi3: coset decomposition failed");
    }
  }
};
}  // namespace

std::array<int, 3> phi3(const ZModMat& A) {
  static Phi3Table tab;
  ZModMat B = A.n == 3 ? A : A.reduce(3);
  if (!B.invertible()) throw std::domain_error("phi3: matrix not invertible mod 3");
  return tab.table.at(B.key128());
}

// ------------------------------------------------------------------- goursat

FinSubgroup kernel_of_projection(const FinSubgroup& H, int64_t keep, int64_t drop,
                                 int64_t coset_cap) {
  // H at modulus keep*drop (coprime); returns {h mod keep : h in H, h = I mod drop}.
  // Schreier's lemma on the coset action of the projection H -> H mod drop.
  int64_t N = H.modulus();
  if (keep * drop != N || std::gcd(keep, drop) != 1)
    throw std::domain_error("kernel_of_projection: bad factorization");
  std::map<unsigned __int128, ZModMat> rep;  // image mod drop -> transversal element of H
  ZModMat id = ZModMat::identity(N);
  rep[id.reduce(drop).key128()] = id;
  std::vector<ZModMat> queue{id};
  for (size_t i = 0; i < queue.size(); ++i) {
    for (const auto& g : H.generators()) {
      ZModMat x = queue[i] * g;
      auto key = x.reduce(drop).key128();
      if (!rep.count(key)) {
        if ((int64_t)rep.size() >= coset_cap)
          throw std::domain_error("kernel_of_projection: projected image exceeds cap");
        rep[key] = x;
        queue.push_back(x);
      }
    }
  }
  std::vector<ZModMat> schreier;
  for (const auto& [key, r] : rep)
    for (const auto& g : H.generators()) {
      ZModMat x = r * g;
      ZModMat s = x * rep.at(x.reduce(drop).key128()).inverse();
      ZModMat sk = s.reduce(keep);
      if (!(sk == ZModMat::identity(keep))) schreier.push_back(sk);
    }
  return FinSubgroup(keep, reduce_generators(keep, schreier));
}

GoursatData goursat(const FinSubgroup& H, int64_t n1, int64_t n2) {
  if (std::gcd(n1, n2) != 1 || n1 * n2 != H.modulus())
    throw std::domain_error("goursat: need coprime n1*n2 = modulus");
  FinSubgroup G1 = H.project(n1), G2 = H.project(n2);
  GoursatData out;
  out.n1 = kernel_of_projection(H, n1, n2);
  out.n2 = kernel_of_projection(H, n2, n1);
  if (G1.order() * out.n2.order() != H.order() || G2.order() * out.n1.order() != H.order())
    throw std::domain_error("goursat: projections not surjective or inconsistent");
  for (const auto& g : H.generators()) out.iso.push_back({g.reduce(n1), g.reduce(n2)});
  return out;
}

}  // namespace openimage
