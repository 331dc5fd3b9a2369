#include "openimage/image.hpp"

#include <algorithm>
#include <set>

namespace openimage {

FilterReport trace_det_filter(const FinSubgroup& G, const std::vector<FrobeniusSample>& samples,
                              int64_t element_cap) {
  int64_t N = G.modulus();
  std::set<std::pair<int64_t, int64_t>> pairs;
  const auto& els = G.elements(element_cap);
  for (const auto& g : els) pairs.insert({g.trace(), g.det()});
  for (const auto& s : samples) {
    if (std::gcd(s.p, N) != 1)
      throw std::domain_error("trace_det_filter: sample prime divides the modulus");
    std::pair<int64_t, int64_t> key{mod_reduce(s.ap, N), mod_reduce(s.p, N)};
    if (!pairs.count(key)) return {true, s.p};
  }
  return {false, 0};
}

CharacterMap reconstruct_gamma(const AbelianQuotient& Q, int64_t M, int64_t e,
                               const std::vector<std::pair<int64_t, std::vector<int64_t>>>& samples) {
  if (e % Q.exponent() != 0)
    throw std::domain_error("reconstruct_gamma: e must kill the quotient");
  return solve_character(M, e, Q.basis_orders(), samples);
}

AssembledImage assemble_image(const FamilyContext& fam, const CharacterMap& gamma) {
  OpenSubgroup H = family_member(fam, gamma);
  // determinant is checked by family_member; verify the SL2 intersection
  OpenSubgroup hs = H.sl2_part().certify_level();
  OpenSubgroup gs = fam.G.sl2_part().certify_level();
  if (!hs.same_group(gs))
    throw std::logic_error("assemble_image: SL2 part differs from the base subgroup");
  return {H, H.transpose().certify_level()};
}

SerreData serre_curve_data(const EllCurveQ& e) {
  if (e.j == 0 || e.j == 1728)
    throw std::domain_error("serre_curve_data: j must avoid 0 and 1728");
  SerreData out;
  out.d = squarefree_part(e.disc);
  // consistency: disc * (j - 1728) is a square, so the squarefree parts agree
  if (squarefree_part(e.j - 1728) != out.d)
    throw std::logic_error("serre_curve_data: discriminant / j-1728 mismatch");
  OpenSubgroup calG = OpenSubgroup::full(Ambient::GL2);
  OpenSubgroup G(Ambient::GL2, FinSubgroup(2, {ZModMat(2, 0, 1, 1, 1)}));
  FamilyContext fam(calG, G);
  out.candidate = family_member(fam, quadratic_character(out.d));
  return out;
}

std::vector<Rat> rational_roots(const std::vector<Rat>& poly) {
  // strip trailing zeros and powers of t
  std::vector<Rat> p = poly;
  while (!p.empty() && p.back() == 0) p.pop_back();
  std::vector<Rat> roots;
  if (p.empty()) throw std::domain_error("rational_roots: zero polynomial");
  size_t shift = 0;
  while (shift < p.size() && p[shift] == 0) ++shift;
  if (shift > 0) {
    roots.push_back(Rat(0));
    p.erase(p.begin(), p.begin() + shift);
  }
  if (p.size() <= 1) return roots;
  // integer scale
  Int den = 1;
  for (auto& c : p) den = lcm(den, c.get_den());
  std::vector<Int> ip;
  Int g = 0;
  for (auto& c : p) {
    ip.push_back(c.get_num() * (den / c.get_den()));
    g = gcd(g, ip.back());
  }
  if (g > 1)
    for (auto& c : ip) c /= g;
  Int a0 = abs(ip.front()), an = abs(ip.back());
  if (!a0.fits_slong_p() || !an.fits_slong_p())
    throw std::domain_error("rational_roots: coefficients too large to factor");
  auto d0 = divisors(a0.get_si()), dn = divisors(an.get_si());
  if ((int64_t)d0.size() * (int64_t)dn.size() > 2000000)
    throw std::domain_error("rational_roots: too many candidate roots");
  auto eval = [&](const Rat& x) {
    Rat acc(0);
    for (size_t i = ip.size(); i-- > 0;) acc = acc * x + Rat(ip[i]);
    return acc;
  };
  for (int64_t num : d0)
    for (int64_t q : dn) {
      if (std::gcd(num, q) != 1) continue;
      for (int64_t sign : {1, -1}) {
        Rat cand = frac(sign * num, q);
        if (eval(cand) == 0) roots.push_back(cand);
      }
    }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

const CatalogEntry* catalog_locate(const Rat& j, const std::vector<CatalogEntry>& catalog) {
  const CatalogEntry* best = nullptr;
  Int best_index = -1;
  for (const auto& entry : catalog) {
    // solve pi(t) = j over Q: roots of num(t) - j den(t)
    std::vector<Rat> poly(std::max(entry.pi.num.size(), entry.pi.den.size()), Rat(0));
    for (size_t i = 0; i < entry.pi.num.size(); ++i) poly[i] += entry.pi.num[i];
    for (size_t i = 0; i < entry.pi.den.size(); ++i) poly[i] -= j * entry.pi.den[i];
    bool hit = false;
    try {
      auto roots = rational_roots(poly);
      for (auto& r : roots) {
        // exclude spurious roots killing the denominator
        Rat dv(0);
        for (size_t i = entry.pi.den.size(); i-- > 0;) dv = dv * r + entry.pi.den[i];
        if (dv != 0) hit = true;
      }
    } catch (const std::domain_error&) {
      hit = false;
    }
    if (!hit) continue;
    Int idx = entry.group.index_in_ambient();
    if (idx > best_index) {
      best_index = idx;
      best = &entry;
    }
  }
  return best;
}

}  // namespace openimage
