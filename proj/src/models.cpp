#include "openimage/models.hpp"

#include "openimage/abelian.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace openimage {

std::vector<std::vector<int>> monomial_exponents(int nvars, int deg) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(nvars, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == nvars - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int v = left; v >= 0; --v) {
      cur[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  if (nvars > 0) rec(0, deg);
  return out;
}

std::vector<QSeries> HPoly::evaluate(const std::vector<std::vector<QSeries>>& coords) const {
  // coords[i] = per-cusp expansions of variable i
  size_t ncusps = coords.empty() ? 0 : coords[0].size();
  std::vector<QSeries> out;
  for (size_t ci = 0; ci < ncusps; ++ci) {
    QSeries acc;
    bool first = true;
    for (auto& [exps, c] : terms) {
      QSeries term;
      bool tfirst = true;
      for (int v = 0; v < nvars; ++v)
        for (int e = 0; e < exps[v]; ++e) {
          if (tfirst) {
            term = coords[v][ci];
            tfirst = false;
          } else {
            term = term * coords[v][ci];
          }
        }
      if (tfirst) continue;  // constant monomial cannot occur (homogeneous, deg>0)
      term = term * c;
      if (first) {
        acc = term;
        first = false;
      } else {
        acc = acc + term;
      }
    }
    out.push_back(acc);
  }
  return out;
}

std::string HPoly::str() const {
  std::ostringstream os;
  bool first = true;
  for (auto& [exps, c] : terms) {
    if (c == 0) continue;
    if (!first) os << " + ";
    os << rat_str(c);
    for (size_t v = 0; v < exps.size(); ++v)
      if (exps[v]) {
        os << "*x" << v;
        if (exps[v] > 1) os << "^" << exps[v];
      }
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

// Fast evaluation of all degree-n monomials in the coordinates: integral
// 128-bit series products per cusp with per-variable common denominators.
// Falls back to exact rational series arithmetic if the integer budget is
// exceeded.
static std::vector<std::vector<QSeries>> eval_monomials_fast(
    const std::vector<std::vector<QSeries>>& coords, const std::vector<std::vector<int>>& exps,
    int64_t prec_cap) {
  size_t nv = coords.size(), nc = coords[0].size();
  std::vector<std::vector<ZetaSeries>> z(nv);
  std::vector<Int> den(nv, 1);
  bool fast = true;
  for (size_t v = 0; v < nv && fast; ++v) {
    std::vector<Int> dens;
    std::vector<ZetaSeries> raw;
    for (size_t c = 0; c < nc && fast; ++c) {
      try {
        auto [zs, d] = zeta_scaled(coords[v][c].truncate(std::min(prec_cap, coords[v][c].precision())));
        raw.push_back(std::move(zs));
        dens.push_back(d);
        den[v] = lcm(den[v], d);
      } catch (const std::domain_error&) {
        fast = false;
      }
    }
    if (!fast) break;
    for (size_t c = 0; c < nc && fast; ++c) {
      Int mult = den[v] / dens[c];
      if (mult == 1) {
        z[v].push_back(std::move(raw[c]));
        continue;
      }
      if (mpz_sizeinbase(mult.get_mpz_t(), 2) > 40) {
        fast = false;
        break;
      }
      ZetaSeries fresh(coords[v][c].modulus(), raw[c].precision());
      fresh.add_scaled(raw[c], (i128)mult.get_si());
      z[v].push_back(std::move(fresh));
    }
  }
  std::vector<std::vector<QSeries>> out;
  if (fast) {
    for (auto& e : exps) {
      Int d = 1;
      for (size_t v = 0; v < nv; ++v)
        for (int t = 0; t < e[v]; ++t) d *= den[v];
      std::vector<QSeries> vals;
      bool overflow = false;
      for (size_t c = 0; c < nc && !overflow; ++c) {
        ZetaSeries prod;
        bool first = true;
        for (size_t v = 0; v < nv && !overflow; ++v)
          for (int t = 0; t < e[v] && !overflow; ++t) {
            if (first) {
              prod = z[v][c];
              first = false;
            } else {
              long double ba = (long double)prod.max_abs(), bb = (long double)z[v][c].max_abs();
              if (ba * bb * (long double)(prod.precision() + 1) * 64.0L > 1.0e36L)
                overflow = true;
              else
                prod = prod.mul(z[v][c], prec_cap);
            }
          }
        if (!overflow) vals.push_back(prod.to_qseries(d));
      }
      if (overflow) {
        fast = false;
        break;
      }
      out.push_back(vals);
    }
  }
  if (!fast) {
    out.clear();
    for (auto& e : exps) {
      HPoly mono;
      mono.nvars = (int)nv;
      mono.terms = {{e, Rat(1)}};
      out.push_back(mono.evaluate(coords));
    }
  }
  return out;
}

std::pair<int64_t, std::vector<int64_t>> choose_model_params(const CuspStructure& cs) {
  const GammaData& d = cs.gamma();
  int64_t g = d.genus;
  for (int64_t k = 2;; k += 2) {
    Rat degL = frac(k, 2) * Rat(2 * g - 2) + frac(k, 2) * Rat(d.cusp_count) +
               Rat(k / 4) * Rat(d.v2) + Rat(k / 3) * Rat(d.v3);
    degL.canonicalize();
    if (degL < 2 * g + 1) continue;
    int64_t base = degL.get_num().get_si();
    // subtract a Galois-stable effective divisor to reach 2g+1 if possible
    int64_t target_drop = base - (2 * g + 1);
    // orbit sizes
    std::map<int64_t, int64_t> orbit_size;
    for (auto& c : cs.cusps()) orbit_size[c.galois_orbit] += 1;
    std::vector<int64_t> sizes;
    for (auto& [o, s] : orbit_size) sizes.push_back(s);
    // best achievable drop <= target_drop: DP over orbit sizes with repeats
    std::vector<char> reach(target_drop + 1, 0);
    reach[0] = 1;
    for (int64_t t = 0; t <= target_drop; ++t) {
      if (!reach[t]) continue;
      for (int64_t s : sizes)
        if (t + s <= target_drop) reach[t + s] = 1;
    }
    int64_t drop = target_drop;
    while (drop > 0 && !reach[drop]) --drop;
    // realize the drop greedily
    std::vector<int64_t> e(cs.cusps().size(), 0);
    int64_t left = drop;
    std::map<int64_t, int64_t> per_orbit;
    // repeatedly subtract usable orbit sizes (largest first for determinism)
    std::sort(sizes.rbegin(), sizes.rend());
    std::function<bool(int64_t)> reachable = [&](int64_t t) { return t >= 0 && reach[t]; };
    while (left > 0) {
      bool moved = false;
      for (int64_t s : sizes) {
        if (left - s >= 0 && reachable(left - s)) {
          // add 1 to some orbit with this size
          for (auto& [o, sz] : orbit_size)
            if (sz == s) {
              per_orbit[o] += 1;
              break;
            }
          left -= s;
          moved = true;
          break;
        }
      }
      if (!moved) throw std::logic_error("choose_model_params: divisor selection failed");
    }
    for (size_t i = 0; i < cs.cusps().size(); ++i) e[i] = per_orbit[cs.cusps()[i].galois_orbit];
    return {k, e};
  }
}

std::vector<ModForm> vanishing_subspace(const std::vector<ModForm>& basis,
                                        const std::vector<int64_t>& e) {
  if (basis.empty()) return {};
  const ModularFormSpace& sp = *basis[0].space;
  int64_t N = sp.modulus();
  // conditions: coefficient of q_{w_i}^n vanishes for n < e_i
  QMat cond;
  for (size_t bi = 0; bi < basis.size(); ++bi) {
    QVec row;
    for (size_t ci = 0; ci < e.size(); ++ci) {
      int64_t step = N / sp.cusps().cusps()[ci].width;
      for (int64_t n = 0; n < e[ci]; ++n) {
        CycNum c = basis[bi].at_cusp(ci).coeff(n * step);
        for (auto& x : c.coeffs()) row.push_back(x);
      }
    }
    cond.push_back(row);
  }
  // kernel of the transpose: combinations of basis forms with those zeros
  QMat m(cond.empty() || cond[0].empty() ? 0 : cond[0].size(), QVec(basis.size(), Rat(0)));
  for (size_t i = 0; i < cond.size(); ++i)
    for (size_t j = 0; j < cond[i].size(); ++j) m[j][i] = cond[i][j];
  QMat ker = m.empty() ? QMat() : nullspace(m);
  if (m.empty()) {
    // no conditions at all
    return basis;
  }
  std::vector<ModForm> out;
  for (auto& combo : ker) {
    ModForm f;
    bool first = true;
    for (size_t i = 0; i < basis.size(); ++i) {
      if (combo[i] == 0) continue;
      ModForm t = basis[i] * combo[i];
      if (first) {
        f = t;
        first = false;
      } else {
        f = f + t;
      }
    }
    if (!first) out.push_back(f);
  }
  return out;
}

std::vector<HPoly> relations(const std::vector<ModForm>& coords, int64_t n) {
  if (coords.empty()) return {};
  const ModularFormSpace& sp = *coords[0].space;
  int64_t k = sp.weight();
  // pinning data for weight n*k
  SturmData st = sturm_bound(sp.cusps(), n * k, true);
  int64_t N = sp.modulus();
  // ensure the coordinate expansions support products to the required length
  for (auto& f : coords)
    for (auto& e : f.expansions)
      if (e.precision() < st.b + 1)
        throw std::domain_error("relations: insufficient expansion precision");
  auto exps = monomial_exponents((int)coords.size(), (int)n);
  // phi_{nk} vectors of the monomials
  QMat rows;
  std::vector<std::vector<QSeries>> coord_series;
  for (auto& f : coords) coord_series.push_back(f.expansions);
  auto monovals = eval_monomials_fast(coord_series, exps, st.b + 2);
  for (size_t mi_idx = 0; mi_idx < exps.size(); ++mi_idx) {
    auto& vals = monovals[mi_idx];
    QVec row;
    for (size_t ci = 0; ci < vals.size(); ++ci) {
      int64_t step = N / sp.cusps().cusps()[ci].width;
      int64_t mi = (sp.cusps().cusps()[ci].width * st.b + N - 1) / N;
      for (int64_t t = 0; t < mi; ++t) {
        CycNum c = vals[ci].coeff(t * step);
        for (auto& x : c.coeffs()) row.push_back(x);
      }
    }
    rows.push_back(row);
  }
  // nullspace of the transposed coefficient matrix
  QMat m(rows[0].size(), QVec(rows.size(), Rat(0)));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m[j][i] = rows[i][j];
  QMat ker = nullspace(m);
  if (ker.empty()) return {};
  // integral, saturated, reduced presentation of the relation lattice
  ZMat sat = saturate_lattice(scale_to_integer(ker));
  sat = lll_reduce(sat);
  std::vector<HPoly> out;
  for (auto& rel : sat) {
    HPoly p;
    p.nvars = (int)coords.size();
    for (size_t i = 0; i < exps.size(); ++i)
      if (rel[i] != 0) p.terms.push_back({exps[i], Rat(rel[i])});
    // certified vanishing check
    auto vals = p.evaluate(coord_series);
    for (auto& v : vals)
      if (!v.truncate(std::min<int64_t>(v.precision(), st.b + 1)).known_zero())
        throw std::logic_error("relations: emitted generator does not vanish");
    out.push_back(p);
  }
  return out;
}

ProjectiveModel curve_model(const FinSubgroup& G) {
  auto cs_probe = CuspStructure(G);
  int64_t g = cs_probe.gamma().genus;
  ProjectiveModel model;
  model.genus = g;
  std::shared_ptr<ModularFormSpace> sp2;
  std::vector<ModForm> basis2;
  auto get_weight2 = [&]() {
    if (!sp2) {
      sp2 = std::make_shared<ModularFormSpace>(G, 2);
      SturmData st = sturm_bound(sp2->cusps(), 4 * 2, true);  // covers I2..I4 checks
      basis2 = sp2->basis(st.b + sp2->modulus() + 1);
    }
  };
  if (g >= 3) {
    // canonical attempt: k = 2, E = sum of all cusps
    get_weight2();
    auto sp = sp2;
    std::vector<int64_t> ones(sp->cusps().cusps().size(), 1);
    auto V = vanishing_subspace(basis2, ones);
    if ((int64_t)V.size() != g) throw std::logic_error("curve_model: canonical space has wrong dimension");
    auto I2 = relations(V, 2);
    int64_t hyper_count = (g - 1) * (g - 2) / 2;
    int64_t nonhyper_count = (g - 2) * (g - 3) / 2;
    if ((int64_t)I2.size() == hyper_count && hyper_count != nonhyper_count) {
      model.hyperelliptic = true;
    } else if ((int64_t)I2.size() != nonhyper_count) {
      throw std::logic_error("curve_model: unexpected quadric count in canonical model");
    }
    if (!model.hyperelliptic) {
      model.canonical = true;
      model.space = sp;
      model.k = 2;
      model.coords = V;
      model.ideal = I2;
      if (g == 3) {
        auto I4 = relations(V, 4);
        model.ideal.insert(model.ideal.end(), I4.begin(), I4.end());
      } else {
        auto I3 = relations(V, 3);
        model.ideal.insert(model.ideal.end(), I3.begin(), I3.end());
      }
    }
  }
  if (model.coords.empty()) {
    // large-degree embedding
    auto [k, e] = choose_model_params(cs_probe);
    std::shared_ptr<ModularFormSpace> sp;
    std::vector<ModForm> basis;
    if (k == 2) {
      get_weight2();
      sp = sp2;
      basis = basis2;
    } else {
      sp = std::make_shared<ModularFormSpace>(G, k);
      SturmData st3 = sturm_bound(sp->cusps(), 3 * k, true);
      basis = sp->basis(st3.b + sp->modulus() + 1);
    }
    auto V = vanishing_subspace(basis, e);
    if (V.size() < 2) throw std::logic_error("curve_model: embedding space too small");
    model.space = sp;
    model.k = k;
    model.coords = V;
    if (V.size() >= 2) {
      auto I2 = relations(V, 2);
      model.ideal = I2;
      // degree F = 2g+1 requires cubics as well
      auto I3 = relations(V, 3);
      // drop cubics that are multiples of quadrics: keep all (callers may
      // inspect); a minimal set is fine for our use
      model.ideal.insert(model.ideal.end(), I3.begin(), I3.end());
    }
  }
  // cusp images
  const ModularFormSpace& sp = *model.space;
  int64_t N = sp.modulus();
  for (size_t ci = 0; ci < sp.cusps().cusps().size(); ++ci) {
    int64_t step = N / sp.cusps().cusps()[ci].width;
    // smallest order among coordinates
    int64_t best = INT64_MAX;
    for (auto& f : model.coords) best = std::min(best, f.at_cusp(ci).order());
    std::vector<CycNum> pt;
    for (auto& f : model.coords) {
      if (best >= f.at_cusp(ci).precision()) throw std::logic_error("curve_model: cusp image precision");
      pt.push_back(f.at_cusp(ci).order() == best ? f.at_cusp(ci).coeff(best) : CycNum(Rat(0), N));
    }
    (void)step;
    model.cusp_images.push_back(pt);
  }
  return model;
}

JMap jmap(const ProjectiveModel& model, int64_t degree_cap) {
  const ModularFormSpace& sp = *model.space;
  int64_t N = sp.modulus(), k = model.k;
  Int expected = gl2_order(N) / sp.group().joined_with({ZModMat::scalar(N, N - 1)}).order();
  for (int64_t n = 1; n <= degree_cap; ++n) {
    SturmData st = sturm_bound(sp.cusps(), n * k + 12, true);
    int64_t need = st.b + 2;
    // ensure coordinates have enough precision
    std::vector<std::vector<QSeries>> coords;
    bool enough = true;
    for (auto& f : model.coords) {
      for (auto& e : f.expansions)
        if (e.precision() < need) enough = false;
      coords.push_back(f.expansions);
    }
    std::vector<ModForm> recomputed;
    if (!enough) {
      // recompute coordinate expansions at higher precision from provenance
      coords.clear();
      for (auto& f : model.coords) {
        std::vector<QSeries> exps;
        bool first = true;
        for (auto& [c, mono] : f.provenance) {
          auto e = sp.monomial_expansions(mono, need + N);
          if (first) {
            for (auto& s : e) exps.push_back(s * c);
            first = false;
          } else {
            for (size_t i = 0; i < e.size(); ++i) exps[i] = exps[i] + e[i] * c;
          }
        }
        coords.push_back(exps);
      }
    }
    // level-one series at the needed q_N precision
    int64_t prec1 = need / N + 3;
    QSeries delta = classical_Delta(prec1).rescale(N);
    QSeries e4 = classical_E4(prec1).rescale(N);
    QSeries e43 = e4 * e4 * e4;
    auto exps = monomial_exponents((int)model.coords.size(), (int)n);
    // unknowns: F1 coefficients then F2 coefficients
    QMat rows;  // one row per monomial-and-side, transposed later
    std::vector<std::vector<QSeries>> mono_delta, mono_e43;
    for (auto& e : exps) {
      HPoly mono;
      mono.nvars = (int)model.coords.size();
      mono.terms = {{e, Rat(1)}};
      auto vals = mono.evaluate(coords);
      std::vector<QSeries> vd, ve;
      for (auto& v : vals) {
        vd.push_back(v * delta);
        ve.push_back(v * e43);
      }
      mono_delta.push_back(vd);
      mono_e43.push_back(ve);
    }
    // build linear system: sum a_m (m*Delta) - sum b_m (m*E4^3) = 0
    auto flatten = [&](const std::vector<QSeries>& vals) {
      QVec row;
      for (size_t ci = 0; ci < vals.size(); ++ci) {
        int64_t w = sp.cusps().cusps()[ci].width;
        int64_t step = N / w;
        int64_t mi = (w * st.b + N - 1) / N + 1;
        for (int64_t t = 0; t < mi; ++t) {
          CycNum c = vals[ci].coeff(t * step);
          for (auto& x : c.coeffs()) row.push_back(x);
        }
      }
      return row;
    };
    QMat sys;
    for (auto& vd : mono_delta) sys.push_back(flatten(vd));
    for (auto& ve : mono_e43) {
      QVec r = flatten(ve);
      for (auto& x : r) x = -x;
      sys.push_back(r);
    }
    QMat m(sys[0].size(), QVec(sys.size(), Rat(0)));
    for (size_t i = 0; i < sys.size(); ++i)
      for (size_t j = 0; j < sys[i].size(); ++j) m[j][i] = sys[i][j];
    QMat ker = nullspace(m);
    for (auto& sol : ker) {
      HPoly F1, F2;
      F1.nvars = F2.nvars = (int)model.coords.size();
      for (size_t i = 0; i < exps.size(); ++i) {
        if (sol[i] != 0) F1.terms.push_back({exps[i], sol[i]});
        if (sol[exps.size() + i] != 0) F2.terms.push_back({exps[i], sol[exps.size() + i]});
      }
      if (F2.terms.empty() || F1.terms.empty()) continue;
      JMap out;
      out.F1 = F1;
      out.F2 = F2;
      if (!expected.fits_slong_p())
        throw std::logic_error("jmap: expected degree overflow");
      out.map_degree = expected.get_si();
      return out;
    }
  }
  throw std::domain_error("jmap: no relation up to the degree cap");
}

std::vector<QSeries> hauptmodul_series(const ProjectiveModel& model) {
  if (model.coords.size() != 2) throw std::domain_error("hauptmodul_series: need a P1 model");
  std::vector<QSeries> out;
  for (size_t ci = 0; ci < model.coords[0].expansions.size(); ++ci)
    out.push_back(model.coords[0].at_cusp(ci) / model.coords[1].at_cusp(ci));
  return out;
}

RatFunc express_in_hauptmodul(const CuspStructure& cs, const std::vector<QSeries>& t,
                              const std::vector<QSeries>& h, int64_t h_pole_bound,
                              int64_t deg_cap) {
  int64_t N = cs.modulus();
  for (int64_t d = 0; d <= deg_cap; ++d) {
    // unknowns: F1 (deg d), F2 (deg d): solve F1(t) - h F2(t) = 0
    // per cusp, collect coefficient equations certifying more zeros than the
    // common pole bound d * (poles of t = 1) + h_pole_bound
    int64_t need_zeros = d + h_pole_bound + 1;
    QMat sys;  // one row per unknown, columns are equations (transposed later)
    std::vector<std::vector<QSeries>> tpow(cs.cusps().size());
    for (size_t ci = 0; ci < cs.cusps().size(); ++ci) {
      QSeries one = QSeries::one(N, t[ci].precision() - std::max<int64_t>(0, -t[ci].low_deg()) * d);
      tpow[ci].push_back(one);
      for (int64_t i = 1; i <= d; ++i) tpow[ci].push_back(tpow[ci][i - 1] * t[ci]);
    }
    // exponent windows per cusp
    std::vector<int64_t> lo(cs.cusps().size()), hi(cs.cusps().size());
    int64_t total = 0;
    for (size_t ci = 0; ci < cs.cusps().size(); ++ci) {
      int64_t w = cs.cusps()[ci].width, step = N / w;
      int64_t lowest = std::min(tpow[ci][d].low_deg(), h[ci].low_deg() + tpow[ci][d].low_deg());
      lowest = std::min<int64_t>(lowest, 0);
      int64_t count = (need_zeros * w + cs.gamma().index.get_si() - 1) / cs.gamma().index.get_si() + 2;
      lo[ci] = lowest - (lowest % step != 0 ? lowest % step : 0);
      hi[ci] = lo[ci] + count * step;
      total += count;
      (void)total;
    }
    auto flatten_at = [&](const QSeries& s, size_t ci) {
      QVec row;
      int64_t step = N / cs.cusps()[ci].width;
      for (int64_t eexp = lo[ci]; eexp < hi[ci]; eexp += step) {
        CycNum c = (eexp < s.low_deg()) ? CycNum(Rat(0), N)
                 : (eexp < s.precision() ? s.coeff(eexp) : throw std::domain_error(
                        "express_in_hauptmodul: insufficient precision"));
        for (auto& x : c.coeffs()) row.push_back(x);
      }
      return row;
    };
    for (int64_t i = 0; i <= d; ++i) {
      QVec row;
      for (size_t ci = 0; ci < cs.cusps().size(); ++ci) {
        auto part = flatten_at(tpow[ci][i], ci);
        row.insert(row.end(), part.begin(), part.end());
      }
      sys.push_back(row);
    }
    for (int64_t i = 0; i <= d; ++i) {
      QVec row;
      for (size_t ci = 0; ci < cs.cusps().size(); ++ci) {
        QSeries prod = h[ci] * tpow[ci][i];
        auto part = flatten_at(prod, ci);
        row.insert(row.end(), part.begin(), part.end());
      }
      for (auto& x : row) x = -x;
      sys.push_back(row);
    }
    QMat m(sys[0].size(), QVec(sys.size(), Rat(0)));
    for (size_t i = 0; i < sys.size(); ++i)
      for (size_t j = 0; j < sys[i].size(); ++j) m[j][i] = sys[i][j];
    QMat ker = nullspace(m);
    for (auto& sol : ker) {
      RatFunc rf;
      rf.num.assign(sol.begin(), sol.begin() + d + 1);
      rf.den.assign(sol.begin() + d + 1, sol.end());
      bool dz = true, nz = true;
      for (auto& x : rf.den) dz = dz && x == 0;
      for (auto& x : rf.num) nz = nz && x == 0;
      if (dz || nz) continue;
      return rf;
    }
  }
  throw std::domain_error("express_in_hauptmodul: no relation up to the degree cap");
}

std::string RatFunc::str() const {
  std::ostringstream os;
  auto poly = [&](const std::vector<Rat>& c) {
    std::ostringstream ps;
    bool first = true;
    for (size_t i = c.size(); i-- > 0;) {
      if (c[i] == 0) continue;
      if (!first) ps << " + ";
      ps << rat_str(c[i]) << "*t^" << i;
      first = false;
    }
    if (first) ps << "0";
    return ps.str();
  };
  os << "(" << poly(num) << ") / (" << poly(den) << ")";
  return os.str();
}

RelMinPoly relative_minpoly(const ModForm& num, const ModForm& den,
                            const ProjectiveModel& base_model,
                            const std::vector<std::array<int64_t, 4>>& coset_lifts) {
  const ModularFormSpace& sp0 = *base_model.space;
  const CuspStructure& cs0 = sp0.cusps();
  int64_t N0 = sp0.modulus();
  size_t s = coset_lifts.size();
  // For each cusp of the base curve and coset A: expansions of h|A at that cusp
  // via h|(A * lift_j).  Then elementary symmetric functions as series.
  std::vector<std::vector<QSeries>> hs(s);  // [coset][cusp of base]
  auto matmul = [](const std::array<int64_t, 4>& x, const std::array<int64_t, 4>& y) {
    return std::array<int64_t, 4>{x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                                  x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
  };
  int64_t modlcm = 1;
  for (size_t ai = 0; ai < s; ++ai) {
    for (size_t cj = 0; cj < cs0.cusps().size(); ++cj) {
      auto lift = cs0.cusps()[cj].lift;
      auto B = matmul(coset_lifts[ai], lift);
      SlashResult rn = slash_expand(num, B);
      SlashResult rd = slash_expand(den, B);
      if (rn.scale_sqrt || rd.scale_sqrt) {
        if (rn.sqrt_num * rd.sqrt_den != rd.sqrt_num * rn.sqrt_den)
          throw std::logic_error("relative_minpoly: mismatched square roots");
      }
      int64_t M = lcm64(rn.series.modulus(), rd.series.modulus());
      QSeries q = rn.series.rescale(M) / rd.series.rescale(M);
      hs[ai].push_back(q);
      modlcm = lcm64(modlcm, M);
    }
  }
  // unify moduli
  for (auto& row : hs)
    for (auto& q : row) q = q.rescale(modlcm);
  // elementary symmetric functions e_1..e_s per cusp
  std::vector<std::vector<QSeries>> esym(s + 1);
  size_t ncusp = cs0.cusps().size();
  for (size_t e = 0; e <= s; ++e) esym[e].resize(ncusp);
  for (size_t cj = 0; cj < ncusp; ++cj) {
    // prod (x - h_a) expanded: iterate
    std::vector<QSeries> coeff(s + 1);  // coeff[i] of x^i
    coeff[0] = QSeries::one(modlcm, hs[0][cj].precision());
    size_t cur = 0;
    for (size_t ai = 0; ai < s; ++ai) {
      // multiply by (x - h_ai)
      std::vector<QSeries> next(s + 1);
      for (size_t i = 0; i <= cur + 1; ++i) {
        bool has = false;
        QSeries acc;
        if (i <= cur) {
          acc = coeff[i] * (-hs[ai][cj]);
          has = true;
        }
        if (i >= 1) {
          QSeries up = coeff[i - 1];
          if (has)
            acc = acc + up;
          else {
            acc = up;
            has = true;
          }
        }
        next[i] = acc;
      }
      coeff = next;
      ++cur;
    }
    for (size_t i = 0; i <= s; ++i) esym[i][cj] = coeff[i];
  }
  // recognize each coefficient in the hauptmodul of the base curve
  auto t0full = hauptmodul_series(base_model);
  std::vector<QSeries> t0;
  for (auto& q : t0full) t0.push_back(q.rescale(modlcm * (modlcm / q.modulus()) == 0 ? q.modulus() : modlcm));
  for (auto& q : t0) q = q.rescale(modlcm);
  RelMinPoly out;
  int64_t kk = num.space->weight();
  Int degF = gl2_order(N0) / sp0.group().joined_with({ZModMat::scalar(N0, N0 - 1)}).order();
  int64_t pole_bound = (2 * kk / 12 + 1) * degF.get_si() * (int64_t)s + 4;
  for (size_t i = 0; i < s; ++i)
    out.coeffs.push_back(express_in_hauptmodul(cs0, t0, esym[s - 1 - i].size() ? [&] {
      std::vector<QSeries> v = esym[s - 1 - i];
      return v;
    }() : std::vector<QSeries>{}, pole_bound, 2 * (int64_t)s + 6));
  return out;
}

QSeries torsion_h_qexp(int64_t N, int64_t r, int64_t s, int64_t prec) {
  r = mod_reduce(r, N);
  s = mod_reduce(s, N);
  if (r == 0) throw std::domain_error("torsion_h_qexp: r must be nonzero mod N");
  std::vector<CycNum> c(prec, CycNum(Rat(0), N));
  auto add = [&](int64_t e, const CycNum& v) {
    if (e >= 0 && e < prec) c[e] = c[e] + v;
  };
  for (int64_t n = 1; r * n < prec; ++n)
    add(r * n, CycNum::root_of_unity(N, mod_reduce(s * n, N)) * Rat(Int(n) * n));
  for (int64_t m = 1; m * N < prec + r; ++m)
    for (int64_t n = 1;; ++n) {
      int64_t e1 = r * n + N * m * n, e2 = -r * n + N * m * n;
      if (e2 >= prec && e1 >= prec) break;
      Rat n2 = Rat(Int(n) * n);
      add(e1, CycNum::root_of_unity(N, mod_reduce(s * n, N)) * n2);
      add(e2, -(CycNum::root_of_unity(N, mod_reduce(-s * n, N)) * n2));
    }
  return QSeries(N, 0, prec, std::move(c));
}

QSeries torsion_x_qexp(int64_t N, int64_t r, int64_t s, int64_t prec) {
  r = mod_reduce(r, N);
  s = mod_reduce(s, N);
  if (r == 0) throw std::domain_error("torsion_x_qexp: r must be nonzero mod N");
  // (2 pi i)^{-2} wp expansion
  std::vector<CycNum> c(prec, CycNum(Rat(0), N));
  c[0] = CycNum(Rat(1, 12), N);
  auto add = [&](int64_t e, const CycNum& v) {
    if (e >= 0 && e < prec) c[e] = c[e] + v;
  };
  for (int64_t m = 1; m * N < prec; ++m)
    for (int64_t n = 1; m * n * N < prec; ++n) add(N * m * n, CycNum(Rat(-2 * n), N));
  for (int64_t n = 1; r * n < prec; ++n)
    add(r * n, CycNum::root_of_unity(N, mod_reduce(s * n, N)) * Rat(n));
  for (int64_t m = 1; m * N < prec + r; ++m)
    for (int64_t n = 1;; ++n) {
      int64_t e1 = r * n + N * m * n, e2 = -r * n + N * m * n;
      if (e1 >= prec && e2 >= prec) break;
      add(e1, CycNum::root_of_unity(N, mod_reduce(s * n, N)) * Rat(n));
      add(e2, CycNum::root_of_unity(N, mod_reduce(-s * n, N)) * Rat(n));
    }
  QSeries wp(N, 0, prec, std::move(c));
  int64_t prec1 = prec / N + 3;
  QSeries e4 = classical_E4(prec1).rescale(N);
  QSeries e6 = classical_E6(prec1).rescale(N);
  QSeries delta = classical_Delta(prec1).rescale(N);
  return e4 * e6 * delta.inverse() * wp * Rat(36);
}

UniversalCurve universal_curve(const FinSubgroup& G) {
  int64_t N = G.modulus();
  if (G.contains(ZModMat::scalar(N, N - 1)))
    throw std::domain_error("universal_curve: -I must not lie in G");
  auto sp = std::make_shared<ModularFormSpace>(G, 3);
  if (sp->dimension() == 0) throw std::logic_error("universal_curve: M_{3,G} = 0");
  int64_t prec = sp->sturm().b + 4 * N;
  auto basis = sp->basis(prec);
  UniversalCurve out;
  out.weight3 = sp;
  out.f0 = basis[0];
  N = sp->modulus();
  int64_t prec1 = prec / N + 4;
  QSeries jq = classical_j(prec1).rescale(N);
  QSeries e6 = classical_E6(prec1).rescale(N);
  for (size_t ci = 0; ci < out.f0.expansions.size(); ++ci) {
    const QSeries& f0 = out.f0.at_cusp(ci);
    out.delta.push_back(jq * f0 * f0 * e6.inverse());
    out.jseries.push_back(jq);
  }
  return out;
}

InvariantSubspace invariant_subspace(const OpenSubgroup& calG, const OpenSubgroup& Gi, int64_t k) {
  int64_t m = lcm64(calG.modulus(), Gi.modulus());
  FinSubgroup calm = calG.image_mod(m), gim = Gi.image_mod(m);
  AbelianQuotient Q(calm, gim);
  if (Q.basis_orders().size() != 1)
    throw std::domain_error("invariant_subspace: quotient is not cyclic");
  int64_t p0e = Q.basis_orders()[0];
  // generator of the quotient inside the SL2 part
  FinSubgroup K = calm.sl2_intersection();
  ZModMat g0 = ZModMat::identity(m);
  {
    std::map<std::vector<int64_t>, ZModMat> section;
    std::vector<ZModMat> queue{ZModMat::identity(m)};
    section[Q.label(queue[0])] = queue[0];
    for (size_t i = 0; i < queue.size() && (int64_t)section.size() < Q.order(); ++i)
      for (const auto& g : K.generators()) {
        ZModMat x = queue[i] * g;
        auto lab = Q.label(x);
        if (!section.count(lab)) {
          section[lab] = x;
          queue.push_back(x);
        }
      }
    std::vector<int64_t> want{1};
    if (!section.count(want))
      throw std::logic_error("invariant_subspace: no SL2 generator of the quotient");
    g0 = section[want];
  }
  auto sp = std::make_shared<ModularFormSpace>(gim, k);
  auto basis = sp->basis();
  if (basis.empty()) throw std::domain_error("invariant_subspace: zero space");
  // matrix of the g0 star action on coordinates
  QMat vecs;
  for (auto& f : basis) vecs.push_back(sp->phi_vector(f.expansions));
  QMat transposed(vecs[0].size(), QVec(vecs.size(), Rat(0)));
  for (size_t i = 0; i < vecs.size(); ++i)
    for (size_t j = 0; j < vecs[i].size(); ++j) transposed[j][i] = vecs[i][j];
  size_t dim = basis.size();
  QMat M0(dim, QVec(dim, Rat(0)));  // row-vector action: coords(f * g0) = coords(f) . M0
  for (size_t i = 0; i < dim; ++i) {
    // f_i * g0 via the acted monomial provenance
    std::vector<QSeries> acted;
    bool first = true;
    for (auto& [c, mono] : basis[i].provenance) {
      auto e = sp->monomial_expansions(mono.acted_by(g0), sp->sturm().b + sp->modulus());
      if (first) {
        acted.clear();
        for (auto& s : e) acted.push_back(s * c);
        first = false;
      } else {
        for (size_t t = 0; t < e.size(); ++t) acted[t] = acted[t] + e[t] * c;
      }
    }
    QVec target = sp->phi_vector(acted);
    auto sol = solve(transposed, target);
    if (!sol) throw std::logic_error("invariant_subspace: action leaves the space");
    for (size_t j = 0; j < dim; ++j) M0[i][j] = (*sol)[j];
  }
  // kernel of Phi_{p0^e}(M0) acting on row vectors
  std::vector<Int> phipoly = cyclotomic_poly(p0e);
  QMat P(dim, QVec(dim, Rat(0)));
  // evaluate polynomial at M0: sum phi_i M0^i
  QMat power(dim, QVec(dim, Rat(0)));
  for (size_t i = 0; i < dim; ++i) power[i][i] = 1;
  for (size_t c = 0; c < phipoly.size(); ++c) {
    for (size_t i = 0; i < dim; ++i)
      for (size_t j = 0; j < dim; ++j) P[i][j] += Rat(phipoly[c]) * power[i][j];
    // power = power * M0
    QMat nxt(dim, QVec(dim, Rat(0)));
    for (size_t i = 0; i < dim; ++i)
      for (size_t j = 0; j < dim; ++j)
        for (size_t t = 0; t < dim; ++t) nxt[i][j] += power[i][t] * M0[t][j];
    power = nxt;
  }
  // rows v with v . P = 0: kernel of P^T
  QMat Pt(dim, QVec(dim, Rat(0)));
  for (size_t i = 0; i < dim; ++i)
    for (size_t j = 0; j < dim; ++j) Pt[i][j] = P[j][i];
  QMat ker = nullspace(Pt);
  int64_t mm = euler_phi(p0e);
  for (auto& v : ker) {
    // candidate cyclic vector: v, vM, ..., vM^{m-1} must be independent
    QMat chain;
    QVec cur = v;
    for (int64_t t = 0; t < mm; ++t) {
      chain.push_back(cur);
      QVec nxt(dim, Rat(0));
      for (size_t j = 0; j < dim; ++j)
        for (size_t i = 0; i < dim; ++i) nxt[j] += cur[i] * M0[i][j];
      cur = nxt;
    }
    QMat probe = chain;
    if (rank(probe) != (int)mm) continue;
    InvariantSubspace out;
    out.space = sp;
    out.g0 = g0;
    out.p0e = p0e;
    for (auto& row : chain) {
      ModForm f;
      bool first = true;
      for (size_t i = 0; i < dim; ++i) {
        if (row[i] == 0) continue;
        ModForm term = basis[i] * row[i];
        if (first) {
          f = term;
          first = false;
        } else {
          f = f + term;
        }
      }
      out.forms.push_back(f);
    }
    // companion matrix of Phi_{p0^e}
    out.companion.assign(mm, std::vector<Rat>(mm, Rat(0)));
    for (int64_t i = 0; i + 1 < mm; ++i) out.companion[i + 1][i] = 1;
    for (int64_t i = 0; i < mm; ++i) out.companion[i][mm - 1] = Rat(-phipoly[i]);
    return out;
  }
  throw std::domain_error("invariant_subspace: no faithful irreducible subspace at this weight");
}

}  // namespace openimage
