#include "cellnet/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cellnet/dynamics.hpp"
#include "cellnet/error.hpp"
#include "cellnet/repspace.hpp"

namespace cellnet::acceptance {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Collects failures; the first few go into the detail line.
struct Checker {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    ++failures;
    if (notes.size() < 4) notes.push_back(what);
  }
  bool ok() const { return failures == 0; }
  std::string summary(const std::string& extra = {}) const {
    std::ostringstream s;
    s << checks - failures << "/" << checks << " checks";
    if (!extra.empty()) s << "; " << extra;
    for (const auto& n : notes) s << "; FAIL " << n;
    return s.str();
  }
};

std::string rk(std::size_t n, std::size_t k) {
  return "R_{" + std::to_string(n) + "," + std::to_string(k) + "}";
}

CellMap power(const CellMap& s, std::size_t e) {
  CellMap r = CellMap::identity(s.size());
  for (std::size_t i = 0; i < e; ++i) r = compose(s, r);
  return r;
}

Block ring_block(std::size_t n, std::size_t k) {
  Block b;
  for (std::size_t i = k; i < n + k; ++i) b.members.push_back(static_cast<CellIndex>(i));
  return b;
}

Partition projection_partition(const std::vector<ElementIndex>& projection) {
  return Partition(std::vector<std::uint32_t>(projection.begin(), projection.end()));
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// ---------------------------------------------------------------------------

std::string c1_monoid_size(std::uint64_t, bool& ok) {
  Checker c;
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::size_t k = 1; k <= 6; ++k) {
      const auto net = make_ring_ff(n, k);
      const auto m = monoid_closure(net);
      c.expect(m.size() == n + k, rk(n, k) + " has |Σ| = " + std::to_string(m.size()));
      const auto& s = net.generators()[0].map;
      c.expect(power(s, n + k) == power(s, k), rk(n, k) + ": σ^{n+k} != σ^k");
      c.expect(find_isomorphism(fundamental_network(m), net).has_value(),
               rk(n, k) + " not isomorphic to its fundamental network");
    }
  ok = c.ok();
  return c.summary("n,k in 1..6");
}

std::string c2_quotient_recovery(std::uint64_t, bool& ok) {
  Checker c;
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto net = make_ring_ff(n, k);
      const auto m = monoid_closure(net);
      const auto q = quotient_network(net, m, block_partition(net, ring_block(n, k)));
      c.expect(find_isomorphism(q.quotient_net, make_ring_ff(1, k)).has_value(),
               rk(n, k) + " quotient is not " + rk(1, k));
    }
  ok = c.ok();
  return c.summary("n,k in 1..5");
}

void check_blocks(const NetworkSpec& net, const Monoid& m, const std::string& tag, Checker& c,
                  std::size_t& blocks, std::size_t& positive) {
  for (const auto& b : find_blocks(net)) {
    ++blocks;
    const auto fast = is_projection_block(net, m, b);
    const auto slow = brute_force_projection_block(m, b);
    c.expect(fast.has_value() == slow.has_value(), tag + ": projection-block verdicts differ");
    if (!fast) continue;
    ++positive;
    const ElementIndex iota = *fast->idempotent;
    c.expect(m.product(iota, iota) == iota, tag + ": ι not idempotent");
    const auto& map = m.element(iota);
    c.expect(map.image() == b.members, tag + ": ι(C) != B");
    bool fixes = true;
    for (auto q : b.members) fixes = fixes && map[q] == q;
    c.expect(fixes, tag + ": ι not the identity on B");
    const auto& kappa = m.element(*fast->witness_kappa);
    c.expect(kappa.image() == b.members, tag + ": κ(C) != B");
  }
}

std::string c3_projection_blocks(std::uint64_t seed, bool& ok) {
  Checker c;
  std::size_t blocks = 0, positive = 0, redraws = 0;
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto net = make_ring_ff(n, k);
      check_blocks(net, monoid_closure(net), rk(n, k), c, blocks, positive);
    }
  {
    const auto net = figure2_network();
    check_blocks(net, monoid_closure(net), "figure-2", c, blocks, positive);
  }
  std::mt19937_64 rng(mix(seed, 3));
  for (int i = 0; i < 200; ++i) {
    for (;;) {
      const auto net = random_network(rng, 7, 3);
      try {
        const auto m = monoid_closure(net, 5000);
        check_blocks(net, m, "random #" + std::to_string(i), c, blocks, positive);
        break;
      } catch (const CapacityExceeded&) {
        ++redraws;
      }
    }
  }
  ok = c.ok();
  return c.summary(std::to_string(blocks) + " blocks, " + std::to_string(positive) +
                   " projection blocks, " + std::to_string(redraws) + " redraws");
}

std::string c4_splitting(std::uint64_t seed, bool& ok) {
  Checker c;
  auto run = [&](const NetworkSpec& net, const Monoid& m, const Block& b, CellIndex p,
                 const std::string& tag) {
    for (std::size_t d = 1; d <= 2; ++d) {
      const auto rep = verify_projection_block_theorem(net, m, b, p, d);
      for (const auto& chk : rep.checks)
        c.expect(chk.holds, tag + " d=" + std::to_string(d) + " " + chk.name);
    }
  };
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t k = 1; k <= 5; ++k) {
      const auto net = make_ring_ff(n, k);
      run(net, monoid_closure(net), ring_block(n, k), 0, rk(n, k));
    }
  {
    const auto net = figure2_network();
    run(net, monoid_closure(net), Block{{2, 3}, {}, {}}, 0, "figure-2");
  }
  std::mt19937_64 rng(mix(seed, 4));
  std::size_t largest = 0;
  for (int i = 0; i < 100; ++i) {
    const auto s = random_projection_block_network(rng);
    largest = std::max(largest, s.monoid_size);
    run(s.net, monoid_closure(s.net), s.block, s.cell, "random #" + std::to_string(i));
  }
  ok = c.ok();
  return c.summary("d in {1,2}; largest random |Σ| = " + std::to_string(largest));
}

std::size_t totient(std::size_t n) {
  std::size_t t = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (std::gcd(i, n) == 1) ++t;
  return t;
}

bool summands_decompose(const RegularRep& rep, const Decomposition& dec, const Subspace& whole) {
  std::vector<Subspace> parts;
  for (const auto& s : dec.summands) {
    parts.push_back(s.space);
    if (s.space.is_exact() ? !rep.is_invariant(s.space) : rep.invariance_defect(s.space) > 1e-8)
      return false;
  }
  if (!independent(parts, whole.ambient_dim())) return false;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.dim();
  return total == whole.dim();
}

std::string c5_decomposition(std::uint64_t seed, bool& ok) {
  Checker c;
  std::size_t float_planes = 0;
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::size_t k = 1; k <= 4; ++k) {
      const std::string tag = rk(n, k);
      const auto net = make_ring_ff(n, k);
      const auto m = monoid_closure(net);
      const RegularRep rep(m, 1);
      const std::size_t dim = rep.dim();
      const auto dec = decompose(rep, Subspace::full(dim), seed);
      c.expect(summands_decompose(rep, dec, Subspace::full(dim)), tag + ": summands do not decompose the space");
      const std::size_t planes = (n - 1) / 2;
      const std::size_t expected = 2 + (n % 2 == 0 ? 1 : 0) + planes;
      c.expect(dec.summands.size() == expected,
               tag + ": " + std::to_string(dec.summands.size()) + " summands, expected " +
                   std::to_string(expected));
      for (const auto& s : dec.summands)
        c.expect(s.certificate.indecomposable, tag + ": uncertified summand");

      std::vector<char> used(dec.summands.size(), 0);
      auto take = [&](const std::function<bool(const Summand&)>& pred) -> const Summand* {
        for (std::size_t i = 0; i < dec.summands.size(); ++i)
          if (!used[i] && pred(dec.summands[i])) {
            used[i] = 1;
            return &dec.summands[i];
          }
        return nullptr;
      };

      // Kernel of the idempotent projection: X_{σ^i} = 0 for k <= i < n+k.
      QMatrix eqs(n, dim);
      for (std::size_t i = 0; i < n; ++i) eqs(i, k + i) = 1;
      const Subspace kernel = Subspace::solutions(dim, eqs);
      const Summand* ks = take([&](const Summand& s) { return s.space.is_exact() && s.space == kernel; });
      c.expect(ks != nullptr, tag + ": kernel summand missing");
      if (ks) {
        c.expect(ks->certificate.type == FieldType::kReal, tag + ": kernel summand not real type");
        const auto a = restricted_action(rep, ks->space);
        QMatrix pw = QMatrix::identity(k);
        for (std::size_t i = 0; i < k; ++i) pw = pw * a[0];
        c.expect(pw.is_zero(), tag + ": σ not nilpotent on the kernel summand");
      }

      auto line = [&](auto value) {
        QMatrix row(1, dim);
        for (std::size_t i = 0; i < dim; ++i) row(0, i) = value(i);
        return Subspace::span(dim, row);
      };
      const Subspace trivial = line([](std::size_t) { return Rational(1); });
      const Summand* ts = take([&](const Summand& s) { return s.space.is_exact() && s.space == trivial; });
      c.expect(ts && ts->certificate.type == FieldType::kReal, tag + ": trivial line missing or not real");
      if (n % 2 == 0) {
        const Subspace sign = line([](std::size_t i) { return Rational(i % 2 == 0 ? 1 : -1); });
        const Summand* ss = take([&](const Summand& s) { return s.space.is_exact() && s.space == sign; });
        c.expect(ss && ss->certificate.type == FieldType::kReal, tag + ": sign line missing or not real");
      }
      for (std::size_t j = 1; j <= planes; ++j) {
        DMatrix rows(2, dim);
        for (std::size_t i = 0; i < dim; ++i) {
          const double angle = 2.0 * std::numbers::pi * static_cast<double>(j * (i % n)) / static_cast<double>(n);
          rows(0, i) = std::cos(angle);
          rows(1, i) = std::sin(angle);
        }
        const Subspace plane = Subspace::from_float(dim, rows, 0.0);
        const bool rational = totient(n / std::gcd(n, j)) <= 2;
        const Summand* ps = take([&](const Summand& s) {
          return s.space.dim() == 2 && max_principal_sine(s.space, plane) <= 1e-8;
        });
        c.expect(ps != nullptr, tag + ": frequency-" + std::to_string(j) + " plane missing");
        if (!ps) continue;
        if (!ps->space.is_exact()) ++float_planes;
        c.expect(ps->certificate.type == FieldType::kComplex, tag + ": plane not complex type");
        c.expect(ps->space.is_exact() == rational,
                 tag + ": plane exactness does not match its splitting field");
      }
    }
  ok = c.ok();
  return c.summary("n<=6, k<=4; " + std::to_string(float_planes) + " float-refined planes");
}

bool match_by_iso(const RegularRep& rep, const Decomposition& a, const Decomposition& b,
                  std::uint64_t seed) {
  if (a.summands.size() != b.summands.size()) return false;
  std::vector<char> used(b.summands.size(), 0);
  for (const auto& s : a.summands) {
    bool found = false;
    for (std::size_t j = 0; j < b.summands.size() && !found; ++j) {
      if (used[j] || b.summands[j].space.dim() != s.space.dim()) continue;
      if (b.summands[j].certificate.type != s.certificate.type) continue;
      if (iso_test(rep, s.space, b.summands[j].space, seed)) {
        used[j] = 1;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

std::string c6_krull_schmidt(std::uint64_t seed, bool& ok) {
  Checker c;
  for (std::size_t n = 1; n <= 6; ++n)
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto net = make_ring_ff(n, k);
      const auto m = monoid_closure(net);
      const RegularRep rep(m, 1);
      const auto full = Subspace::full(rep.dim());
      const auto d0 = decompose(rep, full, seed);
      const auto d1 = decompose(rep, full, seed + 1);
      c.expect(match_by_iso(rep, d0, d1, seed), rk(n, k) + ": seeds disagree up to isomorphism");
    }
  ok = c.ok();
  return c.summary("seeds " + std::to_string(seed) + " and " + std::to_string(seed + 1));
}

std::string c7_type_preservation(std::uint64_t seed, bool& ok) {
  Checker c;
  std::size_t matched = 0;
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t k = 1; k <= 4; ++k) {
      const std::string tag = rk(n, k);
      const auto net = make_ring_ff(n, k);
      const auto m = monoid_closure(net);
      const RegularRep big(m, 1);
      const auto dec = decompose(big, Subspace::full(big.dim()), seed);
      const auto q = quotient_network(net, m, block_partition(net, ring_block(n, k)));
      const Subspace syn = synchrony_subspace(big, projection_partition(q.projection));
      const auto inter = intersect_with_synchrony(big, dec, syn);

      const RegularRep small(q.quotient_monoid, 1);
      const auto small_dec = decompose(small, Subspace::full(small.dim()), seed);
      c.expect(inter.summands.size() == small_dec.summands.size(),
               tag + ": intersection has " + std::to_string(inter.summands.size()) +
                   " summands, quotient has " + std::to_string(small_dec.summands.size()));
      for (const auto& s : inter.summands) {
        const Certificate own = certify_indecomposable(big, s.space);
        c.expect(own.indecomposable && own.type == s.certificate.type,
                 tag + ": intersection type differs from its parent");
      }
      std::vector<char> used(inter.summands.size(), 0);
      for (const auto& t : small_dec.summands) {
        c.expect(t.space.is_exact(), tag + ": quotient summand not exact");
        if (!t.space.is_exact()) continue;
        const Subspace lifted =
            Subspace::span(big.dim(), embed_quotient_rows(q.projection, 1, t.space.basis()));
        bool found = false;
        for (std::size_t i = 0; i < inter.summands.size() && !found; ++i) {
          const auto& s = inter.summands[i];
          if (used[i] || s.space.dim() != lifted.dim() || s.certificate.type != t.certificate.type)
            continue;
          if (iso_test(big, s.space, lifted, seed)) {
            used[i] = 1;
            found = true;
            ++matched;
          }
        }
        c.expect(found, tag + ": quotient summand of dim " + std::to_string(t.space.dim()) +
                            " has no matching intersection");
      }
    }
  ok = c.ok();
  return c.summary("n,k<=4; " + std::to_string(matched) + " summands matched");
}

std::string c8_steady(std::uint64_t seed, bool& ok) {
  Checker c;
  std::ostringstream found;
  const std::vector<double> targets = {1.0, 0.5, 0.25, 0.125};
  for (auto [n, k] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 3}, {3, 3}, {1, 4}, {3, 4}}) {
    const std::string tag = rk(n, k);
    const auto net = make_ring_ff(n, k);
    const auto m = monoid_closure(net);
    const auto field = dyn::VectorField::from_preset(net, m, dyn::Preset::kSteady);
    const auto grid = dyn::lambda_grid(-1e-2, -1e-5, 40);
    dyn::ContinuationOptions opt;
    opt.seed = seed;
    const auto branches = dyn::continue_branches(field, grid, opt);
    std::vector<double> exps;
    std::size_t bifurcating = 0;
    double ring_max = 0.0, residual_max = 0.0;
    for (const auto& b : branches) {
      if (b.trivial() || b.points.size() != grid.size() || b.max_abs_at_end() > 0.5) continue;
      ++bifurcating;
      for (const auto& p : b.points) {
        for (std::size_t q = k; q < n + k; ++q) ring_max = std::max(ring_max, std::abs(p.x[q]));
        for (double v : field(p.x, p.lambda)) residual_max = std::max(residual_max, std::abs(v));
      }
      for (const auto& cf : b.cells)
        if (cf.fitted) exps.push_back(cf.fit.exponent);
    }
    c.expect(bifurcating > 0, tag + ": no bifurcating branches");
    auto near = [&](double t) {
      return std::any_of(exps.begin(), exps.end(), [&](double e) { return std::abs(e - t) <= 0.05; });
    };
    c.expect(near(1.0), tag + ": no exponent near 1");
    c.expect(near(0.5), tag + ": no exponent near 1/2");
    if (k >= 4) c.expect(near(0.25), tag + ": no exponent near 1/4");
    for (double e : exps) {
      bool any = false;
      for (std::size_t i = 0; i < k; ++i) any = any || std::abs(e - targets[i]) <= 0.05;
      c.expect(any, tag + ": stray exponent " + fmt(e));
    }
    c.expect(ring_max <= 1e-8, tag + ": ring cells reach " + fmt(ring_max, 12));
    c.expect(residual_max <= 1e-10, tag + ": branch residual " + std::to_string(residual_max));
    double lo = 1.0, hi = 0.0;
    for (double e : exps) {
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    found << tag << ": " << bifurcating << " branches, exponents in [" << fmt(lo, 3) << ", "
          << fmt(hi, 3) << "]  ";
  }
  ok = c.ok();
  return c.summary(found.str());
}

std::string c9_hopf(std::uint64_t seed, bool& ok) {
  Checker c;
  dyn::HopfOptions opt;
  opt.seed = seed;
  const auto grid = dyn::lambda_grid(1e-2, 1e-5, 40);
  const auto rep = dyn::hopf_amplitude_sweep(1, 3, grid, opt);
  std::string got;
  auto fit_for = [&](CellIndex cell) -> const dyn::HopfCellFit* {
    for (const auto& f : rep.fits)
      if (f.cell == cell) return &f;
    return nullptr;
  };
  const auto* f1 = fit_for(2);
  const auto* f2 = fit_for(1);
  c.expect(f1 && std::abs(f1->fit.exponent - 0.5) <= 0.02, "c2 exponent not 1/2 ± 0.02");
  c.expect(f2 && std::abs(f2->fit.exponent - 1.0 / 6.0) <= 0.03, "c1 exponent not 1/6 ± 0.03");
  c.expect(std::find(rep.locked_cells.begin(), rep.locked_cells.end(), 3) != rep.locked_cells.end(),
           "ring cell not locked at 0");
  c.expect(rep.flagged * 5 <= grid.size(), std::to_string(rep.flagged) + " flagged points");
  if (f1) got += "p1 = " + fmt(f1->fit.exponent);
  if (f2) got += ", p2 = " + fmt(f2->fit.exponent);
  if (const auto* f3 = fit_for(0)) got += ", p3 = " + fmt(f3->fit.exponent) + " (not a target)";
  got += ", flagged " + std::to_string(rep.flagged) + "/" + std::to_string(grid.size());
  ok = c.ok();
  return c.summary(got);
}

std::string c10_robust_synchrony(std::uint64_t seed, bool& ok) {
  Checker c;
  std::vector<std::pair<std::string, NetworkSpec>> nets;
  for (std::size_t n = 1; n <= 3; ++n)
    for (std::size_t k = 1; k <= 3; ++k) nets.emplace_back(rk(n, k), make_ring_ff(n, k));
  nets.emplace_back("figure-2", figure2_network());
  constexpr int kResponses = 50;
  std::size_t cases_run = 0;
  double worst = 0.0;
  for (const auto& [tag, net] : nets) {
    const auto m = monoid_closure(net);
    std::vector<dyn::DefectCase> cases;
    for (const auto& p : enumerate_balanced_partitions(net))
      for (int r = 0; r < kResponses; ++r)
        cases.push_back({dyn::random_cubic_response(m.size(), mix(seed, 100 + r)), p,
                         dyn::random_synchronous_point(p, mix(seed, 1000 + r + 97 * cases.size()))});
    const auto res = dyn::defect_suite(net, m, cases, 20.0, 0.0);
    for (std::size_t i = 0; i < res.size(); ++i) {
      worst = std::max(worst, res[i].defect);
      c.expect(res[i].status == dyn::OdeStatus::kOk && res[i].defect <= 1e-8,
               tag + ": defect " + std::to_string(res[i].defect) + " (" +
                   dyn::to_string(res[i].status) + ")");
    }
    cases_run += cases.size();
  }
  // Negative control: {c1,c2},{c3},{c4} on the figure-2 network.
  const auto net = figure2_network();
  const auto m = monoid_closure(net);
  const Partition bad({0, 0, 1, 2});
  c.expect(!is_balanced(net, bad), "negative control partition is balanced");
  std::vector<dyn::DefectCase> cases;
  for (int r = 0; r < kResponses; ++r)
    cases.push_back({dyn::random_cubic_response(m.size(), mix(seed, 100 + r)), bad,
                     dyn::random_synchronous_point(bad, mix(seed, 5000 + r))});
  const auto res = dyn::defect_suite(net, m, cases, 20.0, 0.0);
  int separated = 0;
  for (const auto& r : res)
    if (r.defect > 1e-3) ++separated;
  c.expect(separated >= 45, "negative control separated only " + std::to_string(separated) + "/50");
  ok = c.ok();
  return c.summary(std::to_string(cases_run) + " balanced cases, worst defect " +
                   std::to_string(worst) + "; control " + std::to_string(separated) + "/50");
}

using Runner = std::string (*)(std::uint64_t, bool&);

Runner runner(int id) {
  switch (id) {
    case 1: return c1_monoid_size;
    case 2: return c2_quotient_recovery;
    case 3: return c3_projection_blocks;
    case 4: return c4_splitting;
    case 5: return c5_decomposition;
    case 6: return c6_krull_schmidt;
    case 7: return c7_type_preservation;
    case 8: return c8_steady;
    case 9: return c9_hopf;
    case 10: return c10_robust_synchrony;
  }
  return nullptr;
}

}  // namespace

const std::vector<CriterionInfo>& criteria() {
  static const std::vector<CriterionInfo> list = {
      {1, "monoid size law", 1},
      {2, "quotient recovery", 1},
      {3, "projection-block machinery", 10},
      {4, "projection-block splitting identities", 30},
      {5, "decomposition structure", 30},
      {6, "Krull-Schmidt stability", 30},
      {7, "type preservation under synchrony", 30},
      {8, "steady-state branch scalings", 60},
      {9, "Hopf amplitude scalings", 120},
      {10, "robust synchrony defects", 120},
  };
  return list;
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
  const auto& all = criteria();
  require(id >= 1 && id <= static_cast<int>(all.size()),
          "no acceptance criterion " + std::to_string(id));
  const auto& info = all[static_cast<std::size_t>(id - 1)];
  CriterionResult r;
  r.id = id;
  r.name = info.name;
  r.limit_seconds = info.limit_seconds;
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    r.detail = runner(id)(seed, ok);
  } catch (const std::exception& e) {
    ok = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.passed = ok && r.seconds <= r.limit_seconds;
  if (ok && !r.passed) r.detail += "; over the time limit";
  return r;
}

std::vector<CriterionResult> run_all(std::uint64_t seed, std::optional<int> only) {
  std::vector<CriterionResult> out;
  for (const auto& info : criteria())
    if (!only || *only == info.id) out.push_back(run_criterion(info.id, seed));
  require(!out.empty(), "no acceptance criterion " + std::to_string(only.value_or(0)));
  return out;
}

std::string format_line(const CriterionResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "%s %2d %-38s (%.2f s / %g s)  ", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.limit_seconds);
  return head + r.detail;
}

// ---------------------------------------------------------------------------

NetworkSpec figure2_network() {
  return NetworkSpec({"c1", "c2", "c3", "c4"}, {{"s", CellMap({1, 2, 3, 2})}});
}

NetworkSpec random_network(std::mt19937_64& rng, std::size_t max_cells, std::size_t max_generators) {
  std::uniform_int_distribution<std::size_t> cells_dist(1, max_cells);
  std::uniform_int_distribution<std::size_t> gens_dist(1, max_generators);
  const std::size_t cells = cells_dist(rng);
  const std::size_t gens = gens_dist(rng);
  std::uniform_int_distribution<CellIndex> image(0, static_cast<CellIndex>(cells - 1));
  std::vector<std::string> labels;
  for (std::size_t q = 0; q < cells; ++q) labels.push_back("c" + std::to_string(q));
  std::vector<Generator> generators;
  for (std::size_t g = 0; g < gens; ++g) {
    std::vector<CellIndex> t(cells);
    for (auto& v : t) v = image(rng);
    generators.push_back({"g" + std::to_string(g), CellMap(std::move(t))});
  }
  return NetworkSpec(std::move(labels), std::move(generators));
}

ProjectionBlockSample random_projection_block_network(std::mt19937_64& rng, std::size_t max_monoid) {
  std::uniform_int_distribution<std::size_t> cells_dist(2, 6);
  std::uniform_int_distribution<std::size_t> gens_dist(1, 3);
  for (;;) {
    const std::size_t cells = cells_dist(rng);
    std::uniform_int_distribution<std::size_t> bsize(1, cells - 1);
    const std::size_t outside = cells - bsize(rng);  // B = {outside, ..., cells-1}
    const std::size_t gens = gens_dist(rng);
    std::vector<Generator> generators;
    {
      std::vector<CellIndex> theta(cells);
      std::vector<CellIndex> perm;
      for (std::size_t q = outside; q < cells; ++q) perm.push_back(static_cast<CellIndex>(q));
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t q = outside; q < cells; ++q) theta[q] = perm[q - outside];
      for (std::size_t q = 0; q < outside; ++q) {
        std::uniform_int_distribution<CellIndex> later(static_cast<CellIndex>(q + 1),
                                                       static_cast<CellIndex>(cells - 1));
        theta[q] = later(rng);
      }
      generators.push_back({"g0", CellMap(std::move(theta))});
    }
    std::uniform_int_distribution<CellIndex> any(0, static_cast<CellIndex>(cells - 1));
    std::uniform_int_distribution<CellIndex> in_b(static_cast<CellIndex>(outside),
                                                  static_cast<CellIndex>(cells - 1));
    for (std::size_t g = 1; g < gens; ++g) {
      std::vector<CellIndex> t(cells);
      for (std::size_t q = 0; q < cells; ++q) t[q] = q < outside ? any(rng) : in_b(rng);
      generators.push_back({"g" + std::to_string(g), CellMap(std::move(t))});
    }
    std::vector<std::string> labels;
    for (std::size_t q = 0; q < cells; ++q) labels.push_back("c" + std::to_string(q));
    NetworkSpec net(std::move(labels), std::move(generators));
    Monoid m;
    try {
      m = monoid_closure(net, max_monoid);
    } catch (const CapacityExceeded&) {
      continue;
    }
    const auto dependent = fully_dependent_cells(net, m);
    if (dependent.empty()) continue;
    Block b;
    for (std::size_t q = outside; q < cells; ++q) b.members.push_back(static_cast<CellIndex>(q));
    return {std::move(net), std::move(b), dependent.front(), m.size()};
  }
}

}  // namespace cellnet::acceptance
