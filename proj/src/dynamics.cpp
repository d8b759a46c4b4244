#include "cellnet/dynamics.hpp"

#include <omp.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace cellnet::dyn {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<std::vector<std::uint32_t>> build_wiring(const NetworkSpec& net, const Monoid& m) {
  std::vector<std::vector<std::uint32_t>> w(net.cell_count(), std::vector<std::uint32_t>(m.size()));
  for (std::size_t q = 0; q < net.cell_count(); ++q)
    for (std::size_t j = 0; j < m.size(); ++j) w[q][j] = m.element(static_cast<ElementIndex>(j))[q];
  return w;
}

}  // namespace

const char* to_string(Preset p) {
  switch (p) {
    case Preset::kNone: return "none";
    case Preset::kSteady: return "ff-steady";
    case Preset::kHopf: return "ff-hopf";
  }
  return "?";
}

Preset parse_preset(const std::string& name) {
  if (name == "ff-steady") return Preset::kSteady;
  if (name == "ff-hopf") return Preset::kHopf;
  fail(ErrorKind::kInvalidInput, "unknown preset '" + name + "' (expected ff-steady or ff-hopf)");
}

const char* to_string(OdeStatus s) {
  switch (s) {
    case OdeStatus::kOk: return "ok";
    case OdeStatus::kDiverged: return "diverged";
    case OdeStatus::kStepUnderflow: return "step-underflow";
    case OdeStatus::kMaxSteps: return "max-steps";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// VectorField

VectorField VectorField::from_expression(const NetworkSpec& net, const Monoid& m,
                                         const expr::Expr& f) {
  require(m.degree() == net.cell_count(), "monoid does not act on this network");
  require(f.arity() <= m.size(), "response uses x" + std::to_string(f.arity()) +
                                     " but the monoid has only " + std::to_string(m.size()) +
                                     " elements");
  VectorField v;
  v.cells_ = net.cell_count();
  v.wiring_ = build_wiring(net, m);
  v.response_ = f;
  v.f_ = expr::Compiled(f);
  for (std::uint32_t j = 1; j <= f.arity(); ++j) v.df_.emplace_back(expr::partial(f, j));
  return v;
}

VectorField VectorField::from_preset(const NetworkSpec& net, const Monoid& m, Preset p) {
  require(m.size() >= 2, "presets need a monoid with a non-identity element");
  if (p == Preset::kSteady) {
    VectorField v = from_expression(net, m, expr::parse(kSteadyPreset));
    v.preset_ = Preset::kSteady;
    return v;
  }
  require(p == Preset::kHopf, "no preset selected");
  VectorField v;
  v.cells_ = net.cell_count();
  v.cell_dim_ = 2;
  v.preset_ = Preset::kHopf;
  v.wiring_ = build_wiring(net, m);
  return v;
}

VectorField VectorField::rotating_frame() const {
  require(preset_ == Preset::kHopf, "rotating frame is only defined for the ff-hopf preset");
  VectorField v = *this;
  v.rotating_ = true;
  return v;
}

void VectorField::eval(const double* x, double lambda, double* out) const {
  if (preset_ != Preset::kHopf) {
    for (std::size_t q = 0; q < cells_; ++q) out[q] = f_.eval_indirect(x, wiring_[q].data(), lambda);
    return;
  }
  const double spin = rotating_ ? 0.0 : 1.0;
  for (std::size_t q = 0; q < cells_; ++q) {
    const double a = x[2 * q];
    const double b = x[2 * q + 1];
    const std::size_t w = wiring_[q][1];
    const double r2 = a * a + b * b;
    out[2 * q] = lambda * a - spin * b - r2 * a - x[2 * w];
    out[2 * q + 1] = spin * a + lambda * b - r2 * b - x[2 * w + 1];
  }
}

std::vector<double> VectorField::operator()(const std::vector<double>& x, double lambda) const {
  require(x.size() == dim(), "state has the wrong dimension");
  std::vector<double> out(dim());
  eval(x.data(), lambda, out.data());
  return out;
}

DMatrix VectorField::jacobian(const std::vector<double>& x, double lambda) const {
  require(x.size() == dim(), "state has the wrong dimension");
  DMatrix j(dim(), dim());
  if (preset_ != Preset::kHopf) {
    for (std::size_t q = 0; q < cells_; ++q)
      for (std::size_t v = 0; v < df_.size(); ++v)
        j(q, wiring_[q][v]) += df_[v].eval_indirect(x.data(), wiring_[q].data(), lambda);
    return j;
  }
  const double spin = rotating_ ? 0.0 : 1.0;
  for (std::size_t q = 0; q < cells_; ++q) {
    const double a = x[2 * q];
    const double b = x[2 * q + 1];
    const double r2 = a * a + b * b;
    const std::size_t w = wiring_[q][1];
    j(2 * q, 2 * q) += lambda - r2 - 2 * a * a;
    j(2 * q, 2 * q + 1) += -spin - 2 * a * b;
    j(2 * q + 1, 2 * q) += spin - 2 * a * b;
    j(2 * q + 1, 2 * q + 1) += lambda - r2 - 2 * b * b;
    j(2 * q, 2 * w) -= 1.0;
    j(2 * q + 1, 2 * w + 1) -= 1.0;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Integrators

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool blown_up(const std::vector<double>& x, double limit) {
  for (double v : x)
    if (!std::isfinite(v) || std::abs(v) > limit) return true;
  return false;
}

}  // namespace

OdeResult dopri5(const Rhs& f, std::vector<double>& x, double t0, double t1,
                 const OdeOptions& opt, const Observer& obs) {
  OdeResult res;
  res.t = t0;
  const std::size_t n = x.size();
  if (t1 <= t0 || n == 0) return res;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y(n), xn(n);
  f(t0, x.data(), k1.data());

  auto scale = [&](double a, double b) {
    return opt.atol + opt.rtol * std::max(std::abs(a), std::abs(b));
  };
  double h = opt.h0;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = scale(x[i], x[i]);
      d0 += (x[i] / s) * (x[i] / s);
      d1 += (k1[i] / s) * (k1[i] / s);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  }
  const double hmax = opt.hmax > 0 ? opt.hmax : (t1 - t0);
  h = std::min(h, hmax);
  double t = t0;
  while (t < t1) {
    if (res.steps + res.rejected >= opt.max_steps) {
      res.status = OdeStatus::kMaxSteps;
      break;
    }
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * a21 * k1[i];
    f(t + c2 * h, y.data(), k2.data());
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, y.data(), k3.data());
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * h, y.data(), k4.data());
    for (std::size_t i = 0; i < n; ++i)
      y[i] = x[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, y.data(), k5.data());
    for (std::size_t i = 0; i < n; ++i)
      y[i] = x[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + h, y.data(), k6.data());
    for (std::size_t i = 0; i < n; ++i)
      xn[i] = x[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    f(t + h, xn.data(), k7.data());
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double s = scale(x[i], xn[i]);
      err += (e / s) * (e / s);
    }
    err = std::sqrt(err / n);
    if (!std::isfinite(err)) err = 1e10;
    if (err <= 1.0) {
      t = last ? t1 : t + h;
      x.swap(xn);
      k1.swap(k7);
      ++res.steps;
      if (blown_up(x, opt.blowup)) {
        res.status = OdeStatus::kDiverged;
        break;
      }
      if (obs) obs(t, x);
      const double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      h = std::min(h * fac, hmax);
    } else {
      ++res.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        res.status = OdeStatus::kStepUnderflow;
        break;
      }
    }
  }
  res.t = t;
  return res;
}

OdeResult rk4(const Rhs& f, std::vector<double>& x, double t0, double t1, double h,
              const OdeOptions& opt, const Observer& obs) {
  require(h > 0.0, "rk4 needs a positive step");
  OdeResult res;
  const std::size_t n = x.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), y(n);
  double t = t0;
  while (t < t1) {
    const double hs = std::min(h, t1 - t);
    f(t, x.data(), k1.data());
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * hs * k1[i];
    f(t + 0.5 * hs, y.data(), k2.data());
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * hs * k2[i];
    f(t + 0.5 * hs, y.data(), k3.data());
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + hs * k3[i];
    f(t + hs, y.data(), k4.data());
    for (std::size_t i = 0; i < n; ++i) x[i] += hs / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    t = (t + hs >= t1) ? t1 : t + hs;
    ++res.steps;
    if (blown_up(x, opt.blowup)) {
      res.status = OdeStatus::kDiverged;
      break;
    }
    if (obs) obs(t, x);
  }
  res.t = t;
  return res;
}

Rhs autonomous(const VectorField& field, double lambda) {
  return [&field, lambda](double, const double* x, double* dx) { field.eval(x, lambda, dx); };
}

// ---------------------------------------------------------------------------
// Flow invariance

DefectResult flow_invariance_defect(const VectorField& field, const Partition& p,
                                    const std::vector<double>& x0, double T, double lambda,
                                    const OdeOptions& opt) {
  require(p.size() == field.cells(), "partition does not cover the cells");
  require(x0.size() == field.dim(), "initial state has the wrong dimension");
  const std::size_t d = field.cell_dim();
  const auto classes = p.classes();
  auto spread = [&](const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& cls : classes)
      for (std::size_t c = 0; c < d; ++c) {
        double lo = x[cls[0] * d + c], hi = lo;
        for (auto q : cls) {
          lo = std::min(lo, x[q * d + c]);
          hi = std::max(hi, x[q * d + c]);
        }
        worst = std::max(worst, hi - lo);
      }
    return worst;
  };
  require(spread(x0) <= 1e-12, "initial state is not in the synchrony space");
  DefectResult out;
  out.defect = spread(x0);
  std::vector<double> x = x0;
  const auto res = dopri5(autonomous(field, lambda), x, 0.0, T, opt,
                          [&](double, const std::vector<double>& s) {
                            out.defect = std::max(out.defect, spread(s));
                          });
  out.status = res.status;
  out.steps = res.steps;
  return out;
}

std::string random_cubic_response(std::size_t arity, std::uint64_t seed) {
  require(arity >= 1, "response needs at least one input");
  std::mt19937_64 rng(splitmix(seed));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(1, arity);
  std::string out = "-x1^3";
  auto term = [&](double coeff, const std::string& monomial) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", std::abs(coeff));
    out += coeff < 0 ? " - " : " + ";
    out += buf;
    if (!monomial.empty()) out += "*" + monomial;
  };
  auto xs = [](std::size_t j) { return "x" + std::to_string(j); };
  term(0.5 * unit(rng), "");
  for (std::size_t j = 1; j <= arity; ++j) term(unit(rng), xs(j));
  for (int t = 0; t < 3; ++t) {
    const std::size_t a = pick(rng), b = pick(rng);
    term(0.5 * unit(rng), a == b ? xs(a) + "^2" : xs(a) + "*" + xs(b));
  }
  for (int t = 0; t < 2; ++t) {
    const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
    if (a == 1 && b == 1 && c == 1) continue;
    term(0.2 * unit(rng), xs(a) + "*" + xs(b) + "*" + xs(c));
  }
  return out;
}

std::vector<double> random_synchronous_point(const Partition& p, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix(seed));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> value(p.class_count());
  for (auto& v : value) v = unit(rng);
  std::vector<double> x(p.size());
  for (std::size_t q = 0; q < p.size(); ++q) x[q] = value[p.class_of(q)];
  return x;
}

namespace {

std::vector<DefectResult> run_defect_suite(const NetworkSpec& net, const Monoid& m,
                                           const std::vector<DefectCase>& cases, double T,
                                           double lambda, bool parallel) {
  std::vector<DefectResult> out(cases.size());
  std::vector<std::string> errors(cases.size());
  const long count = static_cast<long>(cases.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < count; ++i) {
    try {
      const auto& c = cases[static_cast<std::size_t>(i)];
      const auto field = VectorField::from_expression(net, m, expr::parse(c.response));
      out[static_cast<std::size_t>(i)] = flow_invariance_defect(field, c.partition, c.x0, T, lambda);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorKind::kInvalidInput, e);
  return out;
}

}  // namespace

std::vector<DefectResult> defect_suite(const NetworkSpec& net, const Monoid& m,
                                       const std::vector<DefectCase>& cases, double T,
                                       double lambda) {
  return run_defect_suite(net, m, cases, T, lambda, true);
}

std::vector<DefectResult> defect_suite_serial(const NetworkSpec& net, const Monoid& m,
                                              const std::vector<DefectCase>& cases, double T,
                                              double lambda) {
  return run_defect_suite(net, m, cases, T, lambda, false);
}

// ---------------------------------------------------------------------------
// Newton

namespace {

struct SeedOutcome {
  bool ok = false;
  std::vector<double> x;
  std::string note;
};

SeedOutcome newton_one(const VectorField& field, double lambda, std::vector<double> x,
                       const NewtonOptions& opt) {
  SeedOutcome out;
  const std::size_t n = x.size();
  std::vector<double> fx = field(x, lambda);
  double norm = max_abs(fx);
  bool small_step = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    if (norm <= opt.ftol && small_step) break;
    const DMatrix j = field.jacobian(x, lambda);
    Eigen::MatrixXd ej(n, n);
    Eigen::VectorXd rhs(n);
    for (std::size_t r = 0; r < n; ++r) {
      rhs(static_cast<Eigen::Index>(r)) = -fx[r];
      for (std::size_t c = 0; c < n; ++c) ej(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j(r, c);
    }
    // Rank thresholds relative to the largest pivot misfire on triangular
    // Jacobians with tiny diagonals, so only exact zero pivots or a bad
    // solve count as singular.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(ej);
    lu.setThreshold(std::numeric_limits<double>::min());
    Eigen::VectorXd dx;
    bool singular = !lu.isInvertible();
    if (!singular) {
      dx = lu.solve(rhs);
      const double resid = (ej * dx - rhs).cwiseAbs().maxCoeff();
      singular = !dx.allFinite() || resid > 1e-6 * rhs.cwiseAbs().maxCoeff() + 1e-300;
    }
    if (singular) {
      if (norm <= opt.ftol) break;
      out.note = "singular Jacobian";
      return out;
    }
    double alpha = 1.0;
    bool accepted = false;
    std::vector<double> xn(n), fn;
    double nn = 0.0;
    for (int half = 0; half < 30; ++half) {
      for (std::size_t r = 0; r < n; ++r) xn[r] = x[r] + alpha * dx(static_cast<Eigen::Index>(r));
      fn = field(xn, lambda);
      nn = max_abs(fn);
      if (std::isfinite(nn) && (nn < norm || (norm <= opt.ftol && nn <= norm))) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (norm <= opt.ftol) break;
      out.note = "no descent direction";
      return out;
    }
    small_step = alpha * dx.cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + max_abs(x));
    x.swap(xn);
    fx.swap(fn);
    norm = nn;
  }
  if (!(norm <= opt.ftol) || !all_finite(x)) {
    out.note = "no convergence (|F| = " + std::to_string(norm) + ")";
    return out;
  }
  out.ok = true;
  out.x = std::move(x);
  return out;
}

NewtonResult collect(std::vector<SeedOutcome>& outcomes, const NewtonOptions& opt) {
  NewtonResult res;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (!o.ok) {
      res.notes.push_back("seed " + std::to_string(i) + ": " + o.note);
      continue;
    }
    bool dup = false;
    for (const auto& s : res.solutions) {
      double d = 0.0;
      for (std::size_t k = 0; k < s.size(); ++k) d = std::max(d, std::abs(s[k] - o.x[k]));
      if (d <= opt.dedupe_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) res.solutions.push_back(std::move(o.x));
  }
  return res;
}

NewtonResult run_newton(const VectorField& field, double lambda,
                        const std::vector<std::vector<double>>& seeds, const NewtonOptions& opt,
                        bool parallel) {
  require(!seeds.empty(), "Newton needs at least one seed");
  for (const auto& s : seeds) require(s.size() == field.dim(), "seed has the wrong dimension");
  std::vector<SeedOutcome> outcomes(seeds.size());
  const long count = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < count; ++i) {
    try {
      outcomes[static_cast<std::size_t>(i)] =
          newton_one(field, lambda, seeds[static_cast<std::size_t>(i)], opt);
    } catch (const std::exception& e) {
      outcomes[static_cast<std::size_t>(i)].note = e.what();
    }
  }
  return collect(outcomes, opt);
}

}  // namespace

NewtonResult newton_equilibria(const VectorField& field, double lambda,
                               const std::vector<std::vector<double>>& seeds,
                               const NewtonOptions& opt) {
  return run_newton(field, lambda, seeds, opt, true);
}

NewtonResult newton_equilibria_serial(const VectorField& field, double lambda,
                                      const std::vector<std::vector<double>>& seeds,
                                      const NewtonOptions& opt) {
  return run_newton(field, lambda, seeds, opt, false);
}

// ---------------------------------------------------------------------------
// Exponent fits and continuation

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points) {
  require(points.size() >= 8, "exponent fit needs at least 8 points");
  const bool neg = points[0].first < 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> logs;
  for (const auto& [lam, v] : points) {
    require(lam != 0.0 && (lam < 0) == neg, "exponent fit needs λ of one sign");
    require(v != 0.0 && std::isfinite(v), "exponent fit needs nonzero values");
    const double lx = std::log(std::abs(lam));
    const double ly = std::log(std::abs(v));
    logs.emplace_back(lx, ly);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(points.size());
  const double den = n * sxx - sx * sx;
  require(den > 0.0, "exponent fit needs at least two distinct λ");
  ExponentFit fit;
  fit.exponent = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.exponent * sx) / n;
  double ss = 0.0;
  for (const auto& [lx, ly] : logs) {
    const double r = ly - (fit.intercept + fit.exponent * lx);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::vector<double> lambda_grid(double from, double to, std::size_t points, bool log_scale) {
  require(points >= 2, "a λ grid needs at least two points");
  std::vector<double> g(points);
  if (!log_scale) {
    for (std::size_t i = 0; i < points; ++i)
      g[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
  }
  require(from != 0.0 && to != 0.0 && (from < 0) == (to < 0),
          "log-spaced λ grids need nonzero endpoints of one sign");
  const double sign = from < 0 ? -1.0 : 1.0;
  const double la = std::log(std::abs(from));
  const double lb = std::log(std::abs(to));
  for (std::size_t i = 0; i < points; ++i)
    g[i] = sign * std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(points - 1));
  g.front() = from;
  g.back() = to;
  return g;
}

bool EquilibriumBranch::trivial() const {
  return std::all_of(points.begin(), points.end(),
                     [](const BranchPoint& p) { return max_abs(p.x) <= 1e-10; });
}

double EquilibriumBranch::max_abs_at_end() const {
  return points.empty() ? 0.0 : max_abs(points.back().x);
}

namespace {

struct Active {
  std::size_t branch;
  std::vector<double> prediction;
  double tolerance;
};

std::vector<double> predict(const std::vector<BranchPoint>& pts, double target, double zero_tol,
                            double& step) {
  const auto& b = pts.back();
  std::vector<double> out = b.x;
  if (pts.size() == 1) {
    const double ratio = std::abs(target / b.lambda);
    step = max_abs(b.x) * std::abs(ratio - 1.0);
    return out;
  }
  const auto& a = pts[pts.size() - 2];
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double xa = a.x[i], xb = b.x[i];
    if (std::abs(xb) < zero_tol) continue;
    if (std::abs(xa) >= zero_tol && (xa < 0) == (xb < 0)) {
      const double s = std::log(std::abs(xb / xa)) / std::log(std::abs(b.lambda / a.lambda));
      out[i] = xb * std::pow(std::abs(target / b.lambda), s);
    } else {
      out[i] = xb + (xb - xa) * (target - b.lambda) / (b.lambda - a.lambda);
    }
  }
  double d = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) d = std::max(d, std::abs(out[i] - b.x[i]));
  step = d;
  return out;
}

}  // namespace

std::vector<EquilibriumBranch> continue_branches(const VectorField& field,
                                                 const std::vector<double>& grid,
                                                 const ContinuationOptions& opt) {
  require(grid.size() >= 2, "continuation needs at least two λ values");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] != 0.0 && (grid[i] < 0) == (grid[0] < 0), "λ grid must avoid 0 and keep one sign");
    if (i > 0) require(std::abs(grid[i]) < std::abs(grid[i - 1]), "λ grid must have decreasing |λ|");
  }
  const std::size_t n = field.dim();
  std::vector<EquilibriumBranch> branches;
  std::vector<std::size_t> active;

  for (std::size_t step = 0; step < grid.size(); ++step) {
    const double lam = grid[step];
    std::mt19937_64 rng(splitmix(opt.seed * 0x100000001b3ULL + step));
    std::vector<std::vector<double>> seeds;
    std::vector<Active> preds;
    for (auto b : active) {
      double stride = 0.0;
      auto p = predict(branches[b].points, lam, opt.zero_tol, stride);
      preds.push_back({b, p, 10.0 * stride + 1e-8 * (1.0 + max_abs(branches[b].points.back().x))});
      seeds.push_back(std::move(p));
    }
    const bool first = step == 0;
    const std::size_t count = first ? opt.initial_seeds : opt.seeds_per_step;
    const double radius = first ? opt.initial_radius : opt.radius_factor * std::sqrt(std::abs(lam));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    if (first) seeds.emplace_back(n, 0.0);
    for (std::size_t s = 0; s < count; ++s) {
      std::vector<double> v(n);
      for (auto& x : v) x = radius * unit(rng);
      seeds.push_back(std::move(v));
    }
    NewtonResult sols = newton_equilibria(field, lam, seeds, opt.newton);

    // Global greedy matching by distance.
    struct Cand {
      double dist;
      std::size_t pred;
      std::size_t sol;
    };
    std::vector<Cand> cands;
    for (std::size_t p = 0; p < preds.size(); ++p)
      for (std::size_t s = 0; s < sols.solutions.size(); ++s) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          d = std::max(d, std::abs(sols.solutions[s][i] - preds[p].prediction[i]));
        if (d <= preds[p].tolerance) cands.push_back({d, p, s});
      }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.dist < b.dist; });
    std::vector<char> pred_used(preds.size(), 0), sol_used(sols.solutions.size(), 0);
    for (const auto& c : cands) {
      if (pred_used[c.pred] || sol_used[c.sol]) continue;
      pred_used[c.pred] = sol_used[c.sol] = 1;
      branches[preds[c.pred].branch].points.push_back({lam, sols.solutions[c.sol]});
    }
    std::vector<std::size_t> next;
    for (std::size_t p = 0; p < preds.size(); ++p) {
      if (pred_used[p]) {
        next.push_back(preds[p].branch);
      } else {
        branches[preds[p].branch].warnings.push_back("branch lost at lambda = " + std::to_string(lam));
      }
    }
    for (std::size_t s = 0; s < sols.solutions.size(); ++s) {
      if (sol_used[s]) continue;
      EquilibriumBranch b;
      b.id = branches.size();
      b.points.push_back({lam, sols.solutions[s]});
      if (!first) b.warnings.push_back("branch first found at lambda = " + std::to_string(lam));
      next.push_back(b.id);
      branches.push_back(std::move(b));
    }
    active = std::move(next);
  }

  const std::size_t d = field.cell_dim();
  for (auto& b : branches) {
    const auto& last = b.points.back().x;
    std::vector<std::uint32_t> labels(field.cells());
    for (std::size_t q = 0; q < field.cells(); ++q) {
      labels[q] = static_cast<std::uint32_t>(q);
      for (std::size_t r = 0; r < q; ++r) {
        double diff = 0.0;
        for (std::size_t c = 0; c < d; ++c) diff = std::max(diff, std::abs(last[q * d + c] - last[r * d + c]));
        if (diff <= opt.fingerprint_tol) {
          labels[q] = labels[r];
          break;
        }
      }
    }
    b.fingerprint = Partition(labels);
    b.cells.assign(field.cells(), CellFit{});
    const double decades = std::log10(std::abs(b.points.front().lambda / b.points.back().lambda));
    for (std::size_t q = 0; q < field.cells(); ++q) {
      std::vector<std::pair<double, double>> pts;
      bool any_zero = false, all_zero = true;
      for (const auto& p : b.points) {
        double mag = 0.0;
        for (std::size_t c = 0; c < d; ++c) mag = std::max(mag, std::abs(p.x[q * d + c]));
        if (mag < opt.zero_tol) any_zero = true;
        else all_zero = false;
        pts.emplace_back(p.lambda, d == 1 ? p.x[q] : mag);
      }
      auto& cf = b.cells[q];
      cf.zero_locked = all_zero;
      if (!any_zero && pts.size() >= 8 && decades >= 2.0 - 1e-9) {
        cf.fit = fit_exponent(pts);
        cf.fitted = true;
      }
    }
  }
  return branches;
}

// ---------------------------------------------------------------------------
// Hopf sweep

HopfPoint hopf_point(const VectorField& base, double lambda, std::uint64_t seed,
                     const HopfOptions& opt) {
  require(base.preset() == Preset::kHopf, "Hopf sweep needs the ff-hopf preset");
  require(lambda > 0.0, "Hopf sweep needs λ > 0");
  const VectorField field = opt.frame == Frame::kRotating ? base.rotating_frame() : base;
  const double t_trans = std::min(opt.transient_factor / lambda, opt.transient_cap);
  const double window = opt.window > 0 ? opt.window : std::max(200.0, t_trans / 10.0);
  std::mt19937_64 rng(splitmix(seed));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> x(field.dim());
  const double scale = std::sqrt(lambda);
  for (auto& v : x) v = scale * unit(rng);

  HopfPoint pt;
  pt.lambda = lambda;
  const Rhs rhs = autonomous(field, lambda);
  auto r = dopri5(rhs, x, 0.0, t_trans, opt.ode);
  pt.status = r.status;
  if (r.status != OdeStatus::kOk) return pt;

  const std::size_t cells = field.cells();
  auto average = [&](double t0, double t1, std::vector<double>& avg) {
    avg.assign(cells, 0.0);
    std::vector<double> prev(cells);
    for (std::size_t q = 0; q < cells; ++q) prev[q] = std::hypot(x[2 * q], x[2 * q + 1]);
    double tp = t0;
    auto res = dopri5(rhs, x, t0, t1, opt.ode, [&](double t, const std::vector<double>& s) {
      for (std::size_t q = 0; q < cells; ++q) {
        const double m = std::hypot(s[2 * q], s[2 * q + 1]);
        avg[q] += 0.5 * (m + prev[q]) * (t - tp);
        prev[q] = m;
      }
      tp = t;
    });
    for (auto& a : avg) a /= (t1 - t0);
    return res.status;
  };
  std::vector<double> first, second;
  pt.status = average(t_trans, t_trans + window, first);
  if (pt.status != OdeStatus::kOk) return pt;
  pt.status = average(t_trans + window, t_trans + 2 * window, second);
  if (pt.status != OdeStatus::kOk) return pt;
  pt.amplitude = second;
  pt.converged = true;
  for (std::size_t q = 0; q < cells; ++q)
    if (std::abs(first[q] - second[q]) > opt.convergence_tol * second[q] + 1e-9) pt.converged = false;
  return pt;
}

namespace {

HopfReport run_hopf(std::size_t n, std::size_t k, const std::vector<double>& grid,
                    const HopfOptions& opt, bool parallel) {
  const NetworkSpec net = make_ring_ff(n, k);
  const Monoid m = monoid_closure(net);
  const VectorField field = VectorField::from_preset(net, m, Preset::kHopf);
  HopfReport rep;
  rep.n = n;
  rep.k = k;
  rep.points.resize(grid.size());
  std::vector<std::string> errors(grid.size());
  const long count = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < count; ++i) {
    try {
      rep.points[static_cast<std::size_t>(i)] =
          hopf_point(field, grid[static_cast<std::size_t>(i)], opt.seed + static_cast<std::uint64_t>(i), opt);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorKind::kInvalidInput, e);

  for (const auto& p : rep.points)
    if (!p.converged) ++rep.flagged;
  for (std::size_t q = 0; q < net.cell_count(); ++q) {
    bool locked = true;
    for (const auto& p : rep.points)
      if (p.converged && p.amplitude[q] > opt.locked_tol) locked = false;
    if (locked) rep.locked_cells.push_back(static_cast<CellIndex>(q));
  }
  double target = 0.5;
  for (std::size_t i = 1; i <= k; ++i, target /= 3.0) {
    const CellIndex cell = static_cast<CellIndex>(k - i);
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : rep.points)
      if (p.converged && p.amplitude[cell] > 0.0) pts.emplace_back(p.lambda, p.amplitude[cell]);
    if (pts.size() < 8) continue;
    rep.fits.push_back({cell, target, fit_exponent(pts)});
  }
  return rep;
}

}  // namespace

HopfReport hopf_amplitude_sweep(std::size_t n, std::size_t k, const std::vector<double>& grid,
                                const HopfOptions& opt) {
  return run_hopf(n, k, grid, opt, true);
}

HopfReport hopf_amplitude_sweep_serial(std::size_t n, std::size_t k,
                                       const std::vector<double>& grid, const HopfOptions& opt) {
  return run_hopf(n, k, grid, opt, false);
}

}  // namespace cellnet::dyn
