#pragma once

// Network vector fields built from a monoid and a response function,
// integration, equilibrium continuation in lambda, and branch-scaling fits.
//
// Cell q sees the inputs (x_{σ_1(q)}, ..., x_{σ_n(q)}) with σ_1..σ_n the
// monoid elements in canonical order (σ_1 = identity), and evolves by
//   dx_q/dt = f(x_{σ_1(q)}, ..., x_{σ_n(q)}, λ).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cellnet/exprlang.hpp"
#include "cellnet/linalg.hpp"
#include "cellnet/netcore.hpp"
#include "cellnet/quotient.hpp"

namespace cellnet::dyn {

/// Steady-state preset: linearization λI - M with M the first-generator
/// adjacency, quadratic self term.
inline constexpr const char* kSteadyPreset = "lambda*x1 - x2 + x1^2";

enum class Preset { kNone, kSteady, kHopf };
const char* to_string(Preset p);
/// "ff-steady" | "ff-hopf"; throws invalid-input otherwise.
Preset parse_preset(const std::string& name);

class VectorField {
 public:
  /// Real cells driven by an expression of arity <= |Σ|.
  static VectorField from_expression(const NetworkSpec& net, const Monoid& m, const expr::Expr& f);
  /// ff-steady uses the expression above; ff-hopf uses cells in R^2 with
  ///   f(u, v; λ) = (λ + i)u - |u|^2 u - v,  u = x1, v = x2.
  static VectorField from_preset(const NetworkSpec& net, const Monoid& m, Preset p);

  std::size_t cells() const noexcept { return cells_; }
  std::size_t cell_dim() const noexcept { return cell_dim_; }
  std::size_t dim() const noexcept { return cells_ * cell_dim_; }
  Preset preset() const noexcept { return preset_; }
  /// wiring()[q][j] = σ_{j+1}(q).
  const std::vector<std::vector<std::uint32_t>>& wiring() const noexcept { return wiring_; }
  const std::optional<expr::Expr>& response() const noexcept { return response_; }

  void eval(const double* x, double lambda, double* out) const;
  std::vector<double> operator()(const std::vector<double>& x, double lambda) const;
  /// Exact Jacobian: symbolic partials for expression fields, closed form
  /// for the Hopf preset.
  DMatrix jacobian(const std::vector<double>& x, double lambda) const;

  /// Adds -i·z to every complex cell: the Hopf preset seen in a frame
  /// rotating at unit speed. The preset is S^1-equivariant, so moduli are
  /// unchanged. Throws for real-cell fields.
  VectorField rotating_frame() const;

 private:
  std::size_t cells_ = 0;
  std::size_t cell_dim_ = 1;
  Preset preset_ = Preset::kNone;
  bool rotating_ = false;
  std::vector<std::vector<std::uint32_t>> wiring_;
  std::optional<expr::Expr> response_;
  expr::Compiled f_;
  std::vector<expr::Compiled> df_;  // df_[j] = ∂f/∂x_{j+1}
};

// ---------------------------------------------------------------------------
// Integration

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h0 = 0.0;  // 0 = automatic
  double hmax = 0.0;  // 0 = unbounded
  std::size_t max_steps = 50'000'000;
  double blowup = 1e6;
};

enum class OdeStatus { kOk, kDiverged, kStepUnderflow, kMaxSteps };
const char* to_string(OdeStatus s);

using Rhs = std::function<void(double t, const double* x, double* dx)>;
/// Called after every accepted step with the new time and state.
using Observer = std::function<void(double t, const std::vector<double>& x)>;

struct OdeResult {
  OdeStatus status = OdeStatus::kOk;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double t = 0.0;
};

/// Dormand–Prince 5(4) with PI-free standard step control.
OdeResult dopri5(const Rhs& f, std::vector<double>& x, double t0, double t1,
                 const OdeOptions& opt = {}, const Observer& obs = {});
/// Classical fixed-step RK4; the last step is shortened to land on t1.
OdeResult rk4(const Rhs& f, std::vector<double>& x, double t0, double t1, double h,
              const OdeOptions& opt = {}, const Observer& obs = {});

Rhs autonomous(const VectorField& field, double lambda);

struct DefectResult {
  double defect = 0.0;
  OdeStatus status = OdeStatus::kOk;
  std::size_t steps = 0;
};

/// Integrates from x0 (which must lie in the synchrony space of p) to T and
/// returns the largest within-class spread over all accepted steps.
DefectResult flow_invariance_defect(const VectorField& field, const Partition& p,
                                    const std::vector<double>& x0, double T, double lambda,
                                    const OdeOptions& opt = {});

/// -x1^3 plus seeded random linear, quadratic and small cubic terms in
/// x1..x_arity (text form, parsed by the caller).
std::string random_cubic_response(std::size_t arity, std::uint64_t seed);

/// A random point constant on the classes of p (cell_dim 1), in [-1, 1].
std::vector<double> random_synchronous_point(const Partition& p, std::uint64_t seed);

struct DefectCase {
  std::string response;
  Partition partition;
  std::vector<double> x0;
};

/// Defect for every case; the parallel version runs cases concurrently and
/// must agree bitwise with the serial reference.
std::vector<DefectResult> defect_suite(const NetworkSpec& net, const Monoid& m,
                                       const std::vector<DefectCase>& cases, double T,
                                       double lambda);
std::vector<DefectResult> defect_suite_serial(const NetworkSpec& net, const Monoid& m,
                                              const std::vector<DefectCase>& cases, double T,
                                              double lambda);

// ---------------------------------------------------------------------------
// Equilibria

struct NewtonOptions {
  int max_iter = 50;
  double ftol = 1e-12;
  double dedupe_tol = 1e-8;
};

struct NewtonResult {
  std::vector<std::vector<double>> solutions;
  std::vector<std::string> notes;  // one per dropped seed
};

/// Damped Newton from every seed, then deduplication in seed order.
NewtonResult newton_equilibria(const VectorField& field, double lambda,
                               const std::vector<std::vector<double>>& seeds,
                               const NewtonOptions& opt = {});
NewtonResult newton_equilibria_serial(const VectorField& field, double lambda,
                                      const std::vector<std::vector<double>>& seeds,
                                      const NewtonOptions& opt = {});

struct ExponentFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log|value| at log|λ| = 0
  double residual = 0.0;   // RMS
};

/// Least squares of log|value| on log|λ|. Needs >= 8 points, nonzero values
/// and a common sign of λ.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& points);

struct BranchPoint {
  double lambda = 0.0;
  std::vector<double> x;
};

struct CellFit {
  bool zero_locked = false;
  bool fitted = false;
  ExponentFit fit;
};

struct EquilibriumBranch {
  std::size_t id = 0;
  std::vector<BranchPoint> points;
  Partition fingerprint;  // cells grouped by value at the last point, tol 1e-7
  std::vector<CellFit> cells;
  std::vector<std::string> warnings;

  bool trivial() const;
  double max_abs_at_end() const;
};

struct ContinuationOptions {
  std::uint64_t seed = 0;
  std::size_t seeds_per_step = 32;
  double radius_factor = 3.0;  // random seeds within radius_factor·|λ|^{1/2}
  std::size_t initial_seeds = 256;
  double initial_radius = 1.0;
  double zero_tol = 1e-10;
  double fingerprint_tol = 1e-7;
  NewtonOptions newton;
};

/// Sweeps the grid in the given order (|λ| decreasing, one sign). Branches are
/// linked across steps by nearest neighbour to a log-log secant prediction,
/// accepting distances up to 10x the predicted step.
std::vector<EquilibriumBranch> continue_branches(const VectorField& field,
                                                 const std::vector<double>& lambda_grid,
                                                 const ContinuationOptions& opt = {});

/// from, to, points; log spacing when log_scale (from/to same sign, nonzero).
std::vector<double> lambda_grid(double from, double to, std::size_t points, bool log_scale = true);

// ---------------------------------------------------------------------------
// Hopf amplitudes

enum class Frame { kLab, kRotating };

struct HopfOptions {
  std::uint64_t seed = 0;
  Frame frame = Frame::kRotating;
  double transient_factor = 50.0;  // T_trans = factor/λ, capped
  double transient_cap = 1e5;
  double window = 0.0;             // 0: T_trans/10, at least 200
  double convergence_tol = 1e-3;   // relative change between two windows
  double locked_tol = 1e-6;
  OdeOptions ode;
};

struct HopfPoint {
  double lambda = 0.0;
  std::vector<double> amplitude;  // time-averaged modulus per cell
  bool converged = false;
  OdeStatus status = OdeStatus::kOk;
};

struct HopfCellFit {
  CellIndex cell = 0;
  double target = 0.0;
  ExponentFit fit;
};

struct HopfReport {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<HopfPoint> points;
  std::vector<CellIndex> locked_cells;
  std::vector<HopfCellFit> fits;  // c_{k-1}, c_{k-2}, ... with targets 1/(2·3^{i-1})
  std::size_t flagged = 0;
};

HopfPoint hopf_point(const VectorField& field, double lambda, std::uint64_t seed,
                     const HopfOptions& opt);
HopfReport hopf_amplitude_sweep(std::size_t n, std::size_t k, const std::vector<double>& grid,
                                const HopfOptions& opt = {});
HopfReport hopf_amplitude_sweep_serial(std::size_t n, std::size_t k,
                                       const std::vector<double>& grid,
                                       const HopfOptions& opt = {});

}  // namespace cellnet::dyn
