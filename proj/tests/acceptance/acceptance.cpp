// Acceptance suite: one section per acceptance criterion, each printing
// PASS/FAIL lines with the measured values. Exit status is nonzero if any
// criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "eqlab/functionals.hpp"
#include "eqlab/identities.hpp"
#include "eqlab/levelset.hpp"
#include "eqlab/mfs.hpp"
#include "eqlab/planar.hpp"

using namespace eqlab;

namespace {

constexpr double kPi = std::numbers::pi;
int g_failures = 0;
int g_checks = 0;

void check(bool ok, const char* what, double value, const char* rel, double limit) {
  ++g_checks;
  if (!ok) ++g_failures;
  std::printf("    [%s] %s = %.6e %s %.6e\n", ok ? "PASS" : "FAIL", what, value, rel, limit);
}
void leq(const char* what, double v, double limit) { check(std::isfinite(v) && v <= limit, what, v, "<=", limit); }
void geq(const char* what, double v, double limit) { check(std::isfinite(v) && v >= limit, what, v, ">=", limit); }
void gt(const char* what, double v, double limit) { check(std::isfinite(v) && v > limit, what, v, ">", limit); }
void lt(const char* what, double v, double limit) { check(std::isfinite(v) && v < limit, what, v, "<", limit); }
void truth(const char* what, bool ok) {
  ++g_checks;
  if (!ok) ++g_failures;
  std::printf("    [%s] %s\n", ok ? "PASS" : "FAIL", what);
}

void section(int n, const char* title, const std::function<void()>& body) {
  const int before = g_failures;
  std::printf("Criterion %d: %s\n", n, title);
  try {
    body();
  } catch (const std::exception& e) {
    ++g_failures;
    std::printf("    [FAIL] exception: %s\n", e.what());
  }
  std::printf("  => criterion %d %s\n\n", n, g_failures == before ? "PASS" : "FAIL");
}

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(lo * std::pow(hi / lo, double(k) / (n - 1)));
  return v;
}

GridSpec grid(int nt, int np, double r_min, double r_max, Vec3 center = Vec3::Zero()) {
  GridSpec g;
  g.n_theta = nt;
  g.n_phi = np;
  g.r_min = r_min;
  g.r_max = r_max;
  g.center = center;
  return g;
}

GridSpec refined(const GridSpec& g) {
  GridSpec r = g;
  r.n_theta = (3 * g.n_theta + 1) / 2;
  r.n_phi = 2 * ((3 * g.n_phi + 3) / 4);
  return r;
}

double max_abs(const SweepReport& s, double LevelReport::*member) {
  double m = 0;
  for (const auto& r : s.reports) m = std::max(m, std::abs(r.*member));
  return m;
}

// Shared sweeps (items 1-5 and their conservation plumbing, item 9).
const Field kMonopole = ChargeEnsemble({{Vec3::Zero(), 1.0}});
const Field kDipole = AxialDipoleField(1.0, 0.2);
const Field kCavity = make_cavity_green(Vec3(0, 0, 0.3), 1.0);
const Field kCavityCentered = make_cavity_green(Vec3::Zero(), 1.0);
const GridSpec kMonoGrid = grid(24, 48, 0.01, 1e3);
const GridSpec kDipoleGrid = grid(32, 64, 0.5, 1e4);
const GridSpec kCavityGrid = grid(32, 64, 1e-3, 0.69);
const GridSpec kCenteredGrid = grid(24, 48, 1e-3, 0.99);

struct Sweeps {
  SweepReport mono, dipole, dipole_refined, cavity, cavity_refined, centered;
};

Sweeps run_sweeps() {
  Sweeps s;
  s.mono = sweep(kMonopole, geometric(0.02, 0.2, 5), kMonoGrid);
  s.dipole = sweep(kDipole, geometric(0.02, 0.2, 8), kDipoleGrid);
  s.dipole_refined = sweep(kDipole, geometric(0.02, 0.2, 8), refined(kDipoleGrid));
  s.cavity = sweep(kCavity, geometric(0.06, 1.0, 6), kCavityGrid);
  s.cavity_refined = sweep(kCavity, geometric(0.06, 1.0, 6), refined(kCavityGrid));
  s.centered = sweep(kCavityCentered, geometric(0.06, 1.0, 6), kCenteredGrid);
  return s;
}

}  // namespace

int main() {
  std::printf("eqlab acceptance suite (unit-flux convention: a +1 point charge carries flux 1)\n\n");
  const Sweeps S = run_sweeps();

  section(1, "sphere rigidity (monopole, 5 levels)", [&] {
    leq("max |F|", max_abs(S.mono, &LevelReport::F_value), 1e-10);
    leq("max |W|", max_abs(S.mono, &LevelReport::W_value), 1e-10);
    leq("flux spread", S.mono.flux_spread, 1e-10);
    leq("max |oint K dS - 4 pi|", S.mono.gauss_bonnet_deviation, 1e-10);
  });

  section(2, "exterior sign (dipole c10 = 0.2, 8 levels in [0.02, 0.2])", [&] {
    truth("all 8 levels convex", S.dipole.convex && S.dipole.levels.size() == 8);
    double min_F = INFINITY, min_ratio = INFINITY;
    for (std::size_t k = 0; k < S.dipole.levels.size(); ++k) {
      const double F = S.dipole.reports[k].F_value;
      const double noise = std::abs(F - S.dipole_refined.reports[k].F_value);
      min_F = std::min(min_F, F);
      min_ratio = std::min(min_ratio, noise > 0 ? F / noise : INFINITY);
    }
    gt("min F", min_F, 0.0);
    geq("min F / quadrature noise (1.5x refinement)", std::isfinite(min_ratio) ? min_ratio : 1e300, 10.0);
  });

  section(3, "interior sign (off-centre cavity a = 1, |c| = 0.3, 6 levels)", [&] {
    truth("all 6 levels convex", S.cavity.convex && S.cavity.levels.size() == 6);
    double max_F = -INFINITY, min_ratio = INFINITY;
    for (std::size_t k = 0; k < S.cavity.levels.size(); ++k) {
      const double F = S.cavity.reports[k].F_value;
      const double noise = std::abs(F - S.cavity_refined.reports[k].F_value);
      max_F = std::max(max_F, F);
      min_ratio = std::min(min_ratio, noise > 0 ? -F / noise : INFINITY);
    }
    lt("max F", max_F, 0.0);
    geq("min |F| / quadrature noise", std::isfinite(min_ratio) ? min_ratio : 1e300, 10.0);
    leq("centred cavity max |F|", max_abs(S.centered, &LevelReport::F_value), 1e-10);
  });

  section(4, "monotonicity (dipole and cavity sweeps)", [&] {
    double min_inc = INFINITY;
    for (std::size_t k = 1; k < S.dipole.reports.size(); ++k)
      min_inc = std::min(min_inc, S.dipole.reports[k].W_value - S.dipole.reports[k - 1].W_value);
    geq("dipole min W increment", min_inc, -1e-9);
    min_inc = INFINITY;
    double max_beta = -INFINITY;
    for (std::size_t k = 0; k < S.cavity.reports.size(); ++k) {
      if (k > 0) min_inc = std::min(min_inc, S.cavity.reports[k].W_value - S.cavity.reports[k - 1].W_value);
      max_beta = std::max(max_beta, S.cavity.reports[k].beta_integral);
    }
    geq("cavity min W increment", min_inc, -1e-9);
    leq("cavity max beta integral", max_beta, 0.0);
  });

  section(5, "derivative formula dW/dphi = -(3/2) beta (dipole, interior levels)", [&] {
    double worst = 0;
    for (std::size_t k = 1; k + 1 < S.dipole.levels.size(); ++k)
      worst = std::max(worst, std::abs(S.dipole.dW_fd[k] - S.dipole.rhs_W1F1[k]) / std::abs(S.dipole.rhs_W1F1[k]));
    leq("max relative error", worst, 0.01);
  });

  section(6, "asymptotic slope of W (dipole c10 = 0.1, phi in [0.005, 0.2])", [&] {
    const auto s = sweep(AxialDipoleField(1.0, 0.1), geometric(0.005, 0.2, 10), kDipoleGrid);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(s.levels.size());
    for (std::size_t k = 0; k < s.levels.size(); ++k) {
      const double x = std::log(s.levels[k]), y = std::log(s.reports[k].W_value);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    leq("|slope - 2|", std::abs(slope - 2.0), 0.1);
    std::printf("    slope = %.6f\n", slope);
  });

  section(7, "dipole expansions at U = 0.01 (c00 = 1, c10 = 0.1)", [&] {
    const double U = 0.01, c00 = 1.0, c10 = 0.1;
    const AxialDipoleField d(c00, c10);
    double worst_k = 0, worst_E = 0;
    for (double th : {kPi / 4, kPi / 2, 3 * kPi / 4}) {
      const double rho = d.radius(U, th);
      const Vec3 r = rho * Vec3(std::sin(th), 0, std::cos(th));
      const FieldJet j = d.jet(r);
      const SurfaceFrame f = frame(j, r);
      const Vec3 e_phi(0, 1, 0);
      const Vec3 t_theta = f.normal.cross(e_phi).normalized();
      const double k_theta = std::abs(t_theta.dot(f.weingarten * t_theta));
      const double k_phi = std::abs(e_phi.dot(f.weingarten * e_phi));
      const double c2 = std::cos(2 * th);
      const double k_theta_ref = U / c00 + c10 * c10 * (1 - 9 * c2) * std::pow(U, 3) / (4 * std::pow(c00, 5));
      const double k_phi_ref = U / c00 - c10 * c10 * (5 + 3 * c2) * std::pow(U, 3) / (4 * std::pow(c00, 5));
      const double E_ref = U * U / c00 - c10 * c10 * (3 * c2 + 1) * std::pow(U, 4) / (4 * std::pow(c00, 5));
      worst_k = std::max({worst_k, std::abs(k_theta - k_theta_ref) / k_theta_ref,
                          std::abs(k_phi - k_phi_ref) / k_phi_ref});
      worst_E = std::max(worst_E, std::abs(f.intensity - E_ref) / E_ref);
      if (th == kPi / 4) {
        const double dl = f.dlogE.squaredNorm();
        const double ref = 9 * std::pow(c10, 4) * std::pow(std::sin(th) * std::cos(th), 2) * std::pow(U, 6) /
                           std::pow(c00, 10);
        leq("|n x grad log E|^2 relative error at theta = pi/4", std::abs(dl - ref) / ref, 0.10);
      }
    }
    leq("max principal-curvature relative error", worst_k, 5 * U * U);
    leq("max E relative error", worst_E, 5 * U * U);
  });

  section(8, "identity suite (10^3 random points per field)", [&] {
    MultipoleField m(4);
    m.set_coefficient(0, 0, 1.0);
    m.set_coefficient(1, 0, 0.1);
    m.set_coefficient(1, -1, 0.05);
    m.set_coefficient(2, 0, 0.05);
    m.set_coefficient(2, 2, 0.03);
    m.set_coefficient(3, 1, 0.02);
    m.set_coefficient(4, -3, 0.01);
    m.set_coefficient(4, 0, 0.01);
    struct Case {
      const char* name;
      Field field;
      double r_in, r_out, level;
      GridSpec grid;
    };
    const std::vector<Case> cases = {
        {"monopole", kMonopole, 1.0, 3.0, 0.05, grid(16, 32, 0.01, 1e3)},
        {"dipole", kDipole, 1.0, 3.0, 0.05, grid(24, 48, 0.5, 1e4)},
        {"off-centre cavity", kCavity, 0.1, 0.6, 0.3, grid(24, 48, 1e-3, 0.69)},
        {"multipole L=4", Field(m), 1.0, 3.0, 0.05, grid(24, 48, 0.5, 1e4)},
    };
    for (const auto& c : cases) {
      std::printf("  field: %s\n", c.name);
      const auto pts = sample_shell_points(1, 1000, Vec3::Zero(), c.r_in, c.r_out);
      const PointSuite ps = point_identity_suite(c.field, pts);
      leq("n . grad log E - 2H (closed form)", ps.normal_logE.max, 1e-10);
      leq("Delta log E + 2K (closed form)", ps.laplacian_logE.max, 1e-10);
      leq("|grad log E|^2 split (closed form)", ps.grad_split.max, 1e-10);
      leq("Delta n (finite differences)", ps.laplacian_normal.max, 1e-4);
      leq("Delta (n/E) (finite differences)", ps.laplacian_normal_over_E.max, 1e-4);
      const GridSuite gs = grid_identity_suite(c.field, sample_surface(c.field, c.level, c.grid));
      leq("Weatherburn Delta_S n (surface derivatives)", gs.weatherburn.max, 1e-4);
      leq("mean-curvature evolution (flow differences)", gs.mean_curvature_evolution.max, 1e-4);
    }
  });

  section(9, "conservation plumbing across the sweeps of items 1-5", [&] {
    const std::vector<std::pair<const char*, const SweepReport*>> all = {
        {"monopole", &S.mono},           {"dipole", &S.dipole},   {"dipole refined", &S.dipole_refined},
        {"cavity", &S.cavity},           {"cavity refined", &S.cavity_refined},
        {"centred cavity", &S.centered}};
    double flux = 0, gb = 0;
    for (const auto& [name, s] : all) {
      flux = std::max(flux, s->flux_spread);
      gb = std::max(gb, s->gauss_bonnet_deviation);
    }
    leq("max flux spread", flux, 1e-7);
    leq("max |oint K dS - 4 pi|", gb, 1e-7);
  });

  section(10, "MFS ellipsoid (1, 0.8, 0.7) and sphere", [&] {
    FitOptions o;
    o.check_points = 10000;
    o.seed = 2024;
    o.enforce_residual = false;
    const auto shape = ConvexShape::ellipsoid(Vec3(1.0, 0.8, 0.7));
    const auto fit = solve_exterior(shape, 1.0, o);
    leq("residual_max on 10^4 fresh check points", fit.report.residual_max, 1e-6);
    std::vector<double> levels;
    for (double f : geometric(0.1, 0.6, 6)) levels.push_back(f * fit.report.boundary_value);
    const auto s = sweep(fit.ensemble, levels, grid(32, 64, shape.max_semi_axis(), 1e4));
    truth("6 levels convex", s.convex);
    double min_F = INFINITY, min_inc = INFINITY;
    for (std::size_t k = 0; k < s.reports.size(); ++k) {
      min_F = std::min(min_F, s.reports[k].F_value);
      if (k > 0) min_inc = std::min(min_inc, s.reports[k].W_value - s.reports[k - 1].W_value);
    }
    geq("min F", min_F, -1e-8);
    geq("min W increment", min_inc, -1e-9);

    const auto sphere = solve_exterior(ConvexShape::ellipsoid(Vec3(1, 1, 1)), 1.0, o);
    const auto levels_s = geometric(0.1, 0.6, 5);
    std::vector<double> lv;
    for (double f : levels_s) lv.push_back(f * sphere.report.boundary_value);
    const auto a = sweep(sphere.ensemble, lv, grid(24, 48, 1.0, 1e4));
    const auto b = sweep(kMonopole, lv, grid(24, 48, 0.01, 1e4));
    double dF = 0, dW = 0, dflux = 0, dgb = 0;
    for (std::size_t k = 0; k < lv.size(); ++k) {
      dF = std::max(dF, std::abs(a.reports[k].F_value - b.reports[k].F_value));
      dW = std::max(dW, std::abs(a.reports[k].W_value - b.reports[k].W_value));
      dflux = std::max(dflux, std::abs(a.reports[k].flux - b.reports[k].flux));
      dgb = std::max(dgb, std::abs(a.reports[k].gauss_bonnet - b.reports[k].gauss_bonnet));
    }
    leq("sphere fit vs monopole: max |dF|", dF, 1e-10);
    leq("sphere fit vs monopole: max |dW|", dW, 1e-10);
    leq("sphere fit vs monopole: max |d flux|", dflux, 1e-10);
    leq("sphere fit vs monopole: max |d oint K|", dgb, 1e-10);
  });

  section(11, "2D ellipse exterior (8 levels, n = 512)", [&] {
    const PlanarField f(EllipseExterior{1.0, 0.3, 2 * kPi});
    std::vector<double> levels;
    for (int k = 0; k < 8; ++k) levels.push_back(-1.1 + 0.15 * k);
    CurveSpec cs;
    cs.n_nodes = 512;
    const auto s = planar_sweep(f, levels, cs);
    truth("all levels convex", s.convex);
    leq("conserved-integral relative spread", s.conserved_spread, 1e-6);
    leq("variance identity max relative error", s.max_variance_rel_error, 1e-6);
    double max_gp = -INFINITY;
    for (const auto& r : s.levels) max_gp = std::max(max_gp, r.grad_product.value);
    lt("max grad-product integral (non-circular levels: strictly negative)", max_gp, 0.0);
    const PlanarField circle(LogMonopole{});
    const auto c = planar_sweep(circle, {-1.0, -0.5, 0.0, 0.5}, cs);
    leq("circle levels: max |grad-product| (equality case)", std::abs(c.max_grad_product), 1e-12);
  });

  section(12, "Gauss-Maxwell flow", [&] {
    const GridSpec g = grid(16, 32, 0.01, 1e3);
    const auto mono = sample_surface(kMonopole, 0.1, g);
    double radial = 0;
    for (const auto& n : mono.nodes) {
      const Vec3 end = flow_endpoint(kMonopole, n.position, 0.05, 64);
      const Vec3 exact = n.position.normalized() / (4 * kPi * 0.05);
      radial = std::max(radial, (end - exact).norm() / exact.norm());
    }
    leq("monopole radial trace: max relative error", radial, 1e-10);
    const auto dip = sample_surface(kDipole, 0.05, grid(16, 32, 0.5, 1e4));
    double trip = 0;
    for (const auto& n : dip.nodes) {
      const Vec3 there = flow_endpoint(kDipole, n.position, 0.15, 64);
      const Vec3 back = flow_endpoint(kDipole, there, 0.05, 64);
      trip = std::max(trip, (back - n.position).norm() / n.position.norm());
    }
    leq("dipole round trip: max relative error", trip, 1e-8);
    const GridSuite gs = grid_identity_suite(kDipole, sample_surface(kDipole, 0.1, grid(24, 48, 0.5, 1e4)));
    leq("d log sqrt(g) / dphi = 2H/E: max relative residual", gs.area_evolution.max, 1e-4);
  });

  std::printf("%d checks, %d failed\n", g_checks, g_failures);
  std::printf("ACCEPTANCE %s\n", g_failures == 0 ? "PASS" : "FAIL");
  return g_failures == 0 ? 0 : 1;
}
