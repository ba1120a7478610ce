#pragma once

#include <array>

#include "eqlab/fields.hpp"

namespace eqlab {

/// Intensity below which a point is treated as critical (grad U ~ 0).
inline constexpr double kCriticalIntensity = 1e-10;

/// Pointwise geometry of the level set through one point.
///
/// Orientation: n = -grad U / E. Exterior potentials decrease outward, so n is
/// the outward normal of the enclosed body and the sphere of radius R about a
/// monopole has H = -1/R, K = 1/R^2. The same formula applied to a cavity
/// Green's function points away from the charge; the sign of H flips with a
/// convention change, but H^2 - K and the surface integrals do not.
struct SurfaceFrame {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  double intensity = 0.0;            // E = |grad U|
  Mat3 weingarten = Mat3::Zero();    // P Hess P / E, n in its kernel; dn = -W dr
  double mean_curvature = 0.0;       // H = tr W / 2
  double gauss_curvature = 0.0;      // K = (tr(W)^2 - tr(W^2)) / 2
  double umbilic_deviation = 0.0;    // H^2 - K, evaluated as |W - H P|_F^2 / 2
  Vec3 grad_log_intensity = Vec3::Zero();  // full grad log E
  Vec3 dlogE = Vec3::Zero();         // tangential part D log E
  double fieldline_curvature = 0.0;  // k = |D log E|
};

/// Builds the frame from a jet. Throws CriticalPoint when |grad U| <= eps.
SurfaceFrame frame(const FieldJet& jet, const Vec3& position,
                   double critical_intensity = kCriticalIntensity);

/// Delta log E from value-level data only: harmonicity removes the third
/// derivatives, Delta log E = (|Hess|_F^2 - 2 |Hess grad U|^2 / E^2) / E^2.
double laplacian_logE(const FieldJet& jet, double critical_intensity = kCriticalIntensity);

/// |n . grad log E - 2H|.
double normal_logE_identity(const SurfaceFrame& frame, const FieldJet& jet);

/// Principal curvatures: eigenvalues of W restricted to the tangent plane,
/// ascending.
std::array<double, 2> principal_curvatures(const SurfaceFrame& frame);

/// Orthonormal tangent basis (t1, t2) with t1 x t2 = n.
std::array<Vec3, 2> tangent_basis(const Vec3& normal);

/// Strict convexity under the sign convention above: H < 0 and K > 0.
inline bool is_convex(const SurfaceFrame& f) {
  return f.mean_curvature < 0.0 && f.gauss_curvature > 0.0;
}

}  // namespace eqlab
