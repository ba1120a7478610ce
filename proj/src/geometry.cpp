#include "eqlab/geometry.hpp"

#include <cmath>
#include <sstream>

#include "eqlab/error.hpp"

namespace eqlab {

namespace {

[[noreturn]] void throw_critical(double e, double eps) {
  std::ostringstream os;
  os << "field intensity " << e << " is at or below the critical threshold " << eps;
  throw CriticalPoint(os.str());
}

}  // namespace

SurfaceFrame frame(const FieldJet& jet, const Vec3& position, double critical_intensity) {
  const double e = jet.gradient.norm();
  if (!(e > critical_intensity)) throw_critical(e, critical_intensity);

  SurfaceFrame f;
  f.position = position;
  f.intensity = e;
  f.normal = -jet.gradient / e;
  const Mat3 proj = Mat3::Identity() - f.normal * f.normal.transpose();
  Mat3 w = proj * jet.hessian * proj / e;
  f.weingarten = 0.5 * (w + w.transpose());

  const double tr = f.weingarten.trace();
  const double tr2 = (f.weingarten * f.weingarten).trace();
  f.mean_curvature = 0.5 * tr;
  f.gauss_curvature = 0.5 * (tr * tr - tr2);
  // H^2 - K is (k1 - k2)^2 / 4; the difference form cancels catastrophically on
  // nearly umbilic surfaces, the traceless part does not.
  const Mat3 traceless = f.weingarten - f.mean_curvature * proj;
  f.umbilic_deviation = 0.5 * traceless.squaredNorm();

  f.grad_log_intensity = jet.hessian * jet.gradient / (e * e);
  f.dlogE = proj * f.grad_log_intensity;
  f.fieldline_curvature = f.dlogE.norm();
  return f;
}

double laplacian_logE(const FieldJet& jet, double critical_intensity) {
  const double e = jet.gradient.norm();
  if (!(e > critical_intensity)) throw_critical(e, critical_intensity);
  const double e2 = e * e;
  const Vec3 hg = jet.hessian * jet.gradient;
  return (jet.hessian.squaredNorm() - 2.0 * hg.squaredNorm() / e2) / e2;
}

double normal_logE_identity(const SurfaceFrame& frame, const FieldJet& jet) {
  const double e = frame.intensity;
  const double lhs = frame.normal.dot(jet.hessian * jet.gradient) / (e * e);
  return std::abs(lhs - 2.0 * frame.mean_curvature);
}

std::array<Vec3, 2> tangent_basis(const Vec3& n) {
  // Pick the coordinate axis least aligned with n.
  Vec3 a = Vec3::UnitX();
  if (std::abs(n.y()) < std::abs(n.x()) && std::abs(n.y()) <= std::abs(n.z())) a = Vec3::UnitY();
  else if (std::abs(n.z()) < std::abs(n.x())) a = Vec3::UnitZ();
  Vec3 t1 = (a - a.dot(n) * n).normalized();
  Vec3 t2 = n.cross(t1);
  return {t1, t2};
}

std::array<double, 2> principal_curvatures(const SurfaceFrame& f) {
  const auto [t1, t2] = tangent_basis(f.normal);
  const double a = t1.dot(f.weingarten * t1);
  const double b = t1.dot(f.weingarten * t2);
  const double d = t2.dot(f.weingarten * t2);
  const double mean = 0.5 * (a + d);
  const double half_gap = std::hypot(0.5 * (a - d), b);
  return {mean - half_gap, mean + half_gap};
}

}  // namespace eqlab
