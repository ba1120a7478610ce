#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace eqlab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Distance below which a query point is treated as coinciding with a source.
inline constexpr double kSingularDistance = 1e-12;

/// Value, gradient and Hessian of a potential at one point.
struct FieldJet {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

struct PointCharge {
  Vec3 position;
  double strength;
};

/// Superposition of point sources, U(r) = offset + sum_i q_i / (4 pi |r - p_i|).
///
/// The 1/(4 pi) is kept here so that a unit charge carries unit flux; the
/// constant offset only exists so that the centred cavity Green's function can
/// vanish on its boundary while remaining a single charge.
class ChargeEnsemble {
 public:
  ChargeEnsemble() = default;
  explicit ChargeEnsemble(std::vector<PointCharge> charges, double offset = 0.0);

  const std::vector<PointCharge>& charges() const { return charges_; }
  double offset() const { return offset_; }

  FieldJet jet(const Vec3& r) const;
  double value(const Vec3& r) const;
  double total_charge() const;

 private:
  std::vector<PointCharge> charges_;
  double offset_ = 0.0;
};

/// U = c00/|r| + c10 cos(theta)/|r|^2, axis along +z. No 1/(4 pi): the flux of
/// this model is 4 pi c00.
class AxialDipoleField {
 public:
  AxialDipoleField(double c00, double c10);

  double c00() const { return c00_; }
  double c10() const { return c10_; }

  FieldJet jet(const Vec3& r) const;
  double value(const Vec3& r) const;

  /// Closed-form radius of the level U along polar angle theta.
  double radius(double level, double theta) const;

 private:
  double c00_;
  double c10_;
};

/// Exterior multipole expansion
///   U = sum_{l,m} sqrt(4 pi / (2l+1)) c_lm Y_lm(theta, phi) / |r|^(l+1)
/// with real spherical harmonics and no Condon-Shortley phase:
///   Y_l0 = N_l0 P_l(cos theta),
///   Y_lm = sqrt(2) N_lm P_l^m(cos theta) cos(m phi)     (m > 0),
///   Y_lm = sqrt(2) N_l|m| P_l^|m|(cos theta) sin(|m| phi) (m < 0),
/// N_lm = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!), P_l^m = (1-x^2)^(m/2) d^m P_l/dx^m.
/// With this normalization the l = 0 and (1,0) terms are c00/|r| and
/// c10 cos(theta)/|r|^2, matching AxialDipoleField.
///
/// Derivatives come from second-order forward-mode dual numbers applied to the
/// Cartesian (solid harmonic) form, which is regular everywhere off the origin.
class MultipoleField {
 public:
  static constexpr int kMaxDegree = 8;

  /// Zero coefficients up to degree `degree`.
  explicit MultipoleField(int degree);

  int degree() const { return degree_; }
  double coefficient(int l, int m) const;
  void set_coefficient(int l, int m, double c);

  FieldJet jet(const Vec3& r) const;
  double value(const Vec3& r) const;

 private:
  static int index(int l, int m) { return l * l + l + m; }
  template <class T>
  T evaluate(const T& x, const T& y, const T& z) const;

  int degree_;
  std::vector<double> coeffs_;
};

/// Closed-form harmonic potential models. Immutable after construction and
/// safe to evaluate concurrently.
class Field {
 public:
  using Model = std::variant<ChargeEnsemble, AxialDipoleField, MultipoleField>;

  Field(ChargeEnsemble m) : model_(std::move(m)) {}  // NOLINT
  Field(AxialDipoleField m) : model_(std::move(m)) {}  // NOLINT
  Field(MultipoleField m) : model_(std::move(m)) {}  // NOLINT

  const Model& model() const { return model_; }
  std::string kind() const;

  /// Points where the model is singular (charge positions or the origin).
  std::vector<Vec3> singular_points() const;
  double distance_to_singularity(const Vec3& r) const;

  double value(const Vec3& r) const;

 private:
  Model model_;
};

/// Value/gradient/Hessian at r. Throws SingularPoint within kSingularDistance
/// of a source.
FieldJet eval_jet(const Field& field, const Vec3& r);

/// Exact flux -oint n.grad U dS through any surface enclosing all sources.
double total_flux(const Field& field);

/// Green's function of the ball |r - center| < radius with the unit charge at
/// the origin: the charge plus its Kelvin image. For center = 0 the image
/// degenerates into the constant -1/(4 pi radius), stored as the offset.
/// Throws GeometryError unless |center| < radius.
ChargeEnsemble make_cavity_green(const Vec3& center, double radius);

}  // namespace eqlab
