#include "eqlab/fields.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "eqlab/dual.hpp"
#include "eqlab/error.hpp"

namespace eqlab {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

inline double reciprocal(double v) { return 1.0 / v; }

[[noreturn]] void throw_singular(const Vec3& r, const Vec3& source) {
  std::ostringstream os;
  os << "evaluation point (" << r.transpose() << ") coincides with source ("
     << source.transpose() << ")";
  throw SingularPoint(os.str());
}

}  // namespace

// ---------------------------------------------------------------------------
// ChargeEnsemble

ChargeEnsemble::ChargeEnsemble(std::vector<PointCharge> charges, double offset)
    : charges_(std::move(charges)), offset_(offset) {}

FieldJet ChargeEnsemble::jet(const Vec3& r) const {
  FieldJet out;
  out.value = offset_;
  for (const auto& c : charges_) {
    const Vec3 d = r - c.position;
    const double dist = d.norm();
    if (dist <= kSingularDistance) throw_singular(r, c.position);
    const double k = c.strength / kFourPi;
    const double inv = 1.0 / dist;
    const double inv3 = inv * inv * inv;
    out.value += k * inv;
    out.gradient -= (k * inv3) * d;
    out.hessian += k * (3.0 * inv3 * inv * inv * (d * d.transpose()) - inv3 * Mat3::Identity());
  }
  return out;
}

double ChargeEnsemble::value(const Vec3& r) const {
  double v = offset_;
  for (const auto& c : charges_) {
    const double dist = (r - c.position).norm();
    if (dist <= kSingularDistance) throw_singular(r, c.position);
    v += c.strength / (kFourPi * dist);
  }
  return v;
}

double ChargeEnsemble::total_charge() const {
  double q = 0.0;
  for (const auto& c : charges_) q += c.strength;
  return q;
}

// ---------------------------------------------------------------------------
// AxialDipoleField

AxialDipoleField::AxialDipoleField(double c00, double c10) : c00_(c00), c10_(c10) {
  if (!(c00 > 0.0)) throw ConfigError("dipole field requires c00 > 0");
}

FieldJet AxialDipoleField::jet(const Vec3& r) const {
  const double rn = r.norm();
  if (rn <= kSingularDistance) throw_singular(r, Vec3::Zero());
  const double inv = 1.0 / rn;
  const double inv2 = inv * inv;
  const double inv3 = inv2 * inv;
  const double inv5 = inv3 * inv2;
  const double inv7 = inv5 * inv2;
  const double z = r.z();
  const Vec3 ez = Vec3::UnitZ();
  const Mat3 rr = r * r.transpose();

  FieldJet out;
  out.value = c00_ * inv + c10_ * z * inv3;
  out.gradient = -c00_ * inv3 * r + c10_ * (inv3 * ez - 3.0 * z * inv5 * r);
  out.hessian = c00_ * (3.0 * inv5 * rr - inv3 * Mat3::Identity()) +
                c10_ * (-3.0 * inv5 * (ez * r.transpose() + r * ez.transpose()) -
                        3.0 * z * inv5 * Mat3::Identity() + 15.0 * z * inv7 * rr);
  return out;
}

double AxialDipoleField::value(const Vec3& r) const {
  const double rn = r.norm();
  if (rn <= kSingularDistance) throw_singular(r, Vec3::Zero());
  return c00_ / rn + c10_ * r.z() / (rn * rn * rn);
}

double AxialDipoleField::radius(double level, double theta) const {
  const double disc = c00_ * c00_ + 4.0 * c10_ * level * std::cos(theta);
  if (!(level > 0.0) || disc < 0.0) {
    throw GeometryError("dipole level has no real radius at this angle");
  }
  return (c00_ + std::sqrt(disc)) / (2.0 * level);
}

// ---------------------------------------------------------------------------
// MultipoleField

MultipoleField::MultipoleField(int degree) : degree_(degree) {
  if (degree < 0) throw ConfigError("multipole degree must be non-negative");
  if (degree > kMaxDegree) {
    throw NotImplemented("multipole degree " + std::to_string(degree) +
                         " exceeds the supported cap " + std::to_string(kMaxDegree));
  }
  coeffs_.assign(static_cast<std::size_t>((degree + 1) * (degree + 1)), 0.0);
}

double MultipoleField::coefficient(int l, int m) const {
  if (l < 0 || l > degree_ || std::abs(m) > l) return 0.0;
  return coeffs_[static_cast<std::size_t>(index(l, m))];
}

void MultipoleField::set_coefficient(int l, int m, double c) {
  if (l > degree_) {
    throw NotImplemented("coefficient (" + std::to_string(l) + "," + std::to_string(m) +
                         ") beyond field degree " + std::to_string(degree_));
  }
  if (l < 0 || std::abs(m) > l) throw ConfigError("invalid multipole index");
  coeffs_[static_cast<std::size_t>(index(l, m))] = c;
}

template <class T>
T MultipoleField::evaluate(const T& x, const T& y, const T& z) const {
  using std::sqrt;
  const int L = degree_;
  const T r2 = x * x + y * y + z * z;
  const T inv_r2 = reciprocal(r2);
  const T inv_r = sqrt(inv_r2);

  // Re/Im of (x + i y)^m.
  std::vector<T> cm(static_cast<std::size_t>(L + 1)), sm(static_cast<std::size_t>(L + 1));
  cm[0] = T(1.0);
  sm[0] = T(0.0);
  for (int m = 0; m < L; ++m) {
    cm[m + 1] = x * cm[m] - y * sm[m];
    sm[m + 1] = x * sm[m] + y * cm[m];
  }

  // poly[l] = sum_m sqrt(4pi/(2l+1)) c_lm r^l Y_lm, a homogeneous polynomial.
  std::vector<T> poly(static_cast<std::size_t>(L + 1), T(0.0));
  double double_factorial = 1.0;  // (2m-1)!!
  for (int m = 0; m <= L; ++m) {
    if (m > 0) double_factorial *= (2.0 * m - 1.0);
    T q_prev2(0.0);
    T q_prev(double_factorial);
    for (int l = m; l <= L; ++l) {
      T q;
      if (l == m) {
        q = q_prev;
      } else if (l == m + 1) {
        q = (2.0 * m + 1.0) * z * q_prev;
      } else {
        q = ((2.0 * l - 1.0) * z * q_prev - (double(l + m) - 1.0) * r2 * q_prev2) *
            (1.0 / double(l - m));
      }
      if (l > m) {
        q_prev2 = q_prev;
        q_prev = q;
      }
      // sqrt((l-m)!/(l+m)!)
      double ratio = 1.0;
      for (int k = l - m + 1; k <= l + m; ++k) ratio /= double(k);
      const double norm = std::sqrt(ratio) * (m > 0 ? std::sqrt(2.0) : 1.0);
      const double cc = coefficient(l, m);
      const double cs = m > 0 ? coefficient(l, -m) : 0.0;
      if (cc == 0.0 && cs == 0.0) continue;
      T angular = cc * cm[m];
      if (cs != 0.0) angular += cs * sm[m];
      poly[l] += norm * (q * angular);
    }
  }

  T result(0.0);
  T inv_pow = inv_r;  // 1/r^(2l+1)
  for (int l = 0; l <= L; ++l) {
    result += poly[l] * inv_pow;
    inv_pow *= inv_r2;
  }
  return result;
}

FieldJet MultipoleField::jet(const Vec3& r) const {
  if (r.norm() <= kSingularDistance) throw_singular(r, Vec3::Zero());
  using D = Dual2<3>;
  const D u = evaluate(D::variable(0, r.x()), D::variable(1, r.y()), D::variable(2, r.z()));
  FieldJet out;
  out.value = u.value();
  out.gradient = u.gradient();
  out.hessian = 0.5 * (u.hessian() + u.hessian().transpose());
  return out;
}

double MultipoleField::value(const Vec3& r) const {
  if (r.norm() <= kSingularDistance) throw_singular(r, Vec3::Zero());
  return evaluate(r.x(), r.y(), r.z());
}

// ---------------------------------------------------------------------------
// Field

std::string Field::kind() const {
  return std::visit(
      [](const auto& m) -> std::string {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ChargeEnsemble>) return "ensemble";
        else if constexpr (std::is_same_v<M, AxialDipoleField>) return "dipole";
        else return "multipole";
      },
      model_);
}

std::vector<Vec3> Field::singular_points() const {
  if (const auto* e = std::get_if<ChargeEnsemble>(&model_)) {
    std::vector<Vec3> pts;
    pts.reserve(e->charges().size());
    for (const auto& c : e->charges()) pts.push_back(c.position);
    return pts;
  }
  return {Vec3::Zero()};
}

double Field::distance_to_singularity(const Vec3& r) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : singular_points()) best = std::min(best, (r - p).norm());
  return best;
}

double Field::value(const Vec3& r) const {
  return std::visit([&](const auto& m) { return m.value(r); }, model_);
}

FieldJet eval_jet(const Field& field, const Vec3& r) {
  return std::visit([&](const auto& m) { return m.jet(r); }, field.model());
}

double total_flux(const Field& field) {
  return std::visit(
      [](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ChargeEnsemble>) return m.total_charge();
        else if constexpr (std::is_same_v<M, AxialDipoleField>) return kFourPi * m.c00();
        else return kFourPi * m.coefficient(0, 0);
      },
      field.model());
}

ChargeEnsemble make_cavity_green(const Vec3& center, double radius) {
  const double c = center.norm();
  if (!(radius > 0.0) || !(c < radius)) {
    std::ostringstream os;
    os << "cavity Green's function needs the origin strictly inside the sphere: |c| = " << c
       << ", a = " << radius;
    throw GeometryError(os.str());
  }
  if (c <= 1e-14 * radius) {
    return ChargeEnsemble({{Vec3::Zero(), 1.0}}, -1.0 / (kFourPi * radius));
  }
  const double a2 = radius * radius;
  const Vec3 image = center * (1.0 - a2 / (c * c));
  return ChargeEnsemble({{Vec3::Zero(), 1.0}, {image, -radius / c}});
}

}  // namespace eqlab
