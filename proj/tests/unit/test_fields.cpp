#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "eqlab/error.hpp"
#include "eqlab/field_io.hpp"
#include "eqlab/fields.hpp"

using namespace eqlab;
constexpr double kPi = std::numbers::pi;

namespace {

/// Central differences of the value (gradient) and of the gradient (Hessian).
void expect_jet_matches_fd(const Field& f, const Vec3& r, double rel) {
  const FieldJet j = eval_jet(f, r);
  const double h = 1e-5 * r.norm();
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    const double g = (f.value(r + e) - f.value(r - e)) / (2 * h);
    EXPECT_NEAR(j.gradient[a], g, rel * j.gradient.norm()) << "component " << a;
    const Vec3 hg = (eval_jet(f, r + e).gradient - eval_jet(f, r - e).gradient) / (2 * h);
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(j.hessian(b, a), hg[b], rel * j.hessian.norm());
  }
  EXPECT_NEAR(eval_jet(f, r).value, f.value(r), 1e-15 * std::abs(f.value(r)) + 1e-300);
}

/// Real spherical harmonic without the Condon-Shortley phase, built on
/// std::assoc_legendre (which omits the phase).
double real_ylm(int l, int m, double theta, double phi) {
  const int am = std::abs(m);
  double fact = 1.0;
  for (int k = l - am + 1; k <= l + am; ++k) fact *= k;
  const double n = std::sqrt((2 * l + 1) / (4 * kPi) / fact);
  const double p = std::assoc_legendre(l, am, std::cos(theta));
  if (m == 0) return n * p;
  return std::sqrt(2.0) * n * p * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

}  // namespace

TEST(Monopole, ClosedFormJet) {
  const Field f = ChargeEnsemble({{Vec3::Zero(), 1.0}});
  const Vec3 r(0.3, -1.2, 0.7);
  const double R = r.norm();
  const FieldJet j = eval_jet(f, r);
  EXPECT_NEAR(j.value, 1.0 / (4 * kPi * R), 1e-16);
  const Vec3 g = -r / (4 * kPi * R * R * R);
  EXPECT_NEAR((j.gradient - g).norm(), 0.0, 1e-16);
  const Mat3 H = (3 * r * r.transpose() / (R * R) - Mat3::Identity()) / (4 * kPi * R * R * R);
  EXPECT_NEAR((j.hessian - H).norm(), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(total_flux(f), 1.0);
}

TEST(Monopole, SingularPointThrows) {
  const Field f = ChargeEnsemble({{Vec3(1, 0, 0), 1.0}});
  EXPECT_THROW(eval_jet(f, Vec3(1, 0, 0)), SingularPoint);
  EXPECT_NEAR(f.distance_to_singularity(Vec3(1, 2, 0)), 2.0, 1e-15);
}

TEST(Ensemble, JetMatchesFiniteDifferences) {
  const Field f = ChargeEnsemble({{Vec3(0.1, 0, 0), 1.0}, {Vec3(0, -0.2, 0.3), -0.4}}, 0.05);
  expect_jet_matches_fd(f, Vec3(1.1, 0.4, -0.8), 1e-8);
  EXPECT_NEAR(total_flux(f), 0.6, 1e-15);
}

TEST(Dipole, ClosedFormValueAndFlux) {
  const AxialDipoleField d(1.5, 0.2);
  const Field f = d;
  const double R = 1.7, th = 0.9, ph = 0.4;
  const Vec3 r = R * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
  EXPECT_NEAR(f.value(r), 1.5 / R + 0.2 * std::cos(th) / (R * R), 1e-15);
  EXPECT_NEAR(total_flux(f), 4 * kPi * 1.5, 1e-13);
  expect_jet_matches_fd(f, r, 1e-8);
  EXPECT_NEAR(eval_jet(f, r).hessian.trace(), 0.0, 1e-14);
}

TEST(Dipole, RadiusIsALevelPoint) {
  const AxialDipoleField d(1.0, 0.2);
  for (double th : {0.1, 1.0, 2.0, 3.0}) {
    const double rho = d.radius(0.05, th);
    EXPECT_NEAR(d.value(rho * Vec3(std::sin(th), 0, std::cos(th))), 0.05, 1e-15);
  }
}

TEST(Dipole, RejectsNonPositiveMonopole) { EXPECT_THROW(AxialDipoleField(0.0, 0.1), ConfigError); }

TEST(Multipole, MatchesAssocLegendreOracle) {
  MultipoleField m(4);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int l = 0; l <= 4; ++l)
    for (int k = -l; k <= l; ++k) m.set_coefficient(l, k, u(rng));
  for (double th : {0.3, 1.1, 2.4})
    for (double ph : {0.2, 2.9, 5.0}) {
      const double R = 1.3;
      double ref = 0.0;
      for (int l = 0; l <= 4; ++l)
        for (int k = -l; k <= l; ++k)
          ref += std::sqrt(4 * kPi / (2 * l + 1)) * m.coefficient(l, k) * real_ylm(l, k, th, ph) /
                 std::pow(R, l + 1);
      const Vec3 r = R * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      EXPECT_NEAR(m.value(r), ref, 1e-13) << "theta " << th << " phi " << ph;
    }
}

TEST(Multipole, ReducesToDipole) {
  MultipoleField m(1);
  m.set_coefficient(0, 0, 1.0);
  m.set_coefficient(1, 0, 0.1);
  const AxialDipoleField d(1.0, 0.1);
  const Vec3 r(0.4, -0.7, 1.1);
  const FieldJet a = m.jet(r), b = d.jet(r);
  EXPECT_NEAR(a.value, b.value, 1e-15);
  EXPECT_NEAR((a.gradient - b.gradient).norm(), 0.0, 1e-15);
  EXPECT_NEAR((a.hessian - b.hessian).norm(), 0.0, 1e-14);
}

TEST(Multipole, HarmonicAndFiniteDifferenceJet) {
  MultipoleField m(6);
  for (int l = 0; l <= 6; ++l)
    for (int k = -l; k <= l; ++k) m.set_coefficient(l, k, 1.0 / (1 + l + std::abs(k)));
  const Field f = m;
  const Vec3 r(0.9, 0.5, -0.6);
  EXPECT_NEAR(eval_jet(f, r).hessian.trace(), 0.0, 1e-12 * eval_jet(f, r).hessian.norm());
  expect_jet_matches_fd(f, r, 1e-7);
}

TEST(Multipole, DegreeCapAndIndices) {
  EXPECT_THROW(MultipoleField(MultipoleField::kMaxDegree + 1), NotImplemented);
  MultipoleField m(2);
  EXPECT_THROW(m.set_coefficient(3, 0, 1.0), NotImplemented);
  EXPECT_THROW(m.set_coefficient(2, 3, 1.0), ConfigError);
}

TEST(CavityGreen, VanishesOnTheSphere) {
  const Vec3 c(0, 0, 0.3);
  const Field g = make_cavity_green(c, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double th = kPi * (k + 0.5) / 50, ph = 0.37 * k;
    const Vec3 x = c + Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
    EXPECT_NEAR(g.value(x), 0.0, 1e-15);
  }
  EXPECT_NEAR(g.value(Vec3(0, 0, 0.01)) - 1 / (4 * kPi * 0.01), 0.0, 0.1);
}

TEST(CavityGreen, CenteredIsConstantOffset) {
  const ChargeEnsemble e = make_cavity_green(Vec3::Zero(), 2.0);
  ASSERT_EQ(e.charges().size(), 1u);
  EXPECT_NEAR(e.offset(), -1 / (8 * kPi), 1e-16);
  EXPECT_NEAR(e.value(Vec3(0, 2, 0)), 0.0, 1e-16);
}

TEST(CavityGreen, OriginMustBeInside) {
  EXPECT_THROW(make_cavity_green(Vec3(0, 0, 1.0), 1.0), GeometryError);
  EXPECT_THROW(make_cavity_green(Vec3::Zero(), -1.0), GeometryError);
}

TEST(FieldIo, RoundTrip) {
  for (const char* text : {
           R"({"type":"ensemble","charges":[{"position":[0,0,0],"strength":1.0}],"offset":0.1})",
           R"({"type":"dipole","c00":1.0,"c10":0.2})",
           R"({"type":"multipole","degree":2,"coefficients":[{"l":0,"m":0,"c":1.0},{"l":2,"m":-1,"c":0.3}]})"}) {
    const Field f = field_from_json(nlohmann::json::parse(text));
    const Field g = field_from_json(field_to_json(f));
    EXPECT_EQ(field_to_json(f), field_to_json(g));
    const Vec3 r(0.7, 0.2, -1.0);
    EXPECT_EQ(f.value(r), g.value(r));
  }
}

TEST(FieldIo, CavityComesBackAsEnsemble) {
  const Field f = field_from_json(nlohmann::json::parse(R"({"type":"cavity_green","center":[0,0,0.3],"radius":1})"));
  const auto j = field_to_json(f);
  EXPECT_EQ(j["type"], "ensemble");
  EXPECT_EQ(field_from_json(j).value(Vec3(0.1, 0.2, 0.3)), f.value(Vec3(0.1, 0.2, 0.3)));
}

TEST(FieldIo, ErrorsNameTheKey) {
  try {
    field_from_json(nlohmann::json::parse(R"({"type":"dipole","c00":1.0})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("c10"), std::string::npos);
  }
  EXPECT_THROW(field_from_json(nlohmann::json::parse(R"({"type":"quadrupole"})")), ConfigError);
  EXPECT_THROW(field_from_json(nlohmann::json::parse(R"({"charges":[]})")), ConfigError);
}

TEST(Fields, ConcurrentEvaluationIsPure) {
  MultipoleField m(4);
  m.set_coefficient(0, 0, 1.0);
  m.set_coefficient(3, -2, 0.3);
  const Field f = m;
  const Vec3 r(0.3, 0.8, -0.5);
  const double ref = f.value(r);
  std::vector<double> out(8);
  std::vector<std::thread> pool;
  for (int t = 0; t < 8; ++t) pool.emplace_back([&, t] { for (int i = 0; i < 200; ++i) out[t] = f.value(r); });
  for (auto& t : pool) t.join();
  for (double v : out) EXPECT_EQ(v, ref);
}
