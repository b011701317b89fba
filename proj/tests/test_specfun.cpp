#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "vstates/parallel.hpp"
#include "vstates/specfun.hpp"

namespace vs = vstates;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Gamma, KnownValues) {
  EXPECT_NEAR(vs::gamma(0.5), std::sqrt(std::numbers::pi), 1e-14);
  EXPECT_DOUBLE_EQ(vs::gamma(1.0), 1.0);
  EXPECT_NEAR(vs::gamma(5.0), 24.0, 1e-12);
  // mpmath, 40 digits
  EXPECT_LT(rel(vs::gamma(0.1), 9.5135076986687312858), 1e-14);
  EXPECT_LT(rel(vs::gamma(17.3), 48647628546156.965347), 1e-13);
}

TEST(Gamma, Recurrence) {
  for (double x = 0.01; x < 20.0; x += 0.0731) EXPECT_LT(rel(vs::gamma(x + 1.0), x * vs::gamma(x)), 1e-12) << x;
}

TEST(Gamma, NegativeNonIntegerArguments) {
  EXPECT_LT(rel(vs::gamma(-0.5), -2.0 * std::sqrt(std::numbers::pi)), 1e-13);
  EXPECT_LT(rel(vs::gamma(-2.5), vs::gamma(-1.5) / -2.5), 1e-13);
}

TEST(Gamma, PolesThrow) {
  EXPECT_THROW(vs::gamma(0.0), vs::DomainError);
  EXPECT_THROW(vs::gamma(-3.0), vs::DomainError);
}

TEST(LogGamma, MatchesGamma) {
  for (double x : {0.3, 1.7, 9.2, 40.5}) EXPECT_NEAR(vs::log_gamma(x), std::log(vs::gamma(x)), 1e-12 * (1 + std::abs(std::log(vs::gamma(x)))));
}

TEST(Pochhammer, Basics) {
  EXPECT_DOUBLE_EQ(vs::pochhammer(2.0, 3), 24.0);
  EXPECT_DOUBLE_EQ(vs::pochhammer(0.37, 0), 1.0);
  EXPECT_DOUBLE_EQ(vs::pochhammer(-4.2, 0), 1.0);
  EXPECT_LT(rel(vs::pochhammer(0.25, 4), vs::gamma(4.25) / vs::gamma(0.25)), 1e-13);
  EXPECT_LT(rel(vs::pochhammer(0.25, 4), 2.28515625), 1e-15);
  for (int n = 0; n < 12; ++n) EXPECT_LT(rel(vs::pochhammer(1.3, n + 1), (1.3 + n) * vs::pochhammer(1.3, n)), 1e-15);
}

TEST(Hyp2f1, OriginAndGaussValue) {
  EXPECT_DOUBLE_EQ(vs::hyp2f1(0.3, 1.7, 2.2, 0.0), 1.0);
  const double gauss = vs::gamma(2.0) * vs::gamma(1.25) / (vs::gamma(1.75) * vs::gamma(1.5));
  EXPECT_LT(rel(vs::hyp2f1(0.25, 0.5, 2.0, 1.0), gauss), 1e-13);
  EXPECT_LT(rel(vs::hyp2f1(0.25, 0.5, 2.0, 1.0), 1.1128357888987642484), 1e-13);
}

TEST(Hyp2f1, FrozenReferenceValues) {
  struct Case {
    double a, b, c, z, ref;
  };
  // mpmath, 40 digits
  const std::vector<Case> cases = {
      {0.25, 1.25, 2, 0.3, 1.0549945296558356054},    {0.25, 2.25, 3, 0.81, 1.3002513050367511441},
      {0.05, 4.05, 5, 0.9801, 1.1009105995157829876}, {0.45, 8.45, 9, 0.36, 1.2045902969424636832},
      {0.45, 1.45, 1, 0.9025, 5.617448276582511812},  {0.005, 1.005, 2, 0.999999, 1.0050666860624772364},
  };
  for (const auto& c : cases) EXPECT_LT(rel(vs::hyp2f1(c.a, c.b, c.c, c.z), c.ref), 1e-12) << c.a << " " << c.z;
}

TEST(Hyp2f1, AgreesWithDirectSeries) {
  // direct summation at moderate z
  for (double z : {0.1, 0.3, 0.45}) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 400; ++k) {
      term *= (0.25 + k) * (1.25 + k) / ((2.0 + k) * (k + 1.0)) * z;
      sum += term;
    }
    EXPECT_LT(rel(vs::hyp2f1(0.25, 1.25, 2.0, z), sum), 1e-13);
  }
}

TEST(Hyp2f1, Errors) {
  EXPECT_THROW(vs::hyp2f1(0.5, 0.5, -2.0, 0.3), vs::DomainError);
  EXPECT_THROW(vs::hyp2f1(0.5, 0.6, 1.0, 1.0), vs::DomainError);
  EXPECT_THROW(vs::hyp2f1(0.5, 0.6, 1.0, 1.5), vs::DomainError);
}

TEST(Hyp2f1, ContiguousRelations) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ab(0.0, 3.0), cc(0.5, 5.0), zz(0.0, 0.95);
  auto F = [](double a, double b, double c, double z) { return vs::hyp2f1(a, b, c, z); };
  for (int trial = 0; trial < 200; ++trial) {
    const double a = ab(rng), b = ab(rng), c = cc(rng), z = zz(rng);
    auto check = [&](std::vector<double> terms, const char* name) {
      double sum = 0.0, scale = 0.0;
      for (double t : terms) {
        sum += t;
        scale = std::max(scale, std::abs(t));
      }
      EXPECT_LT(std::abs(sum), 1e-10 * scale) << name << " a=" << a << " b=" << b << " c=" << c << " z=" << z;
    };
    check({c * (c + 1) * F(a, b, c, z), -c * (c + 1) * F(a, b, c + 1, z), -a * b * z * F(a + 1, b + 1, c + 2, z)},
          "shift c");
    check({c * F(a, b, c, z), -c * F(a + 1, b, c, z), b * z * F(a + 1, b + 1, c + 1, z)}, "shift a");
    check({c * F(a, b, c, z), -c * F(a, b + 1, c, z), a * z * F(a + 1, b + 1, c + 1, z)}, "shift b");
    check({c * F(a, b, c, z), -(c - b) * F(a, b, c + 1, z), -b * F(a, b + 1, c + 1, z)}, "shift b,c");
    check({c * F(a, b, c, z), -(c - a) * F(a, b, c + 1, z), -a * F(a + 1, b, c + 1, z)}, "shift a,c");
    check({b * F(a, b + 1, c, z), -a * F(a + 1, b, c, z), (a - b) * F(a, b, c, z)}, "a versus b");
    check({(b - a) * (1 - z) * F(a, b, c, z), -(c - a) * F(a - 1, b, c, z), (c - b) * F(a, b - 1, c, z)},
          "lower a,b");
  }
}

TEST(Hyp2f1, KummerQuadraticTransform) {
  for (double a : {0.2, 0.45, 1.3})
    for (double b : {0.35, 1.1, 2.5})
      for (double z = 0.0; z <= 0.9 + 1e-12; z += 0.05) {
        const double lhs = vs::hyp2f1(a, b, 2 * b, 4 * z / ((1 + z) * (1 + z)));
        const double rhs = std::pow(1 + z, 2 * a) * vs::hyp2f1(a, a + 0.5 - b, b + 0.5, z * z);
        EXPECT_LT(rel(lhs, rhs), 1e-10) << a << " " << b << " " << z;
      }
}

TEST(Bessel, SeriesValues) {
  EXPECT_DOUBLE_EQ(vs::bessel_j(1, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(vs::bessel_j(0, 0.0), 1.0);
  double s = 0.0, f = 1.0;
  // sum_k (-1)^k / (k! (2+k)!) 0.75^(2k+2); the tail after 12 terms is below 1e-25
  for (int k = 0; k < 12; ++k) {
    double fk = 1.0, f2k = 1.0;
    for (int j = 2; j <= k; ++j) fk *= j;
    for (int j = 2; j <= k + 2; ++j) f2k *= j;
    s += f / (fk * f2k) * std::pow(0.75, 2 * k + 2);
    f = -f;
  }
  EXPECT_NEAR(vs::bessel_j(2, 1.5), s, 1e-16);
  EXPECT_NEAR(vs::bessel_j(2, 1.5), 0.23208767214421472724, 1e-15);
  EXPECT_NEAR(vs::bessel_j(0, 7.9), 0.19436184484127823969, 1e-14);
  EXPECT_NEAR(vs::bessel_j(5, 30.0), -0.14324029551207707699, 1e-14);
}

TEST(Bessel, BranchesAgreeAtSwitch) {
  for (int n : {0, 1, 3, 7}) EXPECT_NEAR(vs::bessel_j_series(n, 8.0), vs::bessel_j(n, 8.0 + 1e-12), 1e-12);
}

TEST(Lambda, ClosedFormReferenceValues) {
  struct Case {
    int n;
    double b, alpha, ref;
  };
  const std::vector<Case> cases = {
      {2, 0.6, 0.5, 0.21254587063794180456}, {1, 0.2, 0.9, 0.51815198257700879563},
      {5, 0.9, 0.1, 0.078079326247973121534}, {8, 0.99, 0.5, 0.21828153956797859731},
      {3, 0.5, 0.5, 0.064900916998544542508},
  };
  for (const auto& c : cases) EXPECT_LT(rel(vs::lambda_n(c.n, c.b, c.alpha), c.ref), 1e-12) << c.n << " " << c.b;
}

TEST(Lambda, UnitRadiusGaussForm) {
  for (double a : {0.1, 0.5, 0.9}) {
    const double ref = vs::gamma(1 - a) * vs::gamma(1 + a / 2) /
                       (std::pow(2.0, 1 - a) * vs::gamma(1 - a / 2) * vs::gamma(1 - a / 2) * vs::gamma(2 - a / 2));
    EXPECT_LT(rel(vs::lambda_n(1, 1.0, a), ref), 1e-13);
  }
  // the hypergeometric branch meets b = 1 with a (1-b)^(1-alpha) cusp
  for (double a : {0.5, 0.9}) {
    const double d6 = vs::lambda_n(3, 1 - 1e-6, a) - vs::lambda_n(3, 1.0, a);
    const double d8 = vs::lambda_n(3, 1 - 1e-8, a) - vs::lambda_n(3, 1.0, a);
    EXPECT_LT(d8, 0.0);
    EXPECT_NEAR(d6 / d8, std::pow(100.0, 1 - a), 1e-2 * std::pow(100.0, 1 - a)) << a;
  }
  EXPECT_LT(rel(vs::lambda_n(1, 1.0, 0.5), 0.8231298900893584), 1e-14);
}

TEST(Lambda, EulerLimit) {
  EXPECT_NEAR(vs::lambda_n(3, 0.5, 1e-6), 0.25 / 6.0, 1e-4);
  for (int n = 1; n <= 6; ++n)
    for (double b : {0.2, 0.65})
      EXPECT_NEAR(vs::lambda_n(n, b, 1e-6), vs::lambda_limit_euler(n, b), 1e-4) << n << " " << b;
}

TEST(Lambda, SqgLimit) {
  for (int n = 1; n <= 6; ++n)
    for (double b : {0.2, 0.65})
      EXPECT_NEAR(vs::lambda_n(n, b, 1 - 1e-6), vs::lambda_limit_sqg(n, b), 1e-4) << n << " " << b;
}

TEST(Lambda, Monotonicity) {
  for (double a : {0.1, 0.5, 0.9})
    for (double b : {0.2, 0.5, 0.8, 0.99}) {
      for (int n = 1; n < 40; ++n) EXPECT_GT(vs::lambda_n(n, b, a), vs::lambda_n(n + 1, b, a));
      for (int n : {1, 2, 7}) EXPECT_LT(vs::lambda_n(n, b, a), vs::lambda_n(n, std::min(1.0, b + 0.005), a));
      EXPECT_GT(vs::lambda_n(40, b, a), 0.0);
    }
}

TEST(Lambda, GeometricDecay) {
  for (double a : {0.1, 0.5, 0.9})
    for (double b : {0.2, 0.8}) {
      double prev = 0.0;
      for (int n = 1; n <= 200; n += 10) {
        const double ratio = vs::lambda_n(n, b, a) / std::pow(b, n - 1);
        EXPECT_LT(ratio, 1.0);
        if (n > 1) EXPECT_LE(ratio, prev * (1 + 1e-12));
        prev = ratio;
      }
    }
}

TEST(Lambda, DomainErrors) {
  EXPECT_THROW(vs::lambda_n(0, 0.5, 0.5), vs::DomainError);
  EXPECT_THROW(vs::lambda_n(1, 0.0, 0.5), vs::DomainError);
  EXPECT_THROW(vs::lambda_n(1, 1.2, 0.5), vs::DomainError);
  EXPECT_THROW(vs::lambda_n(1, 0.5, 1.0), vs::DomainError);
  EXPECT_THROW(vs::lambda_n(1, 0.5, 0.0), vs::DomainError);
}

TEST(Theta, BasicProperties) {
  for (double a : {1e-3, 0.1, 0.5, 0.9}) {
    EXPECT_EQ(vs::theta_n(1, a), 0.0);
    for (int n = 1; n < 60; ++n) EXPECT_LT(vs::theta_n(n, a), vs::theta_n(n + 1, a));
    // Theta_n = Lambda_1(1) - Lambda_n(1), approached from below
    for (int n : {2, 5, 30}) EXPECT_NEAR(vs::theta_n(n, a), vs::lambda_n(1, 1.0, a) - vs::lambda_n(n, 1.0, a), 1e-13);
    EXPECT_LT(vs::theta_n(5000, a), vs::lambda_n(1, 1.0, a));
  }
  EXPECT_LT(std::abs(vs::theta_n(20000, 0.5) - vs::lambda_n(1, 1.0, 0.5)), 1e-2);
}

TEST(Theta, Limits) {
  for (int n = 1; n <= 10; ++n) {
    EXPECT_NEAR(vs::theta_n(n, 1e-6), vs::theta_limit_euler(n), 1e-4);
    EXPECT_NEAR(vs::theta_n(n, 1 - 1e-6), vs::theta_limit_sqg(n), 1e-4);
  }
}

TEST(Theta, KnownVelocities) {
  EXPECT_NEAR(vs::theta_n(10, 0.5), 0.559238, 1e-5);
  EXPECT_NEAR(vs::theta_n(2, 0.01), 0.249667, 1e-5);
}

TEST(QuadratureOracle, MatchesClosedFormOnGrid) {
  struct Case {
    int n;
    double b, a;
  };
  std::vector<Case> grid;
  for (int n = 1; n <= 8; ++n)
    for (double b : {0.1, 0.3, 0.6, 0.9})
      for (double a : {0.1, 0.5, 0.9}) grid.push_back({n, b, a});
  std::vector<double> err(grid.size());
  vs::parallel_for(int(grid.size()), [&](int i) {
    const auto& c = grid[i];
    err[i] = rel(vs::lambda_quadrature_oracle(c.n, c.b, c.a, vs::default_quadrature(c.n, c.b)),
                 vs::lambda_n(c.n, c.b, c.a));
  });
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_LT(err[i], 1e-6) << "n=" << grid[i].n << " b=" << grid[i].b << " alpha=" << grid[i].a;
}

TEST(QuadratureOracle, DecreasingInN) {
  const double v = vs::lambda_quadrature_oracle(5, 0.2, 0.9, vs::default_quadrature(5, 0.2));
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, vs::lambda_n(4, 0.2, 0.9));
}

TEST(QuadratureOracle, NearUnitRadius) {
  const double v = vs::lambda_quadrature_oracle(1, 0.99, 0.5, vs::default_quadrature(1, 0.99));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(rel(v, vs::lambda_n(1, 0.99, 0.5)), 1e-6);
}

TEST(QuadratureOracle, SqgEndpoint) {
  const double v = vs::lambda_quadrature_oracle(2, 0.5, 1.0, vs::default_quadrature(2, 0.5));
  EXPECT_LT(rel(v, vs::lambda_limit_sqg(2, 0.5)), 1e-6);
}

TEST(QuadratureOracle, RejectsBadSpec) {
  vs::QuadratureOptions s = vs::default_quadrature(1, 0.5);
  s.panels = 8;
  EXPECT_THROW(vs::lambda_quadrature_oracle(1, 0.5, 0.5, s), vs::DomainError);
  EXPECT_THROW(vs::lambda_quadrature_oracle(1, 1.0, 0.5, vs::default_quadrature(1, 0.5)), vs::DomainError);
}

TEST(AnnulusIntegrals, ClosedFormMatchesContourQuadrature) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ub(0.1, 0.8), ua(0.05, 0.95), uc(-2.0, 2.0);
  const vs::AnnulusKind kinds[] = {vs::AnnulusKind::I, vs::AnnulusKind::J, vs::AnnulusKind::K, vs::AnnulusKind::L,
                                   vs::AnnulusKind::M};
  for (int trial = 0; trial < 12; ++trial) {
    const double b = ub(rng), a = ua(rng), ca = uc(rng), cc = uc(rng);
    const int n = 1 + trial % 6;
    for (auto k : kinds) {
      const auto closed = vs::annulus_integral_closed(k, n, b, a, ca, cc);
      const auto quad = vs::annulus_integral_oracle(k, n, b, a, ca, cc, 4096);
      EXPECT_LT(std::abs(closed - quad), 1e-8 * std::max(std::abs(closed), 1e-3))
          << "kind=" << int(k) << " n=" << n << " b=" << b << " alpha=" << a;
    }
  }
  for (auto k : kinds)
    for (int n : {1, 2, 4}) {
      const auto closed = vs::annulus_integral_closed(k, n, 0.3, 0.5, 1.0, 0.5);
      const auto quad = vs::annulus_integral_oracle(k, n, 0.3, 0.5, 1.0, 0.5, 4096);
      EXPECT_LT(std::abs(closed - quad), 1e-8 * std::abs(closed)) << int(k) << " " << n;
    }
}

TEST(AnnulusIntegrals, SpecialCases) {
  const double b = 0.4, a = 0.6, h = 0.3;
  // kind I at n = 1
  EXPECT_LT(rel(vs::annulus_integral_closed(vs::AnnulusKind::I, 1, b, a, 0, 0).real(),
                b * h * vs::hyp2f1(h, 1 + h, 2, b * b)),
            1e-14);
  // kind M without the a-term
  for (int n : {1, 3}) {
    const double ref = 1.7 * std::pow(b, n) * vs::pochhammer(h, n) / vs::gamma(n + 1.0) *
                       vs::hyp2f1(h + 1, n + h, n + 1, b * b);
    EXPECT_LT(rel(vs::annulus_integral_closed(vs::AnnulusKind::M, n, b, a, 0.0, 1.7).real(), ref), 1e-13);
  }
  // kind J with a = c and n = 0 cancels
  EXPECT_NEAR(vs::annulus_integral_closed(vs::AnnulusKind::J, 0, b, a, 0.8, 0.8).real(), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(vs::annulus_integral_oracle(vs::AnnulusKind::J, 0, b, a, 0.8, 0.8, 4096)), 0.0, 1e-12);
  // kind K second bracket term alone
  const auto k2 = vs::annulus_integral_closed(vs::AnnulusKind::K, 2, b, a, 0.0, 1.0);
  EXPECT_LT(rel(k2.real(), -b * (1 + h) * vs::hyp2f1(h, 2 + h, 2, b * b)), 1e-14);
  EXPECT_LT(std::abs(k2 - vs::annulus_integral_oracle(vs::AnnulusKind::K, 2, b, a, 0.0, 1.0, 4096)), 1e-10);
  // kind I vanishes as b -> 0 for n >= 1
  for (int n : {1, 2, 5}) EXPECT_LT(std::abs(vs::annulus_integral_oracle(vs::AnnulusKind::I, n, 1e-6, a, 0, 0, 1024)), 1e-5);
  EXPECT_THROW(vs::annulus_integral_closed(vs::AnnulusKind::K, 0, b, a, 1, 1), vs::DomainError);
  EXPECT_THROW(vs::annulus_integral_oracle(vs::AnnulusKind::I, 1, b, a, 0, 0, 256), vs::DomainError);
}
