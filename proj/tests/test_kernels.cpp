#include <doctest.h>

#include <cmath>
#include <random>

#include "lukcon/errors.hpp"
#include "lukcon/kernels.hpp"

using namespace lukcon;

TEST_CASE("linear kernel at a single point") {
  KernelSpec k;  // linear, c = 1
  const GramMatrix g = gram(k, {{0.4, 0.3}});
  CHECK(std::abs(g.K(0, 0) - 1.25) <= 1e-12);
  CHECK(psd_check(g) == Definiteness::positive_definite);
}

TEST_CASE("kernel formulas") {
  const std::vector<double> x{1.0, 0.5}, y{0.4, 0.3};
  KernelSpec poly{KernelKind::polynomial, 1.0, 2, 1.0};
  CHECK(poly(x, y) == doctest::Approx(std::pow(0.4 + 0.15 + 1.0, 2)));
  KernelSpec rbf{KernelKind::rbf, 0.0, 1, 0.5};
  CHECK(rbf(x, y) == doctest::Approx(std::exp(-(0.36 + 0.04) / (2 * 0.25))));
  CHECK(rbf(x, x) == 1.0);
  KernelSpec lin0{KernelKind::linear, 0.0, 1, 1.0};
  CHECK(lin0(x, y) == doctest::Approx(0.55));
}

TEST_CASE("validation and dimension errors") {
  CHECK_THROWS_AS((KernelSpec{KernelKind::polynomial, 1.0, 0, 1.0}.validate()), InputError);
  CHECK_THROWS_AS((KernelSpec{KernelKind::rbf, 0.0, 1, 0.0}.validate()), InputError);
  CHECK_THROWS_AS(gram(KernelSpec{}, {}), InputError);
  CHECK_THROWS_AS(gram(KernelSpec{}, {{1.0}, {1.0, 2.0}}), InputError);
  CHECK(parse_kernel_kind("rbf") == KernelKind::rbf);
  CHECK_THROWS_AS(parse_kernel_kind("sigmoid"), InputError);
}

TEST_CASE("definiteness classes") {
  // Two identical points make a rank-one linear Gram matrix.
  KernelSpec k;
  CHECK(psd_check(gram(k, {{0.4, 0.3}, {0.4, 0.3}})) == Definiteness::positive_semidefinite);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK(psd_check(bad) == Definiteness::invalid);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0, 1, 1;
  CHECK_THROWS_AS(psd_check(asym), InputError);
}

TEST_CASE("property: rbf Gram matrices of distinct points are positive-definite") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 0; n < 50; ++n) {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({unit(rng), unit(rng)});
    KernelSpec k{KernelKind::rbf, 0.0, 1, 0.3 + unit(rng)};
    const GramMatrix g = gram(k, pts);
    CHECK(g.symmetric);
    CHECK((g.K - g.K.transpose()).isZero(0.0));
    CHECK(g.min_eigenvalue > 0.0);
    CHECK(psd_check(g, 1e-12) == Definiteness::positive_definite);
  }
}
