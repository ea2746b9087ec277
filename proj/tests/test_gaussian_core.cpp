#include <doctest.h>

#include <cmath>

#include "qflux/gaussian_core.hpp"
#include "qflux/rng.hpp"

using namespace qflux;

namespace {

// valid random CM: (1/2 + delta) I + W W^T is bona fide with margin delta
GaussianCM random_cm(int n_modes, GaussianRng& rng, double delta = 0.05) {
  RMat w(2 * n_modes, 2 * n_modes + 2);
  for (int i = 0; i < w.rows(); ++i)
    for (int j = 0; j < w.cols(); ++j) w(i, j) = 0.3 * rng.normal();
  RMat v = (0.5 + delta) * RMat::Identity(2 * n_modes, 2 * n_modes) + w * w.transpose();
  return GaussianCM::checked(n_modes, v);
}

GaussianCM thermal_cm(double nbar) {
  return GaussianCM::checked(1, (nbar + 0.5) * RMat::Identity(2, 2));
}

}  // namespace

TEST_CASE("tmsv covariance matrix") {
  GaussianCM vac = tmsv_cm(0.5);
  CHECK((vac.V - 0.5 * RMat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);

  GaussianCM one = tmsv_cm(1.0);
  CHECK(one.V(0, 2) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
  CHECK(one.V(1, 3) == doctest::Approx(-std::sqrt(3.0) / 2.0).epsilon(1e-14));

  auto nus = symplectic_eigenvalues(tmsv_cm(5.0));
  CHECK(nus.size() == 2);
  CHECK(nus[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(nus[1] == doctest::Approx(0.5).epsilon(1e-10));

  CHECK_THROWS_AS(tmsv_cm(0.3), std::invalid_argument);
}

TEST_CASE("symplectic eigenvalues") {
  auto vac = symplectic_eigenvalues(GaussianCM::checked(1, 0.5 * RMat::Identity(2, 2)));
  CHECK(vac[0] == doctest::Approx(0.5).epsilon(1e-13));

  auto th = symplectic_eigenvalues(thermal_cm(1.0));
  CHECK(th[0] == doctest::Approx(1.5).epsilon(1e-13));

  // one-mode marginal of a TMSV is thermal with variance mu
  GaussianCM marg = GaussianCM::checked(1, tmsv_cm(3.0).V.topLeftCorner(2, 2));
  CHECK(symplectic_eigenvalues(marg)[0] == doctest::Approx(3.0).epsilon(1e-12));

  RMat bad = RMat::Identity(4, 4);
  bad(0, 1) = 0.3;  // not symmetric
  CHECK_THROWS_AS(GaussianCM::checked(2, bad), std::invalid_argument);
}

TEST_CASE("gaussian entropy") {
  CHECK(gaussian_entropy(GaussianCM::checked(1, 0.5 * RMat::Identity(2, 2))) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gaussian_entropy(thermal_cm(1.0)) == doctest::Approx(2.0).epsilon(1e-12));  // h(1)

  GaussianCM marg = GaussianCM::checked(1, tmsv_cm(5.0).V.topLeftCorner(2, 2));
  CHECK(gaussian_entropy(marg) == doctest::Approx(bosonic_h(4.5)).epsilon(1e-12));

  // zero entropy iff pure
  GaussianRng rng(61);
  for (int t = 0; t < 5; ++t) {
    GaussianCM v = random_cm(2, rng);
    auto nus = symplectic_eigenvalues(v);
    double s = gaussian_entropy(v);
    CHECK(s >= 0.0);
    bool pure = *std::min_element(nus.begin(), nus.end()) <= 0.5 + 1e-10 &&
                *std::max_element(nus.begin(), nus.end()) <= 0.5 + 1e-10;
    if (!pure) CHECK(s > 1e-10);
  }
}

TEST_CASE("gaussian relative entropy: identity and thermal oracle") {
  GaussianRng rng(67);
  GaussianCM v = random_cm(2, rng);
  CHECK(gaussian_relative_entropy(v, v) == doctest::Approx(0.0).epsilon(1e-10));

  // thermal vs thermal in closed form:
  // S(th(n1)||th(n2)) = -h(n1) - log2 q2 - n1 log2(lam2), q = 1/(n+1), lam = n/(n+1)
  double n1 = 1.0, n2 = 2.0;
  double expected = -bosonic_h(n1) - std::log2(1.0 / (n2 + 1.0)) - n1 * std::log2(n2 / (n2 + 1.0));
  CHECK(gaussian_relative_entropy(thermal_cm(n1), thermal_cm(n2)) ==
        doctest::Approx(expected).epsilon(1e-12));

  // pure sigma: zero at equality, infinite otherwise
  GaussianCM vac = GaussianCM::checked(1, 0.5 * RMat::Identity(2, 2));
  CHECK(gaussian_relative_entropy(vac, vac) == 0.0);
  CHECK(gaussian_relative_entropy(thermal_cm(1.0), vac) == infinity());
}

TEST_CASE("gaussian relative entropy nonnegative on random pairs") {
  GaussianRng rng(71);
  for (int t = 0; t < 10; ++t) {
    GaussianCM a = random_cm(2, rng);
    GaussianCM b = random_cm(2, rng);
    double val = gaussian_relative_entropy(a, b);
    CHECK(val >= 0.0);
    if ((a.V - b.V).cwiseAbs().maxCoeff() > 1e-3) CHECK(val > 1e-9);
  }
}

TEST_CASE("partial transpose symplectic eigenvalue") {
  RMat two_vacua = 0.5 * RMat::Identity(4, 4);
  CHECK(pt_min_symplectic(GaussianCM::checked(2, two_vacua)) == doctest::Approx(0.5).epsilon(1e-12));

  for (double mu : {0.6, 1.0, 3.0}) {
    double expected = mu - std::sqrt(mu * mu - 0.25);
    CHECK(pt_min_symplectic(tmsv_cm(mu)) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(pt_min_symplectic(tmsv_cm(mu)) < 0.5);
  }

  CHECK_THROWS_AS(pt_min_symplectic(GaussianCM::checked(1, RMat::Identity(2, 2))),
                  std::invalid_argument);
}

TEST_CASE("fock oracle: tmsv") {
  FockState vac = fock_oracle(FockKind::Tmsv, {}, 0.5, 8);
  CHECK(std::abs(vac.rho(0, 0) - cplx(1.0, 0.0)) < 1e-14);
  CHECK(vac.deficit < 1e-14);

  // marginal entropy of tmsv(mu=1) is h(1/2)
  FockState tm = fock_oracle(FockKind::Tmsv, {}, 1.0, 40);
  CHECK(tm.deficit < 1e-10);
  RMat v = tm.covariance();
  CHECK((v - tmsv_cm(1.0).V).cwiseAbs().maxCoeff() < 1e-9);
  // reduce to mode A by eigenvalues of the traced state
  Mat ra = Mat::Zero(40, 40);
  for (int a = 0; a < 40; ++a)
    for (int ap = 0; ap < 40; ++ap)
      for (int b = 0; b < 40; ++b) ra(a, ap) += tm.rho(a * 40 + b, ap * 40 + b);
  Eigen::SelfAdjointEigenSolver<Mat> es(ra, Eigen::EigenvaluesOnly);
  double s = 0;
  for (int i = 0; i < 40; ++i) {
    double lam = es.eigenvalues()(i);
    if (lam > 1e-15) s -= lam * std::log2(lam);
  }
  CHECK(s == doctest::Approx(bosonic_h(0.5)).epsilon(1e-8));
}

TEST_CASE("fock oracle parameter validation") {
  CHECK_THROWS_AS(fock_oracle(FockKind::Tmsv, {}, 0.4, 20), std::invalid_argument);
  CHECK_THROWS_AS(fock_oracle(FockKind::Tmsv, {}, 1.0, 70), std::invalid_argument);
  FockParams thermal{0.5, 1.0, 0.0};
  CHECK_THROWS_AS(fock_oracle(FockKind::LossOutput, thermal, 1.0, 20), std::invalid_argument);
  // cutoff clearly too small for mu = 2 must raise the truncation error
  CHECK_THROWS_AS(fock_oracle(FockKind::Tmsv, {}, 2.0, 8), std::runtime_error);
}

TEST_CASE("fock oracle cross-validates the CM path") {
  // quantum-limited loss at g = 0.5 (see gaussian_bounds for the CM recipe)
  double mu = 1.0, g = 0.5;
  FockParams lp{g, 0.0, 0.0};
  FockState loss = fock_oracle(FockKind::LossOutput, lp, mu, 30);
  double c = std::sqrt(mu * mu - 0.25);
  RMat v = RMat::Zero(4, 4);
  v(0, 0) = v(1, 1) = mu;
  v(2, 2) = v(3, 3) = g * mu + (1 - g) * 0.5;
  v(0, 2) = v(2, 0) = c * std::sqrt(g);
  v(1, 3) = v(3, 1) = -c * std::sqrt(g);
  GaussianCM cm = GaussianCM::checked(2, v);
  CHECK(loss.entropy() == doctest::Approx(gaussian_entropy(cm)).epsilon(1e-6));
  CHECK((loss.covariance() - cm.V).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fock oracle loss boundaries") {
  // g = 1: transparent channel, output is the input TMSV
  FockState pass = fock_oracle(FockKind::LossOutput, {1.0, 0.0, 0.0}, 1.0, 24);
  FockState tm = fock_oracle(FockKind::Tmsv, {}, 1.0, 24);
  CHECK((pass.rho - tm.rho).cwiseAbs().maxCoeff() < 1e-13);

  // g = 0: mode B collapses to vacuum, mode A stays thermal
  FockState dark = fock_oracle(FockKind::LossOutput, {0.0, 0.0, 0.0}, 1.0, 24);
  CHECK(dark.entropy() == doctest::Approx(bosonic_h(0.5)).epsilon(1e-8));
  RMat v = dark.covariance();
  CHECK(v(2, 2) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(v(0, 2)) < 1e-9);
}
