#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qnd/errors.hpp"
#include "qnd/kraus.hpp"
#include "qnd/openloop.hpp"
#include "qnd/photonbox.hpp"
#include "test_util.hpp"

using namespace qnd;

namespace {

// Two-outcome diagonal set with asymmetric statistics: c_1 = (1, 0.6),
// c_2 = (0, 0.8). Complete and pairwise distinguishable.
KrausSet toy_set() {
  Eigen::MatrixXcd m1 = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd m2 = Eigen::MatrixXcd::Zero(2, 2);
  m1(0, 0) = 1.0;
  m1(1, 1) = 0.6;
  m2(1, 1) = 0.8;
  auto v = validate_kraus({m1, m2}, {});
  REQUIRE(v.ok());
  return *v.set;
}

}  // namespace

TEST_CASE("photon-box cos/sin pair passes all assumptions") {
  auto params = PhotonBoxParams::defaults();
  const Eigen::Index d = params.n_max + 1;
  Eigen::MatrixXcd mg = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd me = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index n = 0; n < d; ++n) {
    mg(n, n) = std::cos(params.phi0 + params.theta * n);
    me(n, n) = std::sin(params.phi0 + params.theta * n);
  }
  const auto v = validate_kraus({mg, me});
  CHECK(v.ok());
  CHECK(v.set->count() == 2);
  CHECK(v.set->dim() == d);
  // Per-column normalization |c_g|^2 + |c_e|^2 = 1.
  for (Eigen::Index n = 0; n < d; ++n) {
    CHECK(v.set->weight(0, n) + v.set->weight(1, n) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("identical operators are statistically indistinguishable, with the offending pair named") {
  const Eigen::MatrixXcd half = Eigen::MatrixXcd::Identity(2, 2) / std::sqrt(2.0);
  const auto v = validate_kraus({half, half});
  CHECK(!v.ok());
  REQUIRE(!v.violations.empty());
  bool found = false;
  for (const auto& viol : v.violations) {
    if (viol.assumption == "distinguishability") found = true;
  }
  CHECK(found);
}

TEST_CASE("a single identity operator is complete but statistically blind") {
  const auto v = validate_kraus({Eigen::MatrixXcd::Identity(3, 3)});
  CHECK(!v.ok());
  for (const auto& viol : v.violations) CHECK(viol.assumption == "distinguishability");
  // Three indistinct pairs: (0,1), (0,2), (1,2).
  CHECK(v.violations.size() == 3);
}

TEST_CASE("incomplete sets are rejected") {
  const Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  const auto v = validate_kraus({m});
  CHECK(!v.ok());
  bool found = false;
  for (const auto& viol : v.violations) {
    if (viol.assumption == "completeness") found = true;
  }
  CHECK(found);
}

TEST_CASE("non-diagonal operators are rejected as non-QND") {
  Eigen::MatrixXcd m1(2, 2);
  m1 << 0, 1, 1, 0;  // complete on its own but not diagonal
  const auto v = validate_kraus({m1});
  CHECK(!v.ok());
  bool found = false;
  for (const auto& viol : v.violations) {
    if (viol.assumption == "qnd-diagonality") found = true;
  }
  CHECK(found);
}

TEST_CASE("outcome probabilities at |3><3| are an even split") {
  const KrausSet k = photonbox_kraus(PhotonBoxParams::defaults());
  const DensityMatrix rho = DensityMatrix::basis_projector(11, 3);
  const Eigen::VectorXd p = outcome_probabilities(k, rho);
  // phi0 + 3 theta = pi/4 by construction.
  CHECK(p(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("basis projectors reproduce the coefficient weights") {
  const KrausSet k = photonbox_kraus(PhotonBoxParams::defaults());
  for (Eigen::Index n = 0; n < k.dim(); ++n) {
    const Eigen::VectorXd p =
        outcome_probabilities(k, DensityMatrix::basis_projector(k.dim(), n));
    for (Eigen::Index mu = 0; mu < k.count(); ++mu) {
      CHECK(p(mu) == doctest::Approx(k.weight(mu, n)).epsilon(1e-14));
    }
  }
}

TEST_CASE("trivial single-outcome set has probability one") {
  const auto v = validate_kraus({Eigen::MatrixXcd::Identity(1, 1)});
  REQUIRE(v.ok());
  const Eigen::VectorXd p = outcome_probabilities(*v.set, DensityMatrix::maximally_mixed(1));
  CHECK(p.size() == 1);
  CHECK(p(0) == doctest::Approx(1.0));
}

TEST_CASE("probabilities are a distribution for random states") {
  std::mt19937_64 rng(21);
  const KrausSet k = photonbox_kraus(PhotonBoxParams::defaults());
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd p = outcome_probabilities(k, test::random_density(k.dim(), rng));
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("collapse fixes basis projectors") {
  const KrausSet k = photonbox_kraus(PhotonBoxParams::defaults());
  for (Eigen::Index n = 0; n < k.dim(); ++n) {
    const DensityMatrix proj = DensityMatrix::basis_projector(k.dim(), n);
    for (Eigen::Index mu = 0; mu < k.count(); ++mu) {
      if (k.weight(mu, n) < 1e-8) continue;
      const DensityMatrix out = collapse(k, mu, proj);
      CHECK((out.matrix() - proj.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("collapse keeps diagonal states diagonal") {
  std::mt19937_64 rng(22);
  const KrausSet k = photonbox_kraus(PhotonBoxParams::defaults());
  Eigen::VectorXd w = Eigen::VectorXd::Random(k.dim()).cwiseAbs();
  w /= w.sum();
  const DensityMatrix rho =
      DensityMatrix::from_matrix(w.cast<std::complex<double>>().asDiagonal());
  const DensityMatrix out = collapse(k, 0, rho);
  Eigen::MatrixXcd off = out.matrix();
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("collapse of the maximally mixed state follows the closed form") {
  const auto params = PhotonBoxParams::defaults();
  const KrausSet k = photonbox_kraus(params);
  const DensityMatrix rho = DensityMatrix::maximally_mixed(11);
  const DensityMatrix out = collapse(k, 0, rho);  // outcome g
  Eigen::VectorXd expected(11);
  for (Eigen::Index n = 0; n < 11; ++n) {
    const double c = std::cos(params.phi0 + params.theta * n);
    expected(n) = c * c;
  }
  expected /= expected.sum();
  CHECK((out.populations() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("collapse rejects zero-probability branches") {
  const KrausSet k = toy_set();
  // c_2 vanishes on |0>, so outcome 2 is impossible there.
  CHECK_THROWS_AS(collapse(k, 1, DensityMatrix::basis_projector(2, 0)), ZeroProbabilityOutcome);
}

TEST_CASE("sampling a certain outcome always returns it") {
  const KrausSet k = toy_set();
  RngStream rng(7);
  for (int i = 0; i < 100; ++i) {
    const MeasurementOutcome mu = sample_outcome(k, DensityMatrix::basis_projector(2, 0), rng);
    CHECK(mu.index == 0);
    CHECK(mu.probability == doctest::Approx(1.0));
  }
}

TEST_CASE("sampling frequencies match a fair split within 3 sigma") {
  const KrausSet k = photonbox_kraus(PhotonBoxParams::defaults());
  const DensityMatrix rho = DensityMatrix::basis_projector(11, 3);
  RngStream rng(123);
  int count_g = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    if (sample_outcome(k, rho, rng).index == 0) ++count_g;
  }
  const double freq = static_cast<double>(count_g) / draws;
  CHECK(freq > 0.485);
  CHECK(freq < 0.515);
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  const KrausSet k = photonbox_kraus(PhotonBoxParams::defaults());
  const DensityMatrix rho = coherent_init(10, std::sqrt(3.0));
  std::vector<Eigen::Index> run1, run2;
  for (int rep = 0; rep < 2; ++rep) {
    RngStream rng(42);
    auto& dst = rep == 0 ? run1 : run2;
    DensityMatrix state = rho;
    for (int i = 0; i < 50; ++i) {
      auto [mu, next] = step_open(state, k, rng);
      dst.push_back(mu.index);
      state = next;
    }
  }
  CHECK(run1 == run2);
}

TEST_CASE("measurement-level martingale identity") {
  std::mt19937_64 rng(23);
  const KrausSet k = photonbox_kraus(PhotonBoxParams::defaults());
  for (int trial = 0; trial < 100; ++trial) {
    const DensityMatrix rho = test::random_density(k.dim(), rng);
    const Eigen::VectorXd p = outcome_probabilities(k, rho);
    const Eigen::Index n = static_cast<Eigen::Index>(rng() % k.dim());
    double acc = 0.0;
    for (Eigen::Index mu = 0; mu < k.count(); ++mu) {
      if (p(mu) <= 1e-12) continue;
      acc += p(mu) * collapse(k, mu, rho).population(n);
    }
    CHECK(std::abs(acc - rho.population(n)) < 1e-10);
  }
}

TEST_CASE("kraus JSON loader routes through validation") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "qnd_kraus_test.json";
  {
    std::ofstream out(path);
    out << R"({"dim": 2, "operators": [)"
        << R"([[[1,0],[0,0]],[[0,0],[0.6,0]]],)"
        << R"([[[0,0],[0,0]],[[0,0],[0.8,0]]])"
        << "]}";
  }
  const auto v = load_kraus_json(path.string());
  CHECK(v.ok());
  CHECK(v.set->dim() == 2);
  CHECK(v.set->weight(0, 0) == doctest::Approx(1.0));
  CHECK(v.set->weight(1, 1) == doctest::Approx(0.64));
  fs::remove(path);

  CHECK_THROWS_AS(load_kraus_json("/nonexistent/kraus.json"), ConfigError);
}
