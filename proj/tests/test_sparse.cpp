#include "doctest.h"
#include "oracles.hpp"
#include "sparsedet/errors.hpp"
#include "sparsedet/sparse.hpp"

using namespace sparsedet;

namespace {

ScmEstimate identity_scm(int n) { return ScmEstimate::from_matrix(CMatrix::Identity(n, n), n); }

Dictionary grid8() { return Dictionary(ArrayGeometry(8), AngularGrid::spanning(0.0, 3.0, 48.0)); }

}  // namespace

TEST_CASE("sample covariance examples") {
  TrainingSet t2{CMatrix::Identity(2, 2)};
  const ScmEstimate s2(t2);
  CHECK((s2.matrix() - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-15);
  CHECK(s2.k() == 2);

  TrainingSet t1{CMatrix::Constant(1, 1, Complex(0.6, -0.8) * 3.0)};
  CHECK(ScmEstimate(t1).matrix()(0, 0).real() == doctest::Approx(9.0).epsilon(1e-14));

  const InterferenceModel model = exp_covariance(8, 0.95);
  RngStream rng(17);
  const TrainingSet big{model.factor() * rng.circular_normal_matrix(8, 10000)};
  const ScmEstimate s(big);
  CHECK((s.matrix() - model.covariance()).norm() / model.covariance().norm() < 0.05);

  const CMatrix direct = big.samples * big.samples.adjoint() / 10000.0;
  CHECK((s.matrix() - direct).norm() < 1e-12 * direct.norm());
  CHECK((s.factor() * s.factor().adjoint() - s.matrix()).norm() < 1e-12 * s.matrix().norm());

  TrainingSet short_set{CMatrix::Identity(4, 3)};
  CHECK_THROWS_AS(ScmEstimate{short_set}, EstimationError);
  TrainingSet rank_deficient{CMatrix::Ones(3, 5)};
  CHECK_THROWS_AS(ScmEstimate{rank_deficient}, EstimationError);
}

TEST_CASE("ML amplitude examples") {
  const oracle::Instance in = oracle::random_instance(8, 3);
  const Complex c(1.3, -0.4);
  const Complex a = ml_amplitude(CVector(c * in.v), in.scm, in.v);
  CHECK(std::abs(a - c) < 1e-12);

  // z = R_hat w with w orthogonal to v is whitened-orthogonal to v.
  CVector w = in.z - in.v * (in.v.dot(in.z) / in.v.squaredNorm());
  const CVector z = in.r_hat * w;
  CHECK(std::abs(ml_amplitude(z, in.scm, in.v)) < 1e-12 * z.norm());

  const ScmEstimate id = identity_scm(6);
  RngStream rng(8);
  const CVector zr = rng.circular_normal_matrix(6, 1);
  CHECK(std::abs(ml_amplitude(zr, id, CVector::Ones(6)) - zr.sum() / 6.0) < 1e-14);

  const Complex oracle_a =
      oracle::cross(in.v, in.r_hat.inverse(), in.z) / oracle::quad(in.v, in.r_hat.inverse(), in.v);
  CHECK(std::abs(ml_amplitude(in.z, in.scm, in.v) - oracle_a) < 1e-10 * std::abs(oracle_a));
}

TEST_CASE("initialization is the per-bin ML amplitude") {
  const oracle::Instance in = oracle::random_instance(8, 11);
  const Dictionary d = grid8();
  const CVector a0 = slim_initialize(in.z, d, in.scm);
  for (int l = 0; l < d.n_bins(); ++l) {
    const Complex ml = ml_amplitude(in.z, in.scm, CVector(d.column(l)));
    CHECK(std::abs(a0(l) - ml) < 1e-10 * std::abs(ml));
  }
}

TEST_CASE("scalar fixed point") {
  // M = 1, v = ones(8), R_hat = I, q = 1: alpha <- 16 |alpha| / (8 |alpha| + 1).
  const Dictionary d(ArrayGeometry(8), AngularGrid(0.0, 1.0, 1));
  const ScmEstimate id = identity_scm(8);
  const CVector z = 2.0 * d.matrix().col(0);
  double a = 2.0;
  for (int i = 0; i < 15; ++i) a = 16.0 * a / (8.0 * a + 1.0);
  double fixed = 2.0;
  for (int i = 0; i < 200; ++i) fixed = 16.0 * fixed / (8.0 * fixed + 1.0);
  const CVector out = slim_iterate(z, d, id, 1.0, 15);
  CHECK(std::abs(out(0) - a) < 1e-12);
  CHECK(std::abs(out(0) - fixed) < 1e-12);
  CHECK(fixed == doctest::Approx(15.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("noise-free recovery on a low-coherence grid") {
  const Dictionary d(ArrayGeometry(24), AngularGrid::spanning(0.0, 1.5, 15.0));
  const int m = d.nominal_index();
  const CVector z = 5.0 * d.matrix().col(m);
  const CVector a = slim_iterate(z, d, identity_scm(24), 0.1, 15);
  CHECK(std::abs(a(m) - 5.0) < 0.05);
  for (int l = 0; l < d.n_bins(); ++l)
    if (l != m) CHECK(std::abs(a(l)) < 0.05);
}

TEST_CASE("zero snapshot stays at zero") {
  const Dictionary d = grid8();
  const oracle::Instance in = oracle::random_instance(8, 5);
  const CVector a = slim_iterate(CVector::Zero(8), d, in.scm, 0.5, 3);
  CHECK(a.cwiseAbs().maxCoeff() == 0.0);
  CHECK(slim_step(CVector::Zero(d.n_bins()), in.z, d, in.scm, 0.5).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("objective examples") {
  const Dictionary d = grid8();
  const oracle::Instance in = oracle::random_instance(8, 21);
  const CVector zero = CVector::Zero(d.n_bins());
  const double m = d.n_bins();
  CHECK(slim_objective(zero, CVector::Zero(8), d, in.scm, 0.4) == doctest::Approx(-2.0 * m / 0.4));
  const double white = (oracle::inverse_sqrt(in.r_hat) * in.z).squaredNorm();
  CHECK(slim_objective(zero, in.z, d, in.scm, 0.4) ==
        doctest::Approx(white - 2.0 * m / 0.4).epsilon(1e-12));

  const CVector a = slim_initialize(in.z, d, in.scm);
  for (double q : {0.01, 0.3, 1.0}) {
    const CVector res = in.z - d.matrix() * a;
    double brute = oracle::quad(res, in.r_hat.inverse(), res);
    for (int l = 0; l < a.size(); ++l) brute += (2.0 / q) * (std::pow(std::abs(a(l)), q) - 1.0);
    CHECK(oracle::close(slim_objective(a, in.z, d, in.scm, q), brute, 1e-12, 1.0));
  }
  CHECK_THROWS_AS(slim_objective(a, in.z, d, in.scm, 0.0), DomainError);
  CHECK_THROWS_AS(slim_iterate(in.z, d, in.scm, 1.5, 3), DomainError);
}

TEST_CASE("update agrees with both reference forms") {
  const Dictionary d = grid8();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const oracle::Instance in = oracle::random_instance(8, seed, seed % 2 ? 2.0 : 0.0);
    for (double q : {0.1, 0.5, 1.0}) {
      CVector a = slim_initialize(in.z, d, in.scm);
      for (int it = 0; it < 4; ++it) {
        const CVector next = slim_step(a, in.z, d, in.scm, q);
        const CVector pushed = oracle::dense_push_through(a, in.z, d.matrix(), in.r_hat, q);
        const CVector literal = oracle::dense_slim_step(a, in.z, d.matrix(), in.r_hat, q);
        const double scale = std::max(1.0, pushed.norm());
        CHECK((next - pushed).norm() < 1e-8 * scale);
        CHECK((literal - pushed).norm() < 1e-8 * scale);
        a = next;
      }
    }
  }
}

TEST_CASE("iterates satisfy the frozen-P system") {
  const Dictionary d = grid8();
  const oracle::Instance in = oracle::random_instance(8, 77, 1.5);
  const CMatrix rinv = in.r_hat.inverse();
  const CMatrix gram = d.matrix().adjoint() * rinv * d.matrix();
  const CVector rhs = d.matrix().adjoint() * rinv * in.z;
  CVector a = slim_initialize(in.z, d, in.scm);
  for (int it = 0; it < 6; ++it) {
    const CVector next = slim_step(a, in.z, d, in.scm, 0.5);
    std::vector<Eigen::Index> s;
    for (Eigen::Index l = 0; l < a.size(); ++l)
      if (a(l) != Complex(0.0)) s.push_back(l);
    for (Eigen::Index i : s) {
      // Entries snapped by the zero floor no longer carry the solution.
      if (next(i) == Complex(0.0)) continue;
      Complex row = next(i) / std::pow(std::abs(a(i)), 1.5);
      for (Eigen::Index j : s) row += gram(i, j) * next(j);
      CHECK(std::abs(row - rhs(i)) < 1e-8 * std::max(1.0, rhs.norm()));
    }
    a = next;
  }
}

TEST_CASE("zero floor snaps tiny entries") {
  const Dictionary d = grid8();
  const oracle::Instance in = oracle::random_instance(8, 4);
  CVector a = slim_initialize(in.z, d, in.scm);
  a(3) = a.cwiseAbs().maxCoeff() * 1e-14;
  a(5) = 0.0;
  const CVector next = slim_step(a, in.z, d, in.scm, 0.2);
  CHECK(next(5) == Complex(0.0));
  const double peak = next.cwiseAbs().maxCoeff();
  for (Eigen::Index l = 0; l < next.size(); ++l)
    CHECK((next(l) == Complex(0.0) || std::abs(next(l)) >= kZeroFloor * peak));
}

TEST_CASE("objective is non-increasing along the iteration") {
  const Dictionary d = grid8();
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const oracle::Instance in = oracle::random_instance(8, seed, seed % 2 ? 3.0 : 0.0);
    for (double q : {0.01, 0.2, 0.6, 1.0}) {
      CVector a = slim_initialize(in.z, d, in.scm);
      double previous = slim_objective(a, in.z, d, in.scm, q);
      for (int it = 0; it < 15; ++it) {
        a = slim_step(a, in.z, d, in.scm, q);
        const double g = slim_objective(a, in.z, d, in.scm, q);
        CHECK(g <= previous + 1e-9 * std::abs(previous));
        previous = g;
      }
    }
  }
}

TEST_CASE("relative tolerance stops early without changing the fixed iteration") {
  const Dictionary d = grid8();
  const oracle::Instance in = oracle::random_instance(8, 9, 3.0);
  CVector manual = slim_initialize(in.z, d, in.scm);
  for (int i = 0; i < 15; ++i) manual = slim_step(manual, in.z, d, in.scm, 0.3);
  CHECK((slim_iterate(in.z, d, in.scm, 0.3, 15) - manual).norm() == 0.0);
  const CVector loose = slim_iterate(in.z, d, in.scm, 0.3, 200, 1e-6);
  const CVector next = slim_step(loose, in.z, d, in.scm, 0.3);
  CHECK((next - loose).norm() <= 1e-5 * loose.norm());
}

TEST_CASE("truncation keeps the largest entries") {
  CVector a(5);
  a << Complex(1, 0), Complex(0, -3), Complex(2, 0), Complex(-2, 0), Complex(0.5, 0);
  const CVector t2 = truncate_to_largest(a, 2);
  CHECK(t2(1) == a(1));
  CHECK(t2(2) == a(2));  // tie with index 3 goes to the lower index
  CHECK(t2(3) == Complex(0.0));
  CHECK(t2(0) == Complex(0.0));
  CHECK((truncate_to_largest(a, 9) - a).norm() == 0.0);
}

TEST_CASE("BIC value examples") {
  const Dictionary d = grid8();
  const int m = d.nominal_index();
  const ScmEstimate id = identity_scm(8);
  const CVector z = 2.0 * d.matrix().col(m);
  CVector a = CVector::Zero(d.n_bins());
  a(m) = 2.0;
  CHECK(bic_value(z, d, id, a, 1) == doctest::Approx(3.0 * std::log(16.0)).epsilon(1e-12));
  CHECK(bic_value(z, d, id, a, 1) == doctest::Approx(8.3178).epsilon(1e-4));
  CHECK(bic_value(z, d, id, a, 2) - bic_value(z, d, id, a, 1) ==
        doctest::Approx(3.0 * std::log(16.0)));
  CHECK_THROWS_AS(bic_value(z, d, id, a, 0), DomainError);
  CHECK_THROWS_AS(bic_value(z, d, id, a, 4, 3), DomainError);

  // Bins at -30 and +30 deg of a two-element array are orthogonal.
  const Dictionary ortho(ArrayGeometry(2), AngularGrid(0.0, 30.0, 3));
  const ScmEstimate id2 = identity_scm(2);
  const CVector zt = ortho.matrix().col(2);
  CVector right = CVector::Zero(3);
  right(2) = 1.0;
  CVector wrong = CVector::Zero(3);
  wrong(0) = 0.5;
  const double penalty = 3.0 * std::log(4.0);
  CHECK(bic_value(zt, ortho, id2, right, 1) == doctest::Approx(penalty));
  CHECK(bic_value(zt, ortho, id2, wrong, 1) ==
        doctest::Approx(2.0 * (zt.squaredNorm() + 0.25 * 2.0) + penalty));
}

TEST_CASE("BIC selection examples") {
  const Dictionary d(ArrayGeometry(24), AngularGrid::spanning(0.0, 1.5, 15.0));
  const ScmEstimate id = identity_scm(24);
  const int m = d.nominal_index();

  const CVector one = 2.0 * d.matrix().col(m);
  const BicSelection s1 = bic_select(one, d, id, slim_iterate(one, d, id, 0.1, 15), d.n_bins());
  CHECK(s1.order == 1);
  CHECK(s1.alpha(m) != Complex(0.0));

  const CVector two = 3.0 * (d.matrix().col(3) + d.matrix().col(15));
  const CVector full = slim_iterate(two, d, id, 0.1, 15);
  const BicSelection s2 = bic_select(two, d, id, full, d.n_bins());
  CHECK(s2.order == 2);
  CHECK(s2.alpha(3) != Complex(0.0));
  CHECK(s2.alpha(15) != Complex(0.0));
  CHECK(bic_select(two, d, id, full, 1).order == 1);

  const BicSelection none = bic_select(two, d, id, CVector::Zero(d.n_bins()), 5);
  CHECK(none.order == 0);
  CHECK(none.bic == doctest::Approx(2.0 * two.squaredNorm()));
}

TEST_CASE("BIC selection matches exhaustive search") {
  const Dictionary d = grid8();
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const oracle::Instance in = oracle::random_instance(8, seed, (seed % 3) * 1.5);
    const CVector full = slim_iterate(in.z, d, in.scm, 0.1 * double(1 + seed % 10), 15);
    for (int h_max : {1, 4, d.n_bins()}) {
      const BicSelection s = bic_select(in.z, d, in.scm, full, h_max);
      const oracle::BruteBic b = oracle::brute_bic(in.z, d.matrix(), in.r_hat, full, h_max);
      CHECK(s.order == b.order);
      CHECK(oracle::close(s.bic, b.bic, 1e-9, 1.0));
      CHECK((s.alpha - b.alpha).norm() == 0.0);
    }
  }
}

TEST_CASE("BSLIM output structure") {
  const Dictionary d = grid8();
  SlimConfig single;
  single.q_grid = {0.5};
  const oracle::Instance in = oracle::random_instance(8, 31, 2.0);
  const SparseEstimate e = bslim(in.z, d, in.scm, single);
  const BicSelection ref = bic_select(in.z, d, in.scm, slim_iterate(in.z, d, in.scm, 0.5, 15), d.n_bins());
  CHECK((e.alpha - ref.alpha).norm() == 0.0);
  CHECK(e.selected_q == 0.5);
  CHECK(e.selected_order == ref.order);
  CHECK(e.bic_value == ref.bic);

  SlimConfig capped;
  capped.h_max = 3;
  for (std::uint64_t seed = 40; seed < 60; ++seed) {
    const oracle::Instance x = oracle::random_instance(8, seed, 1.0);
    const SparseEstimate full = bslim(x.z, d, x.scm, SlimConfig{});
    CHECK(full.support_size() == full.selected_order);
    const SparseEstimate c = bslim(x.z, d, x.scm, capped);
    CHECK(c.support_size() == c.selected_order);
    CHECK(c.selected_order <= 3);
    double best = 1e300;
    double best_q = 0.0;
    for (double q : default_q_grid()) {
      const double b =
          bic_select(x.z, d, x.scm, slim_iterate(x.z, d, x.scm, q, 15), d.n_bins()).bic;
      if (b < best) {
        best = b;
        best_q = q;
      }
    }
    CHECK(full.bic_value == best);
    CHECK(full.selected_q == best_q);
  }
}

TEST_CASE("BSLIM is phase equivariant") {
  const Dictionary d = grid8();
  for (std::uint64_t seed = 60; seed < 70; ++seed) {
    const oracle::Instance in = oracle::random_instance(8, seed, 2.0);
    const Complex rot = std::polar(1.0, 0.3 + double(seed));
    const SparseEstimate a = bslim(in.z, d, in.scm, SlimConfig{});
    const SparseEstimate b = bslim(CVector(rot * in.z), d, in.scm, SlimConfig{});
    CHECK(a.selected_order == b.selected_order);
    CHECK(a.selected_q == b.selected_q);
    CHECK((b.alpha - rot * a.alpha).norm() < 1e-10 * std::max(1.0, a.alpha.norm()));
  }
}

TEST_CASE("config validation") {
  SlimConfig c;
  CHECK_NOTHROW(c.validate(33));
  c.h_max = 34;
  CHECK_THROWS_AS(c.validate(33), DomainError);
  c = SlimConfig{};
  c.q_grid = {};
  CHECK_THROWS_AS(c.validate(33), DomainError);
  c.q_grid = {0.0};
  CHECK_THROWS_AS(c.validate(33), DomainError);
  c = SlimConfig{};
  c.n_iterations = 0;
  CHECK_THROWS_AS(c.validate(33), DomainError);
  CHECK(default_q_grid().size() == 11);
  CHECK(default_q_grid().front() == 0.01);
  CHECK(default_q_grid().back() == 1.0);
}

TEST_CASE("nominal-bin occupancy under matched and sidelobe targets") {
  {
    const ArrayGeometry g(24);
    const InterferenceModel model = exp_covariance(24, 0.95);
    const Dictionary d(g, AngularGrid::spanning(0.0, 1.5, 15.0));
    const CVector target = amplitude_for_sinr({14.0, 0.0, 0.0}, model, g) * steering_vector(g, 0.0);
    int hits = 0;
    for (int t = 0; t < 1000; ++t) {
      RngStream rng(2024, 0, static_cast<std::uint64_t>(t));
      const Trial tr = synthesize_trial(Hypothesis::H1, target, model, 96, rng);
      const ScmEstimate scm(tr.training);
      hits += bslim(tr.snapshot.z, d, scm, SlimConfig{}).alpha(d.nominal_index()) != Complex(0.0);
    }
    CHECK(hits >= 900);
  }
  {
    const ArrayGeometry g(8);
    const InterferenceModel model = exp_covariance(8, 0.95);
    const Dictionary d(g, AngularGrid::spanning(0.0, 2.0, 48.0));
    const CVector target = amplitude_for_sinr({14.0, 2.0, 0.0}, model, g) * steering_vector(g, 2.0);
    int hits = 0;
    for (int t = 0; t < 1000; ++t) {
      RngStream rng(2025, 0, static_cast<std::uint64_t>(t));
      const Trial tr = synthesize_trial(Hypothesis::H1, target, model, 32, rng);
      const ScmEstimate scm(tr.training);
      hits += bslim(tr.snapshot.z, d, scm, SlimConfig{}).alpha(d.nominal_index()) != Complex(0.0);
    }
    CHECK(hits < 100);
  }
}
