#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "chronon/decohere.hpp"
#include "oracles.hpp"

using namespace chronon;
using namespace chronon::decohere;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr cplx I{0.0, 1.0};
const double hbar = Constants::hbar_eVs;
const double omega_4eV = 4.0 / Constants::hbar_eVs;

DensityMatrix two_level_rho(cplx offdiag) {
  Matrix rho(2, 2);
  rho << 0.5, offdiag, std::conj(offdiag), 0.5;
  return DensityMatrix(rho, BasisTag::Energy);
}

TransitionFrequencies pair_frequency(double omega) {
  return TransitionFrequencies::from_energies(RealVector{{0.0, -omega * hbar}});
}

}  // namespace

TEST_CASE("transition frequencies", "[decohere]") {
  const auto w = TransitionFrequencies::from_energies(RealVector{{0.0, 1.0, 3.0}});
  CHECK_THAT(w(2, 0), WithinRel(3.0 / hbar, 1e-15));
  CHECK(w(0, 2) == -w(2, 0));
  CHECK(w(1, 1) == 0.0);
  RealMatrix bad(2, 2);
  bad << 0, 1, 1, 0;
  CHECK_THROWS_AS(TransitionFrequencies::from_matrix(bad), ValidationError);
  bad(1, 0) = -1;
  CHECK_NOTHROW(TransitionFrequencies::from_matrix(bad));
}

TEST_CASE("lvn_step_retarded", "[decohere]") {
  const double tau = 1e-18;
  SECTION("diagonal rho unchanged") {
    const DensityMatrix rho(Matrix(RealVector{{0.3, 0.7}}.cast<cplx>().asDiagonal()));
    const auto out = lvn_step_retarded(rho, pair_frequency(1.0 / tau), tau);
    CHECK(out.rho() == rho.rho());
  }
  SECTION("unit omega tau") {
    // omega_01 = (E_0 - E_1)/hbar = 1/tau
    const auto omega = pair_frequency(1.0 / tau);
    REQUIRE_THAT(omega(0, 1) * tau, WithinRel(1.0, 1e-15));
    const auto out = lvn_step_retarded(two_level_rho(0.5), omega, tau);
    CHECK(std::abs(out.rho()(0, 1) - cplx(0.25, -0.25)) < 1e-15);
    CHECK(std::abs(out.rho()(1, 0) - cplx(0.25, 0.25)) < 1e-15);
  }
  SECTION("agrees with the closed-form factor after many steps") {
    std::mt19937_64 rng(3);
    const auto sys = spectral_decompose(oracle::random_hermitian(4, rng));
    const auto omega = TransitionFrequencies::from_system(sys);
    const double t = 0.02 / omega.omega().cwiseAbs().maxCoeff();
    DensityMatrix rho(oracle::random_density(4, rng), BasisTag::Energy);
    const DensityMatrix rho0 = rho;
    for (int k = 0; k < 2000; ++k) rho = lvn_step_retarded(rho, omega, t);
    CHECK((rho.rho() - density_at(rho0, omega, t, 2000).rho()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("evolution_factor", "[decohere]") {
  const double tau = 1e-18;
  CHECK(evolution_factor(1e15, tau, 0) == cplx(1.0, 0.0));
  CHECK(evolution_factor(0.0, tau, 12345) == cplx(1.0, 0.0));
  CHECK(std::abs(evolution_factor(1.0 / tau, tau, 2) - cplx(0.0, -0.5)) < 1e-15);
  CHECK_THROWS_AS(evolution_factor(1.0, tau, -1), ValidationError);

  SECTION("Hermitian pairing is exact") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
      const double w = u(rng) / tau;
      const std::int64_t k = rep * 37;
      CHECK(evolution_factor(-w, tau, k) == std::conj(evolution_factor(w, tau, k)));
    }
  }
  SECTION("matches the iterated recurrence") {
    for (double x : {1e-3, 0.1, 0.7, 3.0}) {
      std::complex<long double> z(1.0L, 0.0L);
      for (int k = 1; k <= 5000; ++k) {
        z = retarded_update<long double>(z, static_cast<long double>(x));
        if (k % 500 == 0) {
          const cplx f = evolution_factor(x / tau, tau, k);
          const cplx zd(static_cast<double>(z.real()), static_cast<double>(z.imag()));
          CHECK(std::abs(f - zd) <= 1e-12 * std::max(std::abs(zd), 1e-300) + 1e-300);
        }
      }
    }
  }
  SECTION("continuum limit: modulus tends to 1 linearly in tau") {
    const double omega = 1e16;
    const double t = 1e-15;
    double prev_gap = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double tau_i = 1e-19 / std::pow(2.0, i);
      const auto k = static_cast<std::int64_t>(std::llround(t / tau_i));
      const double gap = 1.0 - std::abs(evolution_factor(omega, tau_i, k));
      if (i > 0) CHECK_THAT(prev_gap / gap, WithinRel(2.0, 0.02));
      prev_gap = gap;
      const cplx phase = std::polar(1.0, -omega * t);
      CHECK(std::abs(evolution_factor(omega, tau_i, k) - phase) < 0.2);
    }
  }
}

TEST_CASE("decay and oscillation rates", "[decohere]") {
  const double tau = 1e-18;
  CHECK(decay_rate(0.0, tau) == 0.0);
  CHECK_THAT(decay_rate(1.0 / tau, tau), WithinRel(std::log(2.0) / (2.0 * tau), 1e-15));
  CHECK(oscillation_frequency(0.0, tau) == 0.0);
  CHECK_THAT(oscillation_frequency(1.0 / tau, tau), WithinRel(std::numbers::pi / (4.0 * tau), 1e-15));
  const double w = 1e-3 / tau;
  CHECK_THAT(oscillation_frequency(w, tau) / w, WithinRel(1.0 - 1e-6 / 3.0, 1e-9));
  CHECK_THROWS_AS(decay_rate(1.0, 0.0), ValidationError);

  SECTION("fig. 1 rates against the long-double recurrence fit") {
    const double tau_a = 6.26e-24;
    const double tau_b = 1.0e-19;
    const double gamma_a = decay_rate(omega_4eV, tau_a);
    const double gamma_b = decay_rate(omega_4eV, tau_b);
    CHECK_THAT(gamma_a, WithinRel(1.156e8, 1e-3));
    CHECK_THAT(gamma_b, WithinRel(1.847e12, 1e-3));
    const auto update = [](std::complex<long double> z, long double x) {
      return retarded_update<long double>(z, x);
    };
    CHECK_THAT(oracle::fitted_decay_rate(omega_4eV, tau_a, 1'000'000, 10'000, update),
               WithinRel(gamma_a, 1e-3));
    CHECK_THAT(oracle::fitted_decay_rate(omega_4eV, tau_b, 100'000, 1'000, update),
               WithinRel(gamma_b, 1e-3));
    CHECK(gamma_b / gamma_a > 1.5e4);
    CHECK(gamma_b / gamma_a < 1.7e4);
  }
  SECTION("rate monotone in tau") {
    // ln(1 + x^2)/x peaks where 2x^2/(1 + x^2) = ln(1 + x^2), x ~ 1.98; below
    // that, larger tau always decoheres faster.
    for (double w : {1e12, 6e15, 1e18}) {
      double prev = 0.0;
      for (double t = 1e-25; w * t < 1.98; t *= 1.7) {
        const double g = decay_rate(w, t);
        CHECK(g > prev);
        prev = g;
      }
    }
    const double w = 1e16;
    CHECK(decay_rate(w, 1.9 / w) < decay_rate(w, 2.0 / w));
    CHECK(decay_rate(w, 2.1 / w) < decay_rate(w, 2.0 / w));
    CHECK(decay_rate(w, 10.0 / w) < decay_rate(w, 5.0 / w));
  }
  SECTION("first-order decay") {
    CHECK(first_order_decay(1e15, tau, 0.0) == 1.0);
    CHECK(first_order_decay(0.0, tau, 1e-9) == 1.0);
    const double w = 1e-2 / tau;
    const double t = 1e4 * tau;
    const double exact = std::abs(evolution_factor(w, tau, 10000));
    CHECK_THAT(first_order_decay(w, tau, t) / exact, WithinAbs(1.0, 5e-4));
  }
  SECTION("first-order rate gap bounded by (omega tau)^2") {
    for (double x = 1e-6; x <= 0.1 * (1 + 1e-12); x *= std::pow(10.0, 0.25)) {
      const double w = x / tau;
      const double exact = decay_rate(w, tau);
      const double t = 1.0 / (w * w * tau);  // exponent 1/2, no cancellation in the log
      const double first = -std::log(first_order_decay(w, tau, t)) / t;
      CHECK(std::abs(first - exact) / exact <= x * x);
    }
  }
}

TEST_CASE("decoherence_rates matrix", "[decohere]") {
  std::mt19937_64 rng(9);
  const auto sys = spectral_decompose(oracle::random_hermitian(5, rng));
  const auto rates = decoherence_rates(TransitionFrequencies::from_system(sys), 1e-17);
  CHECK((rates.gamma - rates.gamma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((rates.nu + rates.nu.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rates.gamma.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(rates.gamma.minCoeff() >= 0.0);
}

TEST_CASE("coherence half-time", "[decohere]") {
  const double tau = 1e-18;
  CHECK_THAT(*coherence_half_time(1.0 / tau, tau), WithinRel(2.0 * tau, 1e-15));
  CHECK_FALSE(coherence_half_time(0.0, tau).has_value());
  CHECK_THAT(*coherence_half_time(omega_4eV, 6.26e-24), WithinRel(std::log(2.0) / 1.156e8, 1e-3));
  CHECK_THAT(*coherence_half_time(omega_4eV, 1e-19), WithinRel(std::log(2.0) / 1.847e12, 1e-3));
}

TEST_CASE("semigroup", "[decohere]") {
  const double tau = 1e-18;
  const auto unit = pair_frequency(1.0 / tau);
  CHECK(semigroup_check(unit, tau, 0, 50) == 0.0);
  CHECK(semigroup_check(unit, tau, 1, 1) < 1e-16);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<std::int64_t> steps(0, 100000);
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = TransitionFrequencies::from_energies(RealVector{{0.0, u(rng) * hbar / tau}});
    CHECK(semigroup_check(w, tau, 17, 83) < 1e-12);
    CHECK(semigroup_check(w, tau, steps(rng), steps(rng)) < 1e-12);
  }
}

TEST_CASE("evolve_density", "[decohere]") {
  std::mt19937_64 rng(21);
  SECTION("stationary state") {
    const auto sys = spectral_decompose(oracle::random_hermitian(4, rng));
    const RealVector pops{{0.1, 0.2, 0.3, 0.4}};
    const Matrix rho0 = sys.eigenvectors() * pops.cast<cplx>().asDiagonal() * sys.eigenvectors().adjoint();
    const auto p = evolve_density(DensityMatrix(0.5 * (rho0 + rho0.adjoint())), sys, 1e-17, 500,
                                  {.stride = 50, .keep_states = true});
    for (const Matrix& s : p.states) CHECK((s - p.states.front()).cwiseAbs().maxCoeff() < 1e-15);
    for (double n : p.offdiag_norm) CHECK(n < 1e-14);
  }
  SECTION("fig. 1(b) halving time") {
    const double tau = 1e-19;
    const auto sys = diagonal_system(RealVector{{0.0, 4.0}});
    const auto half = *coherence_half_time(omega_4eV, tau);
    const auto p = evolve_density(two_level_rho(0.5), sys, tau, 40000, {.stride = 100});
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
      const double expected = std::sqrt(0.5) * std::pow(0.5, p.times[i] / half);
      CHECK_THAT(p.offdiag_norm[i], WithinRel(expected, 1e-10));
    }
  }
  SECTION("invariants on random states") {
    for (int rep = 0; rep < 5; ++rep) {
      const Matrix h = oracle::random_hermitian(8, rng, 3.0);
      const auto sys = spectral_decompose(h);
      const double tau = 0.2 * hbar / (sys.eigenvalues().maxCoeff() - sys.eigenvalues().minCoeff());
      const DensityMatrix rho0(oracle::random_density(8, rng));
      const auto p = evolve_density(rho0, sys, tau, 10000, {.stride = 1, .keep_states = true});
      for (std::size_t i = 0; i < p.steps.size(); ++i) {
        CHECK(std::abs(p.trace[i] - 1.0) < 1e-13);
        CHECK(p.min_eigenvalue[i] >= -1e-10);
        if (i % 1000 == 0) CHECK(hermiticity_defect(p.states[i]) < 1e-13);
        if (i > 0) {
          const Matrix& a = p.states[i - 1];
          const Matrix& b = p.states[i];
          for (Eigen::Index r = 0; r < 8; ++r) {
            for (Eigen::Index s = 0; s < 8; ++s) {
              if (r != s && std::abs(a(r, s)) > 1e-300) CHECK(std::abs(b(r, s)) < std::abs(a(r, s)));
            }
            CHECK(b(r, r) == a(r, r));
          }
        }
      }
    }
  }
  SECTION("trace at a million steps") {
    const auto sys = spectral_decompose(oracle::random_hermitian(8, rng));
    const auto p = evolve_density(DensityMatrix(oracle::random_density(8, rng)), sys, 1e-18,
                                  1'000'000, {.stride = 250'000});
    for (double t : p.trace) CHECK(std::abs(t - 1.0) < 1e-13);
    CHECK(p.steps.back() == 1'000'000);
  }
}

TEST_CASE("symmetric LvN does not decohere", "[decohere]") {
  const double tau = 1e-18;
  SECTION("diagonal passes rho_prev through") {
    const DensityMatrix prev(Matrix(RealVector{{0.25, 0.75}}.cast<cplx>().asDiagonal()));
    const DensityMatrix curr(Matrix(RealVector{{0.5, 0.5}}.cast<cplx>().asDiagonal()));
    const auto out = lvn_step_symmetric(prev, curr, pair_frequency(0.3 / tau), tau);
    CHECK(out.rho().diagonal() == prev.rho().diagonal());
  }
  SECTION("unit-modulus multipliers") {
    for (double x = -0.999; x < 1.0; x += 0.037) {
      const auto [a, b] = symmetric_multipliers(x);
      CHECK_THAT(std::abs(a), WithinAbs(1.0, 1e-12));
      CHECK_THAT(std::abs(b), WithinAbs(1.0, 1e-12));
      const cplx xi(0.0, 2.0 * x);
      CHECK(std::abs(a * a + xi * a - 1.0) < 1e-12);
      CHECK(std::abs(b * b + xi * b - 1.0) < 1e-12);
    }
  }
  SECTION("magnitude recurs each period") {
    const double x = 0.1;
    const auto omega = pair_frequency(x / tau);
    const auto [lambda, parasitic] = symmetric_multipliers(omega(0, 1) * tau);
    DensityMatrix prev = two_level_rho(0.5);
    Matrix seeded = prev.rho();
    seeded(0, 1) *= lambda;
    seeded(1, 0) = std::conj(seeded(0, 1));
    DensityMatrix curr = DensityMatrix::unchecked(seeded, BasisTag::Energy);
    const auto period = static_cast<int>(std::ceil(2.0 * std::numbers::pi / std::asin(x)));
    double window_max = 0.0;
    int in_window = 0;
    for (int k = 1; k <= 10000; ++k) {
      window_max = std::max(window_max, std::abs(curr.rho()(0, 1)));
      if (++in_window == period) {
        CHECK(window_max >= 0.999 * 0.5);
        window_max = 0.0;
        in_window = 0;
      }
      DensityMatrix next = lvn_step_symmetric(prev, curr, omega, tau);
      prev = std::move(curr);
      curr = std::move(next);
    }
  }
}

TEST_CASE("build_measurement_state", "[decohere]") {
  MeasurementSetup s;
  s.classical_weights = RealVector::Ones(1);
  SECTION("pure pointer state") {
    s.object_amplitudes = Vector{{1.0, 0.0}};
    const auto rho = build_measurement_state(s);
    CHECK((rho.rho() - Matrix(RealVector{{1.0, 0.0}}.cast<cplx>().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("equal superposition") {
    s.object_amplitudes = Vector{{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}};
    const auto rho = build_measurement_state(s);
    CHECK((rho.rho() - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SECTION("two branches") {
    s.object_amplitudes = Vector{{cplx(0.6, 0.0), cplx(0.0, 0.8)}};
    s.classical_weights = RealVector{{0.5, 0.5}};
    const auto rho = build_measurement_state(s);
    Matrix expected = Matrix::Zero(4, 4);
    const Vector& c = s.object_amplitudes;
    for (int m = 0; m < 2; ++m) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) expected(2 * m + a, 2 * m + b) = 0.5 * std::conj(c(a)) * c(b);
      }
    }
    CHECK((rho.rho() - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THAT(rho.trace().real(), WithinAbs(1.0, 1e-15));
    CHECK(rho.rho().block(0, 2, 2, 2).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("validation") {
    s.object_amplitudes = Vector{{1.0, 1.0}};
    CHECK_THROWS_AS(build_measurement_state(s), ValidationError);
    s.object_amplitudes = Vector{{1.0, 0.0}};
    s.classical_weights = RealVector{{0.7, 0.7}};
    CHECK_THROWS_AS(build_measurement_state(s), ValidationError);
    s.classical_weights = RealVector{{1.0}};
    s.pointer_labels = RealVector{{1.0, 2.0, 3.0}};
    CHECK_THROWS_AS(build_measurement_state(s), ValidationError);
  }
}

TEST_CASE("Schrodinger-induced density damps populations", "[decohere]") {
  const double tau = 1e-18;
  SECTION("zero Hamiltonian") {
    std::mt19937_64 rng(2);
    const auto sys = spectral_decompose(Matrix::Zero(3, 3));
    const auto traj = qevolve::evolve(ChrononScheme(Variant::Retarded, tau),
                                      StateVector(oracle::random_state(3, rng)), sys, 20);
    const auto p = schrodinger_induced_density(traj, true);
    for (const Matrix& m : p.states) CHECK((m - p.states.front()).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("trace halves each step for a unit eigenmode") {
    const auto sys = diagonal_system(RealVector{{hbar / tau}});
    const auto traj = qevolve::evolve(ChrononScheme(Variant::Retarded, tau), StateVector(Vector{{1.0}}), sys, 10);
    const auto p = schrodinger_induced_density(traj);
    for (std::size_t k = 0; k < p.trace.size(); ++k) CHECK_THAT(p.trace[k], WithinRel(std::pow(0.5, k), 1e-14));
  }
  SECTION("contrast with LvN populations") {
    const auto sys = diagonal_system(RealVector{{0.0, 4.0}});
    const double t = 1e-19;
    const Vector c{{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}};
    const auto traj = qevolve::evolve(ChrononScheme(Variant::Retarded, t), StateVector(c), sys, 5000,
                                      qevolve::Seeding::ContinuumStep, 100);
    const auto induced = schrodinger_induced_density(traj, sys);
    const double gamma1 = qevolve::retarded_decay_rates(sys, t).gamma_n(1);
    const auto lvn = evolve_density(DensityMatrix(c * c.adjoint()), sys, t, 5000, {.stride = 100});
    REQUIRE(induced.steps == lvn.steps);
    for (std::size_t i = 0; i < induced.steps.size(); ++i) {
      CHECK(std::abs(induced.diagonal[i](0) - 0.5) < 1e-10);
      CHECK(std::abs(induced.diagonal[i](1) - 0.5 * std::exp(-gamma1 * induced.times[i])) < 1e-10);
      CHECK(std::abs(lvn.diagonal[i](0) - 0.5) < 1e-10);
      CHECK(std::abs(lvn.diagonal[i](1) - 0.5) < 1e-10);
    }
    CHECK(induced.diagonal.back()(1) < 0.5 * (1.0 - 1e-3));
  }
}
