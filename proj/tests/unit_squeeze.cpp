#include <doctest.h>

#include <cmath>
#include <random>

#include "omneg/covariance.hpp"
#include "omneg/errors.hpp"
#include "omneg/squeeze.hpp"

using namespace omneg;

TEST_CASE("identity, constant squeeze and rotation are symplectic") {
  CHECK(validate_symplectic(SqueezeTransform::none()).ok);
  const auto sq = SqueezeTransform::constant(0.8);
  CHECK(validate_symplectic(sq).ok);
  CHECK(sq.t1(3.0) == doctest::Approx(std::exp(1.6)));
  CHECK(sq.t2(3.0) == doctest::Approx(std::exp(-1.6)));
  CHECK(sq.is_frequency_independent());
  CHECK(validate_symplectic(SqueezeTransform::rotation(0.4)).ok);
}

TEST_CASE("angle parametrization satisfies the determinant constraint") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> r(0.0, 2.0), a(-M_PI, M_PI);
  for (int k = 0; k < 100; ++k) {
    const auto m = symplectic_from_angles(r(rng), a(rng), a(rng));
    CHECK(std::abs(m[0] * m[3] - m[1] * m[2] - 1.0) < 1e-10);
    const auto sq = SqueezeTransform::general(Rational::constant(m[0]), Rational::constant(m[1]),
                                              Rational::constant(m[2]), Rational::constant(m[3]));
    CHECK(validate_symplectic(sq).ok);
  }
}

TEST_CASE("violations are reported with the worst frequency") {
  const auto bad = SqueezeTransform::general(Rational::constant(2.0), Rational::constant(0.0),
                                             Rational::constant(0.0), Rational::constant(1.0));
  const auto rep = validate_symplectic(bad);
  CHECK_FALSE(rep.ok);
  CHECK(rep.worst_determinant_error == doctest::Approx(1.0));
  CHECK_FALSE(rep.message.empty());
}

TEST_CASE("filter cavity parameters") {
  const OscillatorParams on_res{1.0, 0.001, 1.0, 1.0};
  const auto fc = filter_cavity_params(on_res);
  CHECK(fc.gamma_c == doctest::Approx(std::sqrt((std::sqrt(2.0) - 1.0) / 2.0)).epsilon(1e-12));
  CHECK(fc.delta_c == doctest::Approx(1.0 / (2.0 * fc.gamma_c)));
  CHECK(fc.high_q);

  const OscillatorParams strong{1.0, 0.001, 1e3, 1.0};
  const auto fs = filter_cavity_params(strong);
  CHECK(fs.gamma_c == doctest::Approx(1e3 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(fs.delta_c == doctest::Approx(1e3 / std::sqrt(2.0)).epsilon(1e-6));

  CHECK_FALSE(filter_cavity_params({1.0, 0.5, 1.0, 1.0}).high_q);
  CHECK_THROWS_AS(filter_cavity_params({1.0, 0.1, 0.0, 1.0}), ConfigError);
}

TEST_CASE("filter cavity transform is causal and symplectic") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> r(0.0, 1.5), g(0.1, 10.0), d(-10.0, 10.0);
  for (int k = 0; k < 20; ++k) {
    const auto sq = fd_squeeze_transform(r(rng), g(rng), d(rng));
    CHECK(validate_symplectic(sq).ok);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (const Root& p : sq.entry(i, j).poles()) CHECK(p.value.imag() < 0.0);
  }
  const auto allpass = fd_squeeze_transform(0.0, 2.0, 0.0);
  for (double w : {-5.0, 0.0, 1.0, 30.0}) {
    CHECK(allpass.t1(w) == doctest::Approx(1.0));
    CHECK(allpass.t2(w) == doctest::Approx(1.0));
    CHECK(std::abs(allpass.t12(w)) < 1e-12);
  }
}

TEST_CASE("composition stays symplectic") {
  const auto sq = fd_squeeze_transform(0.7, 1.3, 0.9).then(SqueezeTransform::rotation(0.3));
  CHECK(sq.kind() == SqueezeKind::general);
  CHECK(validate_symplectic(sq).ok);
}

TEST_CASE("quantum noise spectrum without and with filter-cavity squeezing") {
  const OscillatorParams p{2.0 * M_PI, 2.0 * M_PI * 0.001, 2.0 * M_PI * 3.0, 1.0};
  const auto plain = quantum_noise_spectrum(p, SqueezeTransform::none());
  for (double w : {0.0, 3.0, 6.3, 50.0})
    CHECK(plain(w) == doctest::Approx(1.0 + std::pow(p.omega_q, 4) * std::norm(mech_susceptibility(p, w))));
  CHECK(quantum_noise_spectrum({1.0, 0.1, 0.0, 1.0}, SqueezeTransform::none())(2.0) == doctest::Approx(1.0));

  const double r = 1.0;
  const auto fc = filter_cavity_params(p);
  const auto sq = fd_squeeze_transform(r, fc.gamma_c, fc.delta_c);
  const auto squeezed = quantum_noise_spectrum(p, sq);
  for (double w : symmetric_log_grid(p.omega_m, 100, 2.0)) {
    if (std::abs(std::abs(w) - p.omega_m) < 20.0 * p.gamma_m) continue;
    CHECK(squeezed(w) / plain(w) == doctest::Approx(std::exp(-2.0 * r)).epsilon(0.01));
  }
}

TEST_CASE("tuned filter cavity removes the amplitude drive from the phase quadrature") {
  const OscillatorParams p{2.0 * M_PI, 2.0 * M_PI * 0.001, 2.0 * M_PI * 3.0, 1.0};
  const auto fc = filter_cavity_params(p);
  const auto table = build_transfer_table(p, white_noise_model({1.0, 1.0}, p),
                                          fd_squeeze_transform(0.5, fc.gamma_c, fc.delta_c));
  for (double w : symmetric_log_grid(p.omega_m, 50, 2.0)) {
    if (std::abs(std::abs(w) - p.omega_m) < 20.0 * p.gamma_m) continue;
    const double drive = std::abs(table.response_at(Observable::v2, Source::u1, w));
    const double kept = std::abs(table.response_at(Observable::v2, Source::u2, w));
    CHECK(drive < 0.01 * kept);
  }
}
