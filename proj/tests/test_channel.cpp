#include "doctest.h"

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "irssec/channel.hpp"
#include "irssec/error.hpp"

using namespace irssec;
using namespace irssec::testing;

TEST_CASE("path loss") {
  CHECK(path_loss(1.0, 3.7, 1e-3) == doctest::Approx(1e-3).epsilon(1e-14).scale(0));
  CHECK(path_loss(100.0, 2.0, 1e-3) == doctest::Approx(1e-7).epsilon(1e-14).scale(0));
  CHECK(path_loss(10.0, 5.0, 1e-3) == doctest::Approx(1e-8).epsilon(1e-14).scale(0));
  CHECK_THROWS_AS(path_loss(0.0, 2.0, 1e-3), InvalidInput);
  CHECK_THROWS_AS(path_loss(-1.0, 2.0, 1e-3), InvalidInput);
}

TEST_CASE("line-of-sight component") {
  const double lambda = 0.3997;
  SUBCASE("single element") {
    const auto h = los_component(Vec3(0, 0, 0), ArrayLayout::single(), Vec3(3, 4, 5),
                                 ArrayLayout::single(), lambda);
    REQUIRE(h.size() == 1);
    CHECK(std::abs(h(0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("broadside gives all ones") {
    const auto h = los_component(Vec3(0, 0, 0), ArrayLayout::ula_x(4, lambda / 2), Vec3(0, 50, 0),
                                 ArrayLayout::single(), lambda);
    REQUIRE(h.rows() == 1);
    REQUIRE(h.cols() == 4);
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(std::abs(h(0, j) - Complex(1, 0)) < 1e-12);
  }
  SUBCASE("5x2 URA at 45 degrees matches per-element phases") {
    const double d = 0.15;
    const Vec3 rose(0, 0, 0);
    const Vec3 src(10, 10, 0);
    const auto h = los_component(src, ArrayLayout::single(), rose, ArrayLayout::ura_xz(5, 2, d),
                                 lambda);
    REQUIRE(h.rows() == 10);
    const Vec3 u = Vec3(1, 1, 0).normalized();  // towards the source
    int i = 0;
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 2; ++c, ++i) {
        const Vec3 pos((c - 0.5) * d, 0.0, (r - 2.0) * d);
        const double phase = 2 * std::numbers::pi / lambda * pos.dot(u);
        CHECK(std::abs(h(i, 0)) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(h(i, 0) - std::polar(1.0, phase)) < 1e-12);
      }
    }
  }
  SUBCASE("two arrays give an outer product") {
    const auto a = los_component(Vec3(0, 0, 0), ArrayLayout::ula_x(3, 0.2), Vec3(4, 30, 1),
                                 ArrayLayout::ura_xz(2, 2, 0.15), lambda);
    REQUIRE(a.rows() == 4);
    REQUIRE(a.cols() == 3);
    Eigen::FullPivLU<ComplexMatrix> lu(a);
    CHECK(lu.rank() == 1);
    CHECK(a.cwiseAbs().minCoeff() == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(los_component(Vec3(1, 1, 1), ArrayLayout::single(), Vec3(1, 1, 1),
                                ArrayLayout::single(), lambda),
                  InvalidInput);
}

TEST_CASE("Rician sampling") {
  std::mt19937_64 gen(11);
  ComplexMatrix los(1, 1);
  los(0, 0) = std::polar(1.0, 0.7);
  const int draws = 100000;

  SUBCASE("pure LoS is deterministic") {
    for (int i = 0; i < 10; ++i) {
      const auto h = sample_channel(2.5, kInfiniteRician, los, gen);
      CHECK(h(0, 0) == std::sqrt(2.5) * los(0, 0));
    }
  }
  SUBCASE("Rayleigh second moment") {
    double power = 0;
    for (int i = 0; i < draws; ++i) power += std::norm(sample_channel(1.0, 0.0, los, gen)(0, 0));
    CHECK(power / draws == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("Rician mean") {
    Complex mean = 0;
    for (int i = 0; i < draws; ++i) mean += sample_channel(4.0, 1.0, los, gen)(0, 0);
    mean /= draws;
    CHECK(std::abs(mean - std::sqrt(2.0) * los(0, 0)) <= 0.02 * std::sqrt(2.0));
  }
  SUBCASE("power scales with distance") {
    const double near = path_loss(50.0, 2.0, 1e-3);
    const double far = path_loss(100.0, 2.0, 1e-3);
    double pn = 0, pf = 0;
    for (int i = 0; i < draws; ++i) {
      pn += std::norm(sample_channel(near, 0.0, los, gen)(0, 0));
      pf += std::norm(sample_channel(far, 0.0, los, gen)(0, 0));
    }
    CHECK(pf / pn == doctest::Approx(0.25).epsilon(0.02));
  }
  CHECK_THROWS_AS(sample_channel(-1.0, 0.0, los, gen), InvalidInput);
  CHECK_THROWS_AS(sample_channel(1.0, -1.0, los, gen), InvalidInput);
}

TEST_CASE("composite assembly") {
  SUBCASE("scalar") {
    const Complex a(1, 2), b(-0.5, 3), c(2, -1);
    const auto H = assemble_composite(ComplexMatrix::Constant(1, 1, b), ComplexVector::Constant(1, a),
                                      ComplexVector::Constant(1, c));
    REQUIRE(H.rows() == 2);
    CHECK(H(0, 0) == std::conj(a) * b);
    CHECK(H(1, 0) == std::conj(c));
  }
  SUBCASE("zero reflection path") {
    std::mt19937_64 gen(2);
    const ComplexMatrix Har = random_complex(3, 2, gen);
    const ComplexVector hai = random_vector(2, gen);
    const auto H = assemble_composite(Har, ComplexVector::Zero(3), hai);
    CHECK(H.topRows(3).norm() == 0.0);
    CHECK(H.row(3).transpose() == hai.conjugate());
  }
  SUBCASE("extended-vector identity") {
    std::mt19937_64 gen(3);
    const ComplexMatrix Har = random_complex(3, 2, gen);
    const ComplexVector hri = random_vector(3, gen);
    const ComplexVector hai = random_vector(2, gen);
    const auto H = assemble_composite(Har, hri, hai);
    std::uniform_real_distribution<double> phase(0, 2 * std::numbers::pi);
    for (int trial = 0; trial < 100; ++trial) {
      ComplexVector v(3);
      for (auto& x : v) x = std::polar(1.0, phase(gen));
      ComplexVector vext(4);
      vext << v, 1.0;
      const ComplexVector f = random_vector(2, gen);
      const Complex lhs = vext.dot(H * f);
      // v^H = [e^{j theta_1}, ...], so Phi = diag(conj(v)).
      const ComplexMatrix Phi = v.conjugate().asDiagonal();
      const Complex rhs = hai.dot(f) + (hri.adjoint() * Phi * Har * f)(0);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * (1 + std::abs(rhs)));
    }
  }
  CHECK_THROWS_AS(assemble_composite(ComplexMatrix::Zero(3, 2), ComplexVector::Zero(2),
                                     ComplexVector::Zero(2)),
                  InvalidInput);
  CHECK_THROWS_AS(assemble_composite(ComplexMatrix::Zero(3, 2), ComplexVector::Zero(3),
                                     ComplexVector::Zero(3)),
                  InvalidInput);
}

TEST_CASE("eavesdropper placement") {
  ChannelScenario sc;
  sc.K = 1;
  sc.setup = Setup::A;
  auto g = resolve_geometry(sc);
  REQUIRE(g.eves.size() == 1);
  CHECK((g.eves[0] - Vec3(2, 100, 0)).norm() < 1e-12);

  sc.K = 2;
  sc.setup = Setup::B;
  g = resolve_geometry(sc);
  REQUIRE(g.eves.size() == 2);
  // Same point set as the segment endpoints; index k mirrors Setup (a).
  CHECK((g.eves[0] - Vec3(2, -95, 0)).norm() < 1e-12);
  CHECK((g.eves[1] - Vec3(2, -105, 0)).norm() < 1e-12);

  sc.K = 5;
  sc.setup = Setup::A;
  g = resolve_geometry(sc);
  for (int k = 0; k < 5; ++k) CHECK((g.eves[k] - Vec3(2, 95 + 2.5 * k, 0)).norm() < 1e-12);

  CHECK_THROWS_AS(parse_setup("c"), InvalidInput);
  CHECK(parse_setup("b") == Setup::B);
}

TEST_CASE("scenario construction") {
  ChannelScenario sc;
  sc.M = 4;
  sc.N = 10;
  sc.K = 3;

  SUBCASE("shapes and composite identity") {
    const auto set = build_scenario(sc, ChannelRng(5));
    CHECK(set.H_ar.rows() == 10);
    CHECK(set.H_ar.cols() == 4);
    REQUIRE(set.H_e.size() == 3);
    CHECK(set.H_b.rows() == 11);
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 20; ++trial) {
      ComplexVector v(10);
      for (auto& x : v) x = std::polar(1.0, uniform(0, 2 * std::numbers::pi, gen));
      ComplexVector vext(11);
      vext << v, 1.0;
      const ComplexVector f = random_vector(4, gen);
      for (std::size_t k = 0; k < 3; ++k) {
        const Complex lhs = vext.dot(set.H_e[k] * f);
        const Complex rhs = set.h_ae[k].dot(f) + (set.h_re[k].adjoint() * v.conjugate().asDiagonal() * set.H_ar * f)(0);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1e-12 + std::abs(rhs)));
      }
    }
  }
  SUBCASE("reproducible from the seed") {
    const auto a = build_scenario(sc, ChannelRng(77));
    const auto b = build_scenario(sc, ChannelRng(77));
    const auto c = build_scenario(sc, ChannelRng(78));
    CHECK(a.H_b == b.H_b);
    CHECK(a.H_e[2] == b.H_e[2]);
    CHECK(a.H_b != c.H_b);
  }
  SUBCASE("Setup (a) Rose-Eve links are deterministic") {
    sc.setup = Setup::A;
    sc.params = ChannelParams::defaults(Setup::A);
    const auto a = build_scenario(sc, ChannelRng(1));
    const auto b = build_scenario(sc, ChannelRng(2));
    for (std::size_t k = 0; k < 3; ++k) CHECK(a.h_re[k] == b.h_re[k]);
    CHECK(a.h_rb == b.h_rb);
    CHECK(a.h_ab != b.h_ab);
  }
  SUBCASE("Setup (b) Rose-Eve links are random") {
    sc.setup = Setup::B;
    sc.params = ChannelParams::defaults(Setup::B);
    CHECK(sc.params.re.exponent == 5.0);
    CHECK(sc.params.re.rician == 0.0);
    const auto a = build_scenario(sc, ChannelRng(1));
    const auto b = build_scenario(sc, ChannelRng(2));
    CHECK(a.h_re[0] != b.h_re[0]);
  }
  SUBCASE("Alice-side links agree across setups") {
    // The Setup (b) segment mirrors Setup (a) across y = 0, so every
    // eavesdropper keeps its distance to Alice and, with a shared seed,
    // its Alice-side draw.
    ChannelScenario sb = sc;
    sc.setup = Setup::A;
    sc.params = ChannelParams::defaults(Setup::A);
    sb.setup = Setup::B;
    sb.params = ChannelParams::defaults(Setup::B);
    const auto a = build_scenario(sc, ChannelRng(4));
    const auto b = build_scenario(sb, ChannelRng(4));
    CHECK(a.H_ar == b.H_ar);
    CHECK(a.h_ab == b.h_ab);
    for (std::size_t k = 0; k < 3; ++k) CHECK((a.h_ae[k] - b.h_ae[k]).norm() <= 1e-12 * a.h_ae[k].norm());
  }
  SUBCASE("invalid inputs") {
    sc.params.ura_rows = 3;
    CHECK_THROWS_AS(build_scenario(sc, ChannelRng(1)), InvalidInput);
    sc.params.ura_rows = 5;
    sc.explicit_eves = true;
    sc.geometry.eves = {Vec3(1, 1, 1)};
    CHECK_THROWS_AS(build_scenario(sc, ChannelRng(1)), InvalidInput);
    sc.geometry.eves = {sc.geometry.bob, Vec3(1, 1, 1), Vec3(2, 2, 2)};
    CHECK_THROWS_AS(build_scenario(sc, ChannelRng(1)), InvalidInput);
  }
}

TEST_CASE("array layouts") {
  const auto u = ArrayLayout::ula_x(4, 0.2);
  REQUIRE(u.size() == 4);
  CHECK(u.offsets[0].x() == doctest::Approx(-0.3));
  CHECK(u.offsets[3].x() == doctest::Approx(0.3));
  const auto r = ArrayLayout::ura_xz(5, 4, 0.15);
  REQUIRE(r.size() == 20);
  // Row-major: consecutive indices step along x.
  CHECK(r.offsets[1].x() - r.offsets[0].x() == doctest::Approx(0.15));
  CHECK(r.offsets[4].z() - r.offsets[0].z() == doctest::Approx(0.15));
  for (const auto& o : r.offsets) CHECK(o.y() == 0.0);
}
