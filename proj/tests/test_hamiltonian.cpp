#include <doctest.h>

#include <cmath>

#include "mzsg/builtins.hpp"
#include "mzsg/hamiltonian.hpp"
#include "mzsg/rng.hpp"

using namespace mzsg;

namespace {

GameModel separated_drift_model() {
    GameModel m = builtin_model("zero");
    m.drift = [](double, const Vec&, double a, double b) { return Vec{a - b}; };
    m.control_grid_a = {-1.0, 0.0, 1.0};
    m.control_grid_b = {-1.0, 0.0, 1.0};
    m.growth_constant = 2.0;
    return m;
}

} // namespace

TEST_CASE("hamiltonian value: drift and z terms") {
    const GameModel zero = builtin_model("zero");
    // f = 0 -> H = Gamma
    CHECK(hamiltonian_value(zero, 0.3, {0.1}, {2.0}, 0.0, 0.0) == 0.0);

    GameModel m = separated_drift_model();
    // d=1, sigma=1, f=a-b, Gamma=0, z=2, a=1, b=-1 -> H = 2*(1-(-1)) = 4
    CHECK(hamiltonian_value(m, 0.0, {0.0}, {2.0}, 1.0, -1.0) == doctest::Approx(4.0));
    // z = 0 kills the drift term
    CHECK(hamiltonian_value(m, 0.0, {0.0}, {0.0}, 1.0, -1.0) == 0.0);
}

TEST_CASE("isaacs_infsup on single-point grids") {
    const GameModel m = builtin_model("zero");
    const HamiltonianResult r = isaacs_infsup(m, 0.5, {0.0}, {1.0});
    CHECK(r.value_infsup == r.value_supinf);
    CHECK(r.gap == 0.0);
    CHECK(r.ustar_index == 0);
    CHECK(r.vstar_index == 0);
    CHECK(saddle_pointwise_check(m, 0.5, {0.0}, {1.0}, r));
}

TEST_CASE("separated drift has zero gap; value frozen by enumeration") {
    const GameModel m = separated_drift_model();
    // Brute force over the 3x3 grid: H = z(a-b); inf_a sup_b = 0 for any z.
    for (double z : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
        const HamiltonianResult r = isaacs_infsup(m, 0.0, {0.0}, {z});
        CHECK(r.value_infsup == doctest::Approx(0.0));
        CHECK(r.value_supinf == doctest::Approx(0.0));
        CHECK(r.gap == 0.0);
        CHECK(saddle_pointwise_check(m, 0.0, {0.0}, {z}, r));
    }
}

TEST_CASE("matching pennies: no pure saddle on the 2x2 grid") {
    const GameModel m = builtin_model("matching-pennies");
    const HamiltonianResult r = isaacs_infsup(m, 0.0, {0.0}, {0.7});
    // Hand enumeration of Gamma = a*b on {-1,1}^2.
    CHECK(r.value_infsup == doctest::Approx(1.0));
    CHECK(r.value_supinf == doctest::Approx(-1.0));
    CHECK(r.gap == doctest::Approx(2.0));
    CHECK_FALSE(saddle_pointwise_check(m, 0.0, {0.0}, {0.7}, r));
}

TEST_CASE("gap audit: zero on separated families, two on matching pennies") {
    CHECK(isaacs_gap_audit(separated_drift_model(), 500, 5.0, 17) == 0.0);
    CHECK(isaacs_gap_audit(builtin_model("isaacs-separated-1d"), 500, 5.0, 17) == 0.0);
    CHECK(isaacs_gap_audit(builtin_model("zero"), 100, 5.0, 17) == 0.0);
    CHECK(isaacs_gap_audit(builtin_model("matching-pennies"), 100, 5.0, 17) ==
          doctest::Approx(2.0));
}

TEST_CASE("require_isaacs refuses matching pennies") {
    CHECK_THROWS_AS(require_isaacs(builtin_model("matching-pennies")), IsaacsError);
    CHECK_NOTHROW(require_isaacs(builtin_model("isaacs-separated-1d")));
}

TEST_CASE("weak duality holds at random samples") {
    const GameModel m = builtin_model("isaacs-separated-1d");
    for (std::uint32_t i = 0; i < 200; ++i) {
        const double t = uniform_at(5, RngStream::Misc, i, 0, 0);
        const Vec x{4.0 * (2.0 * uniform_at(5, RngStream::Misc, i, 1, 0) - 1.0)};
        const Vec z{3.0 * (2.0 * uniform_at(5, RngStream::Misc, i, 2, 0) - 1.0)};
        const HamiltonianResult r = isaacs_infsup(m, t, x, z);
        CHECK(r.value_supinf <= r.value_infsup + 1e-15);
        CHECK(r.gap >= 0.0);
        CHECK(r.ustar_index < m.control_grid_a.size());
        CHECK(r.vstar_index < m.control_grid_b.size());
    }
}

TEST_CASE("H is affine in z") {
    const GameModel m = builtin_model("isaacs-separated-1d");
    const double t = 0.4;
    const Vec x{0.7};
    const double a = m.control_grid_a[3], b = m.control_grid_b[17];
    const double gamma = m.running_cost(t, x, a, b);
    for (std::uint32_t i = 0; i < 50; ++i) {
        const double alpha = 2.0 * uniform_at(6, RngStream::Misc, i, 0, 0) - 0.5;
        const double beta = 2.0 * uniform_at(6, RngStream::Misc, i, 1, 0) - 0.5;
        const Vec z1{1.3}, z2{-0.8};
        const Vec mix{alpha * z1[0] + beta * z2[0]};
        const double lhs = hamiltonian_value(m, t, x, mix, a, b);
        const double rhs = alpha * hamiltonian_value(m, t, x, z1, a, b) +
                           beta * hamiltonian_value(m, t, x, z2, a, b) +
                           (1.0 - alpha - beta) * gamma;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("H* is Lipschitz in z with the sigma-inverse-drift factor") {
    const GameModel m = builtin_model("isaacs-separated-1d");
    const double t = 0.2;
    const Vec x{-0.4};
    // Lipschitz factor: max over the grid of |sigma^{-1} f|.
    double factor = 0.0;
    for (double a : m.control_grid_a)
        for (double b : m.control_grid_b)
            factor = std::max(factor, std::fabs(m.drift(t, x, a, b)[0]));
    for (std::uint32_t i = 0; i < 100; ++i) {
        const Vec z1{4.0 * (2.0 * uniform_at(8, RngStream::Misc, i, 0, 0) - 1.0)};
        const Vec z2{4.0 * (2.0 * uniform_at(8, RngStream::Misc, i, 1, 0) - 1.0)};
        const double h1 = isaacs_infsup(m, t, x, z1).value_infsup;
        const double h2 = isaacs_infsup(m, t, x, z2).value_infsup;
        CHECK(std::fabs(h1 - h2) <= factor * std::fabs(z1[0] - z2[0]) + 1e-12);
    }
}

TEST_CASE("selector determinism") {
    const GameModel m = builtin_model("isaacs-separated-1d");
    const HamiltonianResult a = isaacs_infsup(m, 0.3, {0.2}, {0.9});
    const HamiltonianResult b = isaacs_infsup(m, 0.3, {0.2}, {0.9});
    CHECK(a.ustar_index == b.ustar_index);
    CHECK(a.vstar_index == b.vstar_index);
    CHECK(a.value_infsup == b.value_infsup);
}
