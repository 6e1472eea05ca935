#include <doctest.h>

#include "segrelab/error.hpp"
#include "segrelab/heatkernel.hpp"

#include <cmath>
#include <sstream>

using namespace segrelab;

namespace {

EigenSystem single(double lambda) {
    EigenSystem e;
    e.grid = Grid::line(1.0, 3);
    e.eigenvalues = {lambda};
    e.modes = {{1, 1}};
    return e;
}

} // namespace

TEST_CASE("semigroup norm") {
    const EigenSystem e = eigensystem(Grid::line(1.0, 63));
    const double l1 = e.lambda_min();
    CHECK(semigroup_norm(e, 1.0, 2.0) == doctest::Approx(l1 * std::exp(-l1 * 2.0)));
    for (double t : {1e-4, 1e-3, 3e-3}) {
        double brute = 0;
        for (double l : e.eigenvalues) brute = std::max(brute, l * std::exp(-l * t));
        CHECK(semigroup_norm(e, 1.0, t) == doctest::Approx(brute).epsilon(1e-14));
    }
    CHECK(semigroup_norm(e, 0.5, 1e-12) == doctest::Approx(std::sqrt(e.lambda_max())).epsilon(1e-6));
    CHECK_THROWS_AS(semigroup_norm(e, 1.0, 0.0), PreconditionError);

    // Nonincreasing past alpha / lambda_1.
    const double alpha = 0.7;
    double prev = semigroup_norm(e, alpha, alpha / l1);
    for (double t = alpha / l1; t < 3.0; t *= 1.1) {
        const double cur = semigroup_norm(e, alpha, t);
        CHECK(cur <= prev * (1 + 1e-14));
        prev = cur;
    }
}

TEST_CASE("single eigenvalue certificate") {
    const double lambda = 5.0;
    const DecayCertificate c = certify_decay(single(lambda), 1.0, lambda / 2, log_spaced(1e-3, 1e2, 200));
    CHECK(c.C_alpha == doctest::Approx(2.0 / std::exp(1.0)).epsilon(1e-10));
    CHECK(c.max_violation <= 0);
}

TEST_CASE("grid certificates") {
    const EigenSystem e = eigensystem(Grid::line(1.0, 255));
    const double l1 = e.lambda_min();
    const auto ts = log_spaced(1e-6, 10.0, 400);
    for (double alpha : {0.3, 0.5, 0.9}) {
        const DecayCertificate c = certify_decay(e, alpha, l1 / 2, ts);
        CHECK(c.max_violation <= 0);
        CHECK(c.C_alpha > 0);
        CHECK(std::isfinite(decay_integral(c)));
        CHECK(decay_integral(c) == doctest::Approx(c.C_alpha * std::tgamma(1 - alpha) / std::pow(l1 / 2, 1 - alpha)));
        for (double t : ts)
            CHECK(semigroup_norm(e, alpha, t) <= c.C_alpha * std::exp(-c.omega * t) * std::pow(t, -alpha));
    }
    DecayCertificate one = certify_decay(e, 1.0, l1 / 2, ts);
    CHECK(std::isinf(decay_integral(one)));
    CHECK_THROWS_AS(certify_decay(e, 0.5, l1, ts), PreconditionError);
    CHECK_THROWS_AS(certify_decay(e, 0.5, 0.0, ts), PreconditionError);
}

TEST_CASE("log spacing and csv") {
    const auto t = log_spaced(1e-2, 1e2, 5);
    REQUIRE(t.size() == 5);
    CHECK(t.front() == doctest::Approx(1e-2));
    CHECK(t[2] == doctest::Approx(1.0));
    CHECK(t.back() == doctest::Approx(1e2));
    CHECK_THROWS_AS(log_spaced(0, 1, 5), PreconditionError);

    std::ostringstream os;
    write_decay_csv(os, {certify_decay(single(4.0), 0.5, 2.0, t)});
    CHECK(os.str().rfind("alpha,omega,C_alpha,max_violation,lambda_min,lambda_max,grid_id\n", 0) == 0);
}
