#include <doctest.h>

#include "segrelab/error.hpp"
#include "segrelab/model.hpp"

#include <cmath>
#include <random>

using namespace segrelab;

namespace {

// Composite Simpson with many panels; f is piecewise smooth on [0, s].
double simpson(const ReactionModel& m, double s) {
    const int n = 20000;
    const double h = s / n;
    double acc = m.value(0) + m.value(s);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4 : 2) * m.value(i * h);
    return acc * h / 3;
}

} // namespace

TEST_CASE("reaction values") {
    const ReactionModel lg(ReactionKind::logistic);
    CHECK(lg.value(0) == 0);
    CHECK(lg.value(2) == -2);
    const ReactionModel sm(ReactionKind::smooth_logistic);
    CHECK(sm.value(-1) == 0);
    CHECK(sm.derivative(0) == 0);
    CHECK((sm.value(1e-6) - sm.value(0)) / 1e-6 == doctest::Approx(0).scale(1).epsilon(1e-5));
    const ReactionModel z(ReactionKind::zero);
    CHECK(z.value(0.3) == 0);
    CHECK(z.lipschitz_bound() == 0);
    CHECK(parse_reaction_kind(to_string(ReactionKind::smooth_logistic)) == ReactionKind::smooth_logistic);
    CHECK_THROWS_AS(parse_reaction_kind("cubic"), PreconditionError);
}

TEST_CASE("reaction sign structure") {
    for (auto kind : {ReactionKind::logistic, ReactionKind::smooth_logistic}) {
        const ReactionModel m(kind);
        for (int i = 0; i <= 500; ++i) {
            const double s = -2.0 + 5.0 * i / 500;
            if (s <= 0) CHECK(m.value(s) == 0);
            if (s > 1) CHECK(m.value(s) < 0);
        }
        CHECK(m.value(1) == doctest::Approx(0).scale(1));
    }
}

TEST_CASE("antiderivative") {
    const ReactionModel lg(ReactionKind::logistic);
    CHECK(lg.antiderivative(1) == doctest::Approx(1.0 / 6));
    CHECK(lg.antiderivative(0.5) == doctest::Approx(1.0 / 12));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0, 2);
    for (auto kind : {ReactionKind::logistic, ReactionKind::smooth_logistic, ReactionKind::zero}) {
        const ReactionModel m(kind);
        CHECK(m.antiderivative(0) == 0);
        for (int i = 0; i < 50; ++i) {
            const double s = U(rng);
            CHECK(std::abs(m.antiderivative(s) - simpson(m, s)) < 1e-10);
        }
    }
}

TEST_CASE("lipschitz bound holds on random pairs") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0, 1);
    for (auto kind : {ReactionKind::logistic, ReactionKind::smooth_logistic, ReactionKind::zero}) {
        const ReactionModel m(kind);
        const double L = m.lipschitz_bound();
        for (int i = 0; i < 1000; ++i) {
            const double a = U(rng), b = U(rng);
            CHECK(std::abs(m.value(a) - m.value(b)) <= L * std::abs(a - b) + 1e-15);
        }
    }
}

TEST_CASE("boundary schedule") {
    const BoundarySchedule st(Trace{0.3, 0.7});
    CHECK(st.at(5.0) == Trace{0.3, 0.7});
    CHECK(st.rate(1.0) == Trace{0.0, 0.0});

    const BoundarySchedule d(Trace{0.5}, Trace{0.1}, 1.0);
    CHECK(d.at(0.0)[0] == 0.5);
    CHECK(d.rate(0.0)[0] == 0.0);
    CHECK(d.at(2.0)[0] == doctest::Approx(0.5 + 0.4 * std::exp(-2.0)));
    CHECK(d.at(2.0)[0] == doctest::Approx(0.55413).epsilon(1e-5));

    // Derivatives against central differences.
    const BoundarySchedule e(Trace{0.4, 0.2}, Trace{0.3, -0.2}, 1.5);
    for (double t : {0.3, 1.0, 4.0}) {
        const double h = 1e-4;
        for (int b = 0; b < 2; ++b) {
            const double fd = (e.at(t + h)[b] - e.at(t - h)[b]) / (2 * h);
            const double fd2 = (e.rate(t + h)[b] - e.rate(t - h)[b]) / (2 * h);
            CHECK(e.rate(t)[b] == doctest::Approx(fd).epsilon(1e-7));
            CHECK(e.accel(t)[b] == doctest::Approx(fd2).epsilon(1e-7));
        }
    }
    CHECK_THROWS_AS(BoundarySchedule(Trace{0.9}, Trace{1.0}, 1.0), PreconditionError);
    CHECK_THROWS_AS(BoundarySchedule(Trace{0.5}, Trace{0.1}, 0.0), PreconditionError);
    CHECK_THROWS_AS(BoundarySchedule(Trace{1.2}), PreconditionError);
    CHECK_THROWS_AS(st.at(-1.0), PreconditionError);
}

TEST_CASE("segregated bumps") {
    const Grid g = Grid::line(1.0, 99);
    const Bump bu{{0.25, 0}, 0.15, 1.0};
    const Bump bv{{0.75, 0}, 0.15, 1.0};
    const InitialData d = make_segregated_bumps(g, {bu}, {bv});
    double umax = 0, umin = 1;
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(d.u0[k] * d.v0[k] == 0);
        umax = std::max(umax, d.u0[k]);
        umin = std::min(umin, d.u0[k]);
    }
    CHECK(umax == doctest::Approx(1.0));
    CHECK(umin == 0);
    CHECK(d.segregated);
    CHECK(bu(0.25) == 1.0);
    CHECK(bu(0.4) == 0.0);

    const Bump overlap{{0.5, 0}, 0.3, 1.0};
    CHECK_THROWS_AS(make_segregated_bumps(g, {bu}, {overlap}), PreconditionError);

    // A bump touching the boundary must agree with an explicit trace.
    const Bump edge{{0.0, 0}, 0.3, 1.0};
    const Trace zero{0.0, 0.0};
    CHECK_THROWS_AS(make_segregated_bumps(g, {edge}, {bv}, &zero, &zero), PreconditionError);
    const Trace one_left{1.0, 0.0};
    CHECK_NOTHROW(make_segregated_bumps(g, {edge}, {bv}, &one_left, &zero));
}

TEST_CASE("initial data validation") {
    const Grid g = Grid::line(1.0, 9);
    const Trace z{0.0, 0.0};
    const InitialData r = make_random_data(g, 42, z, z);
    CHECK_NOTHROW(validate_initial_data(r, BoundarySchedule(z), BoundarySchedule(z)));
    const InitialData r2 = make_random_data(g, 42, z, z);
    CHECK(r.u0.values == r2.u0.values);

    InitialData bad = r;
    bad.u0[3] = 1.5;
    CHECK_THROWS_AS(validate_initial_data(bad, BoundarySchedule(z), BoundarySchedule(z)), PreconditionError);
    CHECK_THROWS_AS(validate_initial_data(r, BoundarySchedule(Trace{0.5, 0.0}), BoundarySchedule(z)), PreconditionError);
    InitialData claim = r;
    claim.segregated = true;
    CHECK_THROWS_AS(validate_initial_data(claim, BoundarySchedule(z), BoundarySchedule(z)), PreconditionError);
}
