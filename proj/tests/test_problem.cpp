#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fglab/problem.hpp"
#include "fglab/trajectory.hpp"

using namespace fglab;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

Spectrum heat_spectrum(std::size_t n) {
    return Spectrum::from_rule([](std::size_t j) {
        const double k = static_cast<double>(j + 1);
        return k * k * M_PI * M_PI;
    }, n);
}

// Two impulse windows, single-mode ramp history, delayed linear forcing and
// mode-0 impulse maps.  All declared constants are honest upper bounds for the
// callables, and the ledger values below were frozen from an independent
// high-precision evaluation of the same closed forms.
ProblemSpec toy_problem() {
    TimePartition part;
    part.horizon = 1.0;
    part.delay = 0.1;
    part.onset = {0.3, 0.6};
    part.release = {0.4, 0.7};

    HistoryFunction hist;
    hist.value = [](double theta) { return SpectralVector::unit(0, 0.5 * (1.0 + theta / 0.1)); };

    Nonlinearity f;
    f.value = [](double, const SegmentFn& seg) { return 0.1 * seg(-0.1); };
    f.lipschitz = 0.2;
    f.holder_exponent = 1.0;
    f.forcing_at_zero = 0.0;

    ImpulseMap h1;
    h1.value = [](double, const SpectralVector& v) { return project(0, 0.3 * v); };
    h1.lipschitz = 0.3;
    h1.uniform_bound = 0.6;
    ImpulseMap h2;
    h2.value = [](double, const SpectralVector& v) { return project(0, 0.4 * v); };
    h2.lipschitz = 0.4;
    h2.uniform_bound = 0.6;

    return ProblemSpec{heat_spectrum(16), part, hist, f, {h1, h2}};
}

}  // namespace

TEST_CASE("partition validation names the offending pair") {
    TimePartition p;
    p.horizon = 1.0;
    p.delay = 0.1;

    p.onset = {0.0};
    p.release = {0.2};
    CHECK_THROWS_WITH(p.validate(), ContainsSubstring("onset[1]"));

    p.onset = {0.3, 0.35};
    p.release = {0.4, 0.5};
    CHECK_THROWS_WITH(p.validate(), ContainsSubstring("onset[2]"));

    p.onset = {0.3};
    p.release = {0.3};
    CHECK_THROWS_WITH(p.validate(), ContainsSubstring("release[1]"));

    p.onset = {0.3};
    p.release = {1.0};
    CHECK_THROWS_WITH(p.validate(), ContainsSubstring("horizon"));

    p.onset = {0.3};
    p.release = {0.4, 0.5};
    CHECK_THROWS_WITH(p.validate(), ContainsSubstring("counts differ"));

    p.onset = {};
    p.release = {};
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("partition spans") {
    const ProblemSpec p = toy_problem();
    CHECK(p.partition.window_count() == 2);
    CHECK(p.partition.flow_span(0) == std::pair{0.0, 0.3});
    CHECK(p.partition.flow_span(1) == std::pair{0.4, 0.6});
    CHECK(p.partition.flow_span(2) == std::pair{0.7, 1.0});
    CHECK(p.partition.window_span(1) == std::pair{0.3, 0.4});
    CHECK(p.partition.window_span(2) == std::pair{0.6, 0.7});
    CHECK_THROWS_AS(p.partition.flow_span(3), std::out_of_range);
    CHECK_THROWS_AS(p.partition.window_span(0), std::out_of_range);
    CHECK_THROWS_AS(p.partition.window_span(3), std::out_of_range);
}

TEST_CASE("problem validation counts impulse maps") {
    ProblemSpec p = toy_problem();
    p.impulses.pop_back();
    CHECK_THROWS_WITH(p.validate(), ContainsSubstring("one impulse map per window"));
}

TEST_CASE("assumption ledger matches frozen closed forms") {
    const ProblemSpec p = toy_problem();
    const AssumptionReport r = compute_assumption_report(p, 0.5);

    CHECK(r.history_sup_norm == Approx(1.5707963267948966).epsilon(1e-13));
    CHECK(r.semigroup_gap == Approx(1.5707150802039975).epsilon(1e-13));
    CHECK(r.forcing_at_zero == 0.0);

    REQUIRE(r.flow_contraction.size() == 3);
    CHECK(r.flow_contraction[0] == Approx(0.093963325761249084).epsilon(1e-13));
    CHECK(r.flow_contraction[1] == Approx(0.13288420965723968).epsilon(1e-13));
    CHECK(r.flow_contraction[2] == Approx(0.17155277699214136).epsilon(1e-13));

    REQUIRE(r.absorption.size() == 3);
    CHECK(r.absorption[0] == Approx(1.8122756529244490).epsilon(1e-13));
    CHECK(r.absorption[1] == Approx(2.5124145648707713).epsilon(1e-13));
    CHECK(r.absorption[2] == Approx(2.6118235757377577).epsilon(1e-13));

    REQUIRE(r.interval_contraction.size() == 3);
    CHECK(r.interval_contraction[0] == Approx(0.093963325761249084).epsilon(1e-13));
    CHECK(r.interval_contraction[1] == Approx(0.43288420965723968).epsilon(1e-13));
    CHECK(r.interval_contraction[2] == Approx(0.57155277699214136).epsilon(1e-13));

    CHECK(r.contraction_constant == Approx(0.57155277699214136).epsilon(1e-13));
    CHECK(r.ball_radius == Approx(3.1526734633196808).epsilon(1e-13));
    CHECK(r.forcing_envelope == Approx(1.1446939580229155).epsilon(1e-13));

    REQUIRE(r.stage_bounds.size() == 3);
    CHECK(r.stage_bounds[0] == Approx(2.1085925831681006).epsilon(1e-13));
    CHECK(r.stage_bounds[1] == Approx(1.3605587595564631).epsilon(1e-13));
    CHECK(r.stage_bounds[2] == Approx(1.5818771365247842).epsilon(1e-13));
    CHECK(r.uniform_state_bound == Approx(2.1085925831681006).epsilon(1e-13));

    CHECK(r.flow_gates_pass);
    CHECK(r.contraction_gate_pass);
    CHECK(r.certified());

    CHECK_THROWS_AS(compute_assumption_report(p, 0.0), std::domain_error);
    CHECK_THROWS_AS(compute_assumption_report(p, 1.0), std::domain_error);
}

TEST_CASE("ledger reports gate failures without blocking") {
    ProblemSpec p = toy_problem();

    SECTION("flow gate failure leaves radius undefined") {
        p.forcing.lipschitz = 2.0;
        const AssumptionReport r = compute_assumption_report(p, 0.5);
        CHECK_FALSE(r.flow_gates_pass);
        CHECK_FALSE(r.certified());
        CHECK(std::isnan(r.ball_radius));
        CHECK(std::isnan(r.forcing_envelope));
        CHECK(std::isnan(r.uniform_state_bound));
        CHECK_THROWS_AS(graded_state_bound(p, 0.5, r), std::domain_error);
    }

    SECTION("reset Lipschitz above one fails only the contraction gate") {
        p.impulses[1].lipschitz = 1.2;
        const AssumptionReport r = compute_assumption_report(p, 0.5);
        CHECK(r.flow_gates_pass);
        CHECK_FALSE(r.contraction_gate_pass);
        CHECK(r.contraction_constant >= 1.2);
        CHECK(std::isfinite(r.ball_radius));
    }
}

TEST_CASE("graded state bound at beta = alpha reproduces the ledger") {
    const ProblemSpec p = toy_problem();
    const AssumptionReport r = compute_assumption_report(p, 0.5);
    CHECK(graded_state_bound(p, 0.5, r) == Approx(r.uniform_state_bound).epsilon(1e-13));
    // Stronger grading costs more: the bound grows with beta.
    CHECK(graded_state_bound(p, 0.75, r) > graded_state_bound(p, 0.5, r));
    CHECK_THROWS_AS(graded_state_bound(p, 1.0, r), std::domain_error);
}

TEST_CASE("declared forcing Lipschitz constant is honest under sampling") {
    const ProblemSpec p = toy_problem();
    const ConstantCheck c = validate_forcing_lipschitz(p, 0.5, 1000, 0x5eedull, 1.0);
    CHECK(c.pass);
    CHECK(c.samples == 1000);
    // True ratio for this forcing is 0.1 / pi ~ 0.0318, far below 0.2 but
    // nearly attained by mode-0 dominated samples.
    CHECK(c.measured <= 0.1 / M_PI + 1e-12);
    CHECK(c.measured > 0.02);

    ProblemSpec lying = toy_problem();
    lying.forcing.lipschitz = 1e-3;
    CHECK_FALSE(validate_forcing_lipschitz(lying, 0.5, 1000, 0x5eedull, 1.0).pass);
}

TEST_CASE("declared impulse constants are honest under sampling") {
    const ProblemSpec p = toy_problem();
    for (std::size_t w : {std::size_t{1}, std::size_t{2}}) {
        const ConstantCheck lip = validate_impulse_lipschitz(p, w, 0.5, 1000, 0x5eedull, 1.0);
        CHECK(lip.pass);
        CHECK(lip.measured > 0.1);
        const ConstantCheck bnd = validate_impulse_bound(p, w, 0.5, 1000, 0x5eedull, 0.4);
        CHECK(bnd.pass);
        CHECK(bnd.measured > 0.05);
    }
    CHECK_THROWS_AS(validate_impulse_lipschitz(p, 0, 0.5, 10, 1, 1.0), std::out_of_range);
    CHECK_THROWS_AS(validate_impulse_bound(p, 3, 0.5, 10, 1, 1.0), std::out_of_range);
}

namespace {

Trajectory ramp_trajectory() {
    Trajectory y;
    y.partition.horizon = 1.0;
    y.partition.delay = 0.1;
    y.partition.onset = {0.3};
    y.partition.release = {0.4};
    y.history.value = [](double theta) { return SpectralVector::unit(0, 0.5 * (1.0 + theta / 0.1)); };
    y.alpha = 0.5;

    TrajectoryPiece flow1{0.0, 0.3, 3, false, 0, {}};
    for (std::size_t k = 0; k <= 3; ++k)
        flow1.values.push_back(SpectralVector::unit(0, flow1.node_time(k)));
    TrajectoryPiece reset{0.3, 0.4, 2, true, 1, {}};
    for (std::size_t k = 0; k <= 2; ++k)
        reset.values.push_back(SpectralVector::unit(0, 9.0));
    TrajectoryPiece flow2{0.4, 1.0, 7, false, 0, {}};
    for (std::size_t k = 0; k <= 7; ++k)
        flow2.values.push_back(SpectralVector::unit(0, flow2.node_time(k)));

    y.pieces = {flow1, reset, flow2};
    y.onset_left_limits = {SpectralVector::unit(0, 0.3)};
    return y;
}

}  // namespace

TEST_CASE("trajectory evaluation covers history, flow, reset and boundaries") {
    const Trajectory y = ramp_trajectory();

    CHECK(y.value(-0.05).coeffs[0] == Approx(0.25).epsilon(1e-15));
    CHECK(y.value(0.0).coeffs[0] == Approx(0.5).epsilon(1e-15));
    CHECK(y.value(0.15).coeffs[0] == Approx(0.15).epsilon(1e-14));
    CHECK(y.value(0.3).coeffs[0] == Approx(0.3).epsilon(1e-15));     // left continuity at onset
    CHECK(y.value(0.300001).coeffs[0] == Approx(9.0).epsilon(1e-15));
    CHECK(y.value(0.4).coeffs[0] == Approx(9.0).epsilon(1e-15));
    CHECK(y.value(0.73).coeffs[0] == Approx(0.73).epsilon(1e-13));
    CHECK(y.value(1.0).coeffs[0] == Approx(1.0).epsilon(1e-15));
    CHECK(y.value(1.0 + 1e-12).coeffs[0] == Approx(1.0).epsilon(1e-15));  // clamped within slack

    CHECK_THROWS_AS(y.value(-0.2), std::domain_error);
    CHECK_THROWS_AS(y.value(1.1), std::domain_error);

    CHECK(y.left_limit(1).coeffs[0] == Approx(0.3).epsilon(1e-15));
    CHECK_THROWS_AS(y.left_limit(0), std::out_of_range);
    CHECK_THROWS_AS(y.left_limit(2), std::out_of_range);
}

TEST_CASE("history segment anchors the delayed view") {
    const Trajectory y = ramp_trajectory();

    const HistorySegment mid = history_segment(y, 0.35);
    CHECK(mid(0.0).coeffs[0] == Approx(9.0).epsilon(1e-15));    // inside the reset window
    CHECK(mid(-0.1).coeffs[0] == Approx(0.25).epsilon(1e-14));  // reaches back into the flow

    const HistorySegment early = history_segment(y, 0.05);
    CHECK(early(-0.1).coeffs[0] == Approx(0.25).epsilon(1e-15));  // lands in the initial history

    const SegmentFn f = mid.fn();
    CHECK(f(-0.05).coeffs[0] == Approx(mid(-0.05).coeffs[0]).epsilon(1e-15));

    CHECK_THROWS_AS(mid(-0.2), std::domain_error);
    CHECK_THROWS_AS(mid(0.1), std::domain_error);
    CHECK_THROWS_AS(history_segment(y, -0.1), std::domain_error);
    CHECK_THROWS_AS(history_segment(y, 1.2), std::domain_error);
}

TEST_CASE("power-of-two refinement reproduces coarse node times exactly") {
    TrajectoryPiece coarse{0.4, 1.0, 7, false, 0, {}};
    TrajectoryPiece fine{0.4, 1.0, 28, false, 0, {}};
    for (std::size_t k = 0; k <= 7; ++k)
        CHECK(coarse.node_time(k) == fine.node_time(4 * k));
}
