#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "delay_ode_oracle.hpp"
#include "fglab/solver.hpp"
#include "test_support.hpp"

using namespace fglab;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
using testsupport::Rng;

namespace {

Spectrum heat_spectrum(std::size_t n) {
    return Spectrum::from_rule([](std::size_t j) {
        const double k = static_cast<double>(j + 1);
        return k * k * M_PI * M_PI;
    }, n);
}

// Pure decay: no forcing, no windows, single-mode history.
ProblemSpec decay_problem() {
    TimePartition part;
    part.horizon = 1.0;
    part.delay = 0.1;
    HistoryFunction hist;
    hist.value = [](double) { return SpectralVector::unit(0); };
    Nonlinearity f;
    f.value = [](double, const SegmentFn&) { return SpectralVector(); };
    f.lipschitz = 0.0;
    return ProblemSpec{heat_spectrum(4), part, hist, f, {}};
}

// Scalar delayed forcing on mode 0: the mode-0 coefficient satisfies
// a' = -pi^2 a + c a(t - tau), all other modes stay zero.
ProblemSpec scalar_delay_problem(double c) {
    TimePartition part;
    part.horizon = 1.0;
    part.delay = 0.1;
    HistoryFunction hist;
    hist.value = [](double theta) { return SpectralVector::unit(0, 0.5 * (1.0 + theta / 0.1)); };
    Nonlinearity f;
    f.value = [c](double, const SegmentFn& seg) { return SpectralVector::unit(0, c * seg(-0.1)[0]); };
    f.lipschitz = c / M_PI + 0.01;
    return ProblemSpec{heat_spectrum(4), part, hist, f, {}};
}

ProblemSpec toy_impulse_problem() {
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
    ImpulseMap h1;
    h1.value = [](double t, const SpectralVector& v) { return project(0, (0.3 + 0.05 * t) * v); };
    h1.lipschitz = 0.35;
    h1.uniform_bound = 0.6;
    ImpulseMap h2;
    h2.value = [](double t, const SpectralVector& v) { return project(0, (0.4 + 0.05 * t) * v); };
    h2.lipschitz = 0.45;
    h2.uniform_bound = 0.6;
    return ProblemSpec{heat_spectrum(16), part, hist, f, {h1, h2}};
}

}  // namespace

TEST_CASE("phi functions at distinguished arguments") {
    CHECK(phi1(0.0) == 1.0);
    CHECK(phi2(0.0) == 0.5);
    CHECK(phi1(-1.0) == Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
    // Continuity across the Taylor threshold |z| = 1e-3.
    for (double sign : {-1.0, 1.0}) {
        CHECK(phi1(sign * 1.0000001e-3) == Approx(phi1(sign * 0.9999999e-3)).margin(1e-9));
        CHECK(phi2(sign * 1.0000001e-3) == Approx(phi2(sign * 0.9999999e-3)).margin(1e-9));
    }
}

TEST_CASE("quadrature weights match frozen high-precision values") {
    const StepWeights a = quadrature_weights(M_PI * M_PI, 1e-2);
    CHECK(a.left == Approx(0.0046828753393017036).epsilon(1e-14));
    CHECK(a.right == Approx(0.0048394864891727753).epsilon(1e-14));

    const StepWeights stiff = quadrature_weights(1e4 * M_PI * M_PI, 1e-2);
    CHECK(stiff.left == Approx(1.0265982254684335e-8).epsilon(1e-13));
    CHECK(stiff.right == Approx(1.0121852381979093e-5).epsilon(1e-13));

    const StepWeights tiny = quadrature_weights(M_PI * M_PI, 1e-9);  // Taylor branch
    CHECK(tiny.left == Approx(4.9999999671013229e-10).epsilon(1e-14));
    CHECK(tiny.right == Approx(4.9999999835506553e-10).epsilon(1e-14));

    CHECK_THROWS_AS(quadrature_weights(0.0, 1e-2), std::domain_error);
    CHECK_THROWS_AS(quadrature_weights(1.0, 0.0), std::domain_error);
}

TEST_CASE("weight identities") {
    Rng rng(0x5eed0101ull);
    for (int trial = 0; trial < 200; ++trial) {
        const double lambda = std::exp(rng.uniform(0.0, std::log(1e6)));
        const double h = std::exp(rng.uniform(std::log(1e-6), std::log(1e-1)));
        const StepWeights w = quadrature_weights(lambda, h);
        // Constant forcing: w_left + w_right integrates e^{-lambda(h-s)} exactly.
        CHECK(w.left + w.right == Approx(-std::expm1(-lambda * h) / lambda).epsilon(1e-13));
        CHECK(w.left > 0.0);
        CHECK(w.right > 0.0);
        CHECK(w.left <= w.right);  // the kernel weights the right endpoint more
    }
    // Scale invariance: same lambda*h gives weights proportional to h.
    const StepWeights base = quadrature_weights(M_PI * M_PI, 1e-2);
    const StepWeights scaled = quadrature_weights(100.0 * M_PI * M_PI, 1e-4);
    CHECK(scaled.left == Approx(1e-2 * base.left).epsilon(1e-14));
    CHECK(scaled.right == Approx(1e-2 * base.right).epsilon(1e-14));
}

TEST_CASE("weights agree with a midpoint Riemann sum") {
    const double lambda = M_PI * M_PI;
    const double h = 1e-2;
    const std::size_t panels = 20000;
    const double w = h / static_cast<double>(panels);
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < panels; ++i) {
        const double s = (static_cast<double>(i) + 0.5) * w;
        const double kernel = std::exp(-lambda * (h - s));
        left += w * kernel * (1.0 - s / h);
        right += w * kernel * (s / h);
    }
    const StepWeights q = quadrature_weights(lambda, h);
    CHECK(q.left == Approx(left).margin(1e-12));
    CHECK(q.right == Approx(right).margin(1e-12));
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SolverConfig bad = cfg;
    bad.dt = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.refine = 3;
    CHECK_THROWS_WITH(bad.validate(), ContainsSubstring("power of two"));
    bad = cfg;
    bad.alpha = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.picard_max_iter = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("unforced flow reproduces pure semigroup decay") {
    const ProblemSpec p = decay_problem();
    SolverConfig cfg;
    cfg.dim = 2;
    cfg.dt = 1e-3;
    const Trajectory y = solve(p, cfg);

    REQUIRE(y.pieces.size() == 1);
    const TrajectoryPiece& piece = y.pieces[0];
    double worst = 0.0;
    for (std::size_t k = 0; k <= piece.steps; ++k) {
        const double exact = std::exp(-M_PI * M_PI * piece.node_time(k));
        worst = std::max(worst, std::abs(piece.values[k][0] - exact) * M_PI);
    }
    CHECK(worst < 1e-12);
    // Between nodes the stored values interpolate linearly; curvature of the
    // exponential bounds the gap by pi^4 dt^2 / 8.
    CHECK(std::abs(y.value(0.0105).coeffs[0] - std::exp(-M_PI * M_PI * 0.0105)) < 2e-5);
    CHECK(y.picard[0].sweeps <= 2);
    CHECK(y.certified);
}

TEST_CASE("scalar delayed forcing matches the method-of-steps reference") {
    const double c = 0.8;
    const ProblemSpec p = scalar_delay_problem(c);
    SolverConfig cfg;
    cfg.dim = 2;
    cfg.dt = 1e-3;
    const Trajectory y = solve(p, cfg);

    const testsupport::DelayOdeOracle oracle(M_PI * M_PI, c, 0.1,
                                             [](double theta) { return 0.5 * (1.0 + theta / 0.1); }, 1.0, 1e-4);
    const TrajectoryPiece& piece = y.pieces.at(0);
    double worst = 0.0;
    for (std::size_t k = 0; k <= piece.steps; ++k) {
        const double t = piece.node_time(k);
        worst = std::max(worst, std::abs(piece.values[k][0] - oracle(t)) * M_PI);
    }
    CHECK(worst < 1e-4);
    CHECK(worst > 0.0);  // the discretizations genuinely differ
    CHECK(y.picard[0].sweeps <= 30);
    for (std::size_t j = 1; j < 4; ++j)
        CHECK(alpha_norm(p.spectrum, 0.0, SpectralVector::unit(j, piece.values.back()[j])) == 0.0);
}

TEST_CASE("grid refinement converges at second order") {
    const ProblemSpec p = scalar_delay_problem(0.8);
    SolverConfig cfg;
    cfg.dim = 2;

    auto sup_gap = [&](const Trajectory& coarse, const Trajectory& fine) {
        const TrajectoryPiece& a = coarse.pieces[0];
        const TrajectoryPiece& b = fine.pieces[0];
        REQUIRE(b.steps == 2 * a.steps);
        double worst = 0.0;
        for (std::size_t k = 0; k <= a.steps; ++k)
            worst = std::max(worst, alpha_norm(p.spectrum, 0.5, a.values[k] - b.values[2 * k]));
        return worst;
    };

    cfg.dt = 4e-3;
    const Trajectory y4 = solve(p, cfg);
    cfg.dt = 2e-3;
    const Trajectory y2 = solve(p, cfg);
    cfg.dt = 1e-3;
    const Trajectory y1 = solve(p, cfg);

    const double e42 = sup_gap(y4, y2);
    const double e21 = sup_gap(y2, y1);
    const double order = std::log2(e42 / e21);
    CHECK(order >= 1.7);
    CHECK(order <= 2.5);
}

TEST_CASE("refine multiplier nests grids bit-exactly") {
    const ProblemSpec p = scalar_delay_problem(0.8);
    SolverConfig cfg;
    cfg.dim = 2;
    cfg.dt = 2e-3;
    const Trajectory base = solve(p, cfg);
    cfg.refine = 4;
    const Trajectory fine = solve(p, cfg);
    REQUIRE(fine.pieces[0].steps == 4 * base.pieces[0].steps);
    for (std::size_t k = 0; k <= base.pieces[0].steps; ++k)
        CHECK(base.pieces[0].node_time(k) == fine.pieces[0].node_time(4 * k));
}

TEST_CASE("impulse windows: piece layout, left limits, prescription") {
    const ProblemSpec p = toy_impulse_problem();
    SolverConfig cfg;
    cfg.dim = 8;
    cfg.dt = 1e-3;
    const Trajectory y = solve(p, cfg);

    REQUIRE(y.pieces.size() == 5);
    CHECK_FALSE(y.pieces[0].impulse);
    CHECK(y.pieces[1].impulse);
    CHECK(y.pieces[1].window_index == 1);
    CHECK_FALSE(y.pieces[2].impulse);
    CHECK(y.pieces[3].impulse);
    CHECK(y.pieces[3].window_index == 2);
    CHECK_FALSE(y.pieces[4].impulse);
    CHECK(y.pieces[1].start == 0.3);
    CHECK(y.pieces[1].end == 0.4);
    CHECK(y.certified);
    CHECK(y.warnings.empty());

    // Left limits are the final grid values of the preceding flow pieces.
    REQUIRE(y.onset_left_limits.size() == 2);
    CHECK(alpha_norm(p.spectrum, 0.5, y.left_limit(1) - y.pieces[0].values.back()) == 0.0);
    CHECK(alpha_norm(p.spectrum, 0.5, y.left_limit(2) - y.pieces[2].values.back()) == 0.0);

    // Window pieces carry exactly h(t_k, projected left limit).
    const TrajectoryPiece& win = y.pieces[1];
    const SpectralVector arg = project(cfg.dim, y.left_limit(1));
    for (std::size_t k = 0; k <= win.steps; ++k) {
        const SpectralVector expect = p.impulses[0].value(win.node_time(k), arg);
        CHECK(alpha_norm(p.spectrum, 0.5, win.values[k] - expect) == 0.0);
    }

    // Left continuity at the onset, prescription value just after.
    CHECK(alpha_norm(p.spectrum, 0.5, y.value(0.3) - y.left_limit(1)) == 0.0);
    CHECK(alpha_norm(p.spectrum, 0.5, y.value(std::nextafter(0.3, 1.0)) - win.values[0]) < 1e-9);

    // Picard diagnostics stay within the certified contraction regime.
    const AssumptionReport rep = compute_assumption_report(p, 0.5);
    for (const PicardStats& st : y.picard) {
        CHECK(st.sweeps <= 30);
        CHECK(st.residual < cfg.picard_tol);
        CHECK(st.worst_ratio <= rep.contraction_constant + 0.05);
    }
}

TEST_CASE("converged trajectories satisfy the mild equation branches") {
    const ProblemSpec p = toy_impulse_problem();
    SolverConfig cfg;
    cfg.dim = 8;
    cfg.dt = 2e-3;
    const Trajectory y = solve(p, cfg);
    CHECK(mild_defect(p, y) <= 2.0 * cfg.picard_tol);
}

TEST_CASE("solve is deterministic down to the last bit") {
    const ProblemSpec p = toy_impulse_problem();
    SolverConfig cfg;
    cfg.dim = 8;
    cfg.dt = 2e-3;
    const Trajectory a = solve(p, cfg);
    const Trajectory b = solve(p, cfg);
    REQUIRE(a.pieces.size() == b.pieces.size());
    for (std::size_t i = 0; i < a.pieces.size(); ++i) {
        REQUIRE(a.pieces[i].values.size() == b.pieces[i].values.size());
        for (std::size_t k = 0; k < a.pieces[i].values.size(); ++k) {
            const auto& va = a.pieces[i].values[k].coeffs;
            const auto& vb = b.pieces[i].values[k].coeffs;
            REQUIRE(va.size() == vb.size());
            CHECK(std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) == 0);
        }
    }
}

TEST_CASE("picard non-convergence carries diagnostics") {
    ProblemSpec p = scalar_delay_problem(0.8);
    p.forcing.value = [](double, const SegmentFn& seg) { return 50.0 * seg(0.0); };
    p.forcing.lipschitz = 0.1;  // deliberately understated: the ledger cannot save a divergent iteration
    SolverConfig cfg;
    cfg.dim = 2;
    cfg.dt = 1e-2;
    cfg.picard_max_iter = 5;
    try {
        solve(p, cfg);
        FAIL("expected PicardError");
    } catch (const PicardError& err) {
        CHECK(err.interval == 0);
        CHECK(err.sweeps == 5);
        CHECK(err.residual > 0.0);
        CHECK_THAT(err.what(), ContainsSubstring("flow interval 0"));
    }
}

TEST_CASE("uncertified gates produce warnings but still solve") {
    ProblemSpec p = scalar_delay_problem(0.8);
    p.forcing.lipschitz = 5.0;  // declared so large the flow gate fails; the true forcing is mild
    SolverConfig cfg;
    cfg.dim = 2;
    cfg.dt = 1e-2;
    const Trajectory y = solve(p, cfg);
    CHECK_FALSE(y.certified);
    REQUIRE_FALSE(y.warnings.empty());
    CHECK_THAT(y.warnings.front(), ContainsSubstring("uncertified"));
}

TEST_CASE("forcing sees only the projected segment") {
    ProblemSpec p = toy_impulse_problem();
    std::size_t seen = 0;
    p.forcing.value = [&seen](double, const SegmentFn& seg) {
        seen = std::max(seen, seg(-0.05).size());
        return SpectralVector();
    };
    HistoryFunction rich;
    rich.value = [](double) {
        SpectralVector v = SpectralVector::zero(12);
        for (std::size_t j = 0; j < 12; ++j) v.coeffs[j] = 1.0 / static_cast<double>((j + 1) * (j + 1));
        return v;
    };
    p.history = rich;
    SolverConfig cfg;
    cfg.dim = 3;
    cfg.dt = 1e-2;
    solve(p, cfg);
    CHECK(seen == 4);  // modes 0..dim survive the projection
}

TEST_CASE("solve rejects unresolvable Galerkin dimensions") {
    const ProblemSpec p = toy_impulse_problem();
    SolverConfig cfg;
    cfg.dim = 16;  // spectrum resolves modes 0..15 only
    CHECK_THROWS_AS(solve(p, cfg), std::invalid_argument);
}
