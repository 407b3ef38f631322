#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fglab/fd_oracle.hpp"
#include "fglab/solver.hpp"

using namespace fglab;
using Catch::Matchers::ContainsSubstring;

namespace {

HeatInstancePtr silent_instance() {
    return make_heat_instance([](double r) { return std::exp(-r * r); }, [](double) { return 0.0; }, 4, 64);
}

}  // namespace

TEST_CASE("pure diffusion reproduces the separable closed form") {
    TimePartition part;
    part.horizon = 1.0;
    part.delay = 0.1;
    HistoryFunction hist;
    hist.value = [](double) { return SpectralVector::unit(0, 1.0); };

    FdConfig cfg;
    cfg.grid_points = 2000;
    cfg.dt = 1e-4;
    cfg.snapshot_times = {0.25, 1.0};
    const FdSolution sol = fd_oracle(*silent_instance(), part, hist, cfg);

    CHECK(sol.steps == 10000);
    REQUIRE(sol.times.size() == 2);
    for (double t : {0.25, 1.0}) {
        const double err = l2_distance_at(sol, t, SpectralVector::unit(0, std::exp(-M_PI * M_PI * t)));
        CHECK(err <= 1e-4);
        CHECK(err >= 0.0);
    }
    CHECK_THROWS_AS(sol.at(0.5), std::out_of_range);
}

TEST_CASE("zero data with zero forcing stays identically zero") {
    TimePartition part;
    part.horizon = 0.5;
    part.delay = 0.1;
    HistoryFunction hist;
    hist.value = [](double) { return SpectralVector(); };

    FdConfig cfg;
    cfg.grid_points = 200;
    cfg.dt = 1e-3;
    const FdSolution sol = fd_oracle(*silent_instance(), part, hist, cfg);
    for (double v : sol.values.back()) CHECK(v == 0.0);
}

TEST_CASE("full configuration cross-validates against the spectral solver") {
    const auto inst = default_heat_instance();
    const ProblemSpec p = default_heat_problem(inst);

    // Joint refinement: both discretizations refined together, distances shrink.
    double previous = 1e300;
    for (int level = 0; level < 3; ++level) {
        SolverConfig sc;
        sc.dim = 16u << level;
        sc.dt = 2e-3 / static_cast<double>(1 << level);
        const Trajectory y = solve(p, sc);

        FdConfig fc;
        fc.grid_points = 250u << level;
        fc.dt = 8e-4 / static_cast<double>(1 << level);
        const FdSolution sol = fd_oracle(*inst, p.partition, p.history, fc);

        const double dist = l2_distance_at(sol, 1.0, y.value(1.0));
        CHECK(dist < 1e-7);
        CHECK(dist < previous);
        previous = dist;
    }
    CHECK(previous < 1e-9);
}

TEST_CASE("snapshots land on the nearest grid node") {
    TimePartition part;
    part.horizon = 0.5;
    part.delay = 0.1;
    HistoryFunction hist;
    hist.value = [](double) { return SpectralVector::unit(0, 1.0); };

    FdConfig cfg;
    cfg.grid_points = 150;
    cfg.dt = 1e-3;
    cfg.snapshot_times = {0.30001, 0.1};
    const FdSolution sol = fd_oracle(*silent_instance(), part, hist, cfg);
    REQUIRE(sol.times.size() == 3);
    CHECK(sol.times[0] == 0.1);
    CHECK(sol.times[1] == 0.3);
    CHECK(sol.times[2] == 0.5);
    CHECK_NOTHROW(sol.at(0.3));
}

TEST_CASE("oracle validates its discretization") {
    const auto inst = silent_instance();
    TimePartition part;
    part.horizon = 1.0;
    part.delay = 0.1;
    part.onset = {0.3};
    part.release = {0.4};
    HistoryFunction hist;
    hist.value = [](double) { return SpectralVector::unit(0, 1.0); };

    FdConfig cfg;
    cfg.grid_points = 64;
    cfg.dt = 1e-3;
    CHECK_THROWS_WITH(fd_oracle(*inst, part, hist, cfg), ContainsSubstring("at least 100 grid points"));

    cfg.grid_points = 200;
    cfg.dt = 0.2;  // exceeds the delay
    CHECK_THROWS_WITH(fd_oracle(*inst, part, hist, cfg), ContainsSubstring("delay"));

    cfg.dt = 3e-4;  // horizon not an integer multiple
    CHECK_THROWS_WITH(fd_oracle(*inst, part, hist, cfg), ContainsSubstring("divide the horizon"));

    cfg.dt = 1.0 / 1024.0;  // nodes miss the window onset at 0.3
    CHECK_THROWS_WITH(fd_oracle(*inst, part, hist, cfg), ContainsSubstring("resolve the partition"));
}

TEST_CASE("instability guard rejects exploding runs") {
    const auto hot = make_heat_instance([](double) { return 1e9; }, [](double) { return 1.0; }, 4, 64);
    TimePartition part;
    part.horizon = 0.5;
    part.delay = 0.01;
    HistoryFunction hist;
    hist.value = [](double) { return SpectralVector::unit(0, 1.0); };

    FdConfig cfg;
    cfg.grid_points = 100;
    cfg.dt = 1e-3;
    CHECK_THROWS_WITH(fd_oracle(*hot, part, hist, cfg), ContainsSubstring("unstable"));
}
