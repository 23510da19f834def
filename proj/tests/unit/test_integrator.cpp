#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "vsr/errors.hpp"
#include "vsr/integrator.hpp"
#include "vsr/oracle.hpp"

using namespace vsr;

namespace {

TimeSeries run(int n_half, DecayRates rates, InitialKind kind = InitialKind::v_standard, SolverConfig cfg = {},
               std::span<const double> snaps = {}) {
    const StateSpace s(n_half);
    const Generator g(s, rates);
    return integrate(g, initial_distribution(s, kind), cfg, snaps);
}

double probability(const TimeSeries& ts, std::size_t snap, int n, int m) {
    return ts.snapshots.at(snap).distribution.at(StateSpace(ts.n_half).index_of(n, m));
}

}  // namespace

TEST_SUITE("integrator") {
    TEST_CASE("reference probabilities from an independent expm") {
        // tests/reference/derive.py, scipy expm on a separately built generator.
        const std::vector<double> snaps = {0.3, 1.0};
        const auto ts = run(2, {1.0, 0.1}, InitialKind::v_standard, {}, snaps);
        REQUIRE(ts.snapshots.size() == 2);
        CHECK(probability(ts, 0, 2, 4) == doctest::Approx(0.51685133449169918).epsilon(1e-9));
        CHECK(probability(ts, 0, 0, 0) == doctest::Approx(0.0010437184467699118).epsilon(1e-6));
        CHECK(probability(ts, 1, 2, 4) == doctest::Approx(0.11080315836233387).epsilon(1e-9));
        CHECK(probability(ts, 1, 0, 0) == doctest::Approx(0.039131491787317119).epsilon(1e-8));

        const std::vector<double> snap3 = {0.25};
        const auto ts3 = run(3, {1.0, 1.0}, InitialKind::v_standard, {}, snap3);
        CHECK(probability(ts3, 0, 3, 6) == doctest::Approx(0.22313016014842982).epsilon(1e-9));
        CHECK(probability(ts3, 0, 0, 0) == doctest::Approx(0.025428158148596426).epsilon(1e-8));
    }

    TEST_CASE("sampled intensities agree with the reference") {
        SolverConfig cfg;
        cfg.t_max = 1.0;
        cfg.sample_count = 11;  // samples land on 0, 0.1, ..., 1.0
        const auto ts = run(2, {1.0, 0.1}, InitialKind::v_standard, cfg);
        REQUIRE(ts.times.size() == 11);
        CHECK(ts.times[3] == doctest::Approx(0.3));
        CHECK(ts.mode(Mode::first).intensity[3] == doctest::Approx(1.8271818872706529).epsilon(1e-8));
        CHECK(ts.mode(Mode::second).intensity[3] == doctest::Approx(0.3094224046306866).epsilon(1e-8));
        CHECK(ts.mode(Mode::first).intensity[10] == doctest::Approx(0.8215998581948436).epsilon(1e-8));
        CHECK(ts.mode(Mode::second).intensity[10] == doctest::Approx(0.43073270845830319).epsilon(1e-8));
        CHECK(ts.t_end == 1.0);
        CHECK_FALSE(ts.completed);
    }

    TEST_CASE("two atoms follow the closed form") {
        const std::vector<double> snaps = {0.1, 0.5, 1.0, 2.0, 4.0};
        for (const DecayRates r : {DecayRates{1, 1}, DecayRates{1, 0.1}, DecayRates{0.3, 2.0}}) {
            const auto ts = run(1, r, InitialKind::v_standard, {}, snaps);
            for (std::size_t i = 0; i < snaps.size(); ++i) {
                const auto cf = oracle::two_atom_closed_form(r.gamma1, r.gamma2, snaps[i]);
                CHECK(std::abs(probability(ts, i, 1, 2) - cf.p12) < 1e-9);
                CHECK(std::abs(probability(ts, i, 1, 1) - cf.p11) < 1e-9);
                CHECK(std::abs(probability(ts, i, 0, 1) - cf.p01) < 1e-9);
                CHECK(std::abs(probability(ts, i, 0, 0) - cf.p00) < 1e-9);
            }
        }
    }

    TEST_CASE("probability is conserved and stays non-negative") {
        std::mt19937 rng(424242);
        std::uniform_int_distribution<int> pick_n(1, 30);
        std::uniform_real_distribution<double> pick_rate(0.05, 2.0);
        for (int trial = 0; trial < 12; ++trial) {
            DecayRates r{pick_rate(rng), pick_rate(rng)};
            if (trial % 4 == 1) r.gamma2 = 0.0;
            if (trial % 4 == 2) r.gamma1 = 0.0;
            const auto kind = r.gamma1 == 0.0 ? InitialKind::two_level_unconventional : InitialKind::v_standard;
            const int n_half = pick_n(rng);
            CAPTURE(n_half);
            CAPTURE(r.gamma1);
            CAPTURE(r.gamma2);
            const auto ts = run(n_half, r, kind);
            CHECK(ts.completed);
            for (double m : ts.total_mass) CHECK(std::abs(m - 1.0) <= 1e-10);
            CHECK(ts.stats.min_probability >= -1e-11);
            CHECK(ts.ground_mass.back() >= 1.0 - 1e-6);
            for (const auto& ms : ts.modes) {
                CHECK(std::is_sorted(ms.area.begin(), ms.area.end()));
                CHECK(std::all_of(ms.intensity.begin(), ms.intensity.end(), [](double v) { return v >= 0.0; }));
            }
            CHECK(std::is_sorted(ts.ground_mass.begin(), ts.ground_mass.end()));
        }
    }

    TEST_CASE("photon counting") {
        const auto v = run(20, {1.0, 0.1});
        CHECK(v.mode(Mode::first).area.back() == doctest::Approx(20.0).epsilon(1e-6));
        CHECK(v.mode(Mode::second).area.back() == doctest::Approx(20.0).epsilon(1e-6));

        const auto u = run(20, {0.0, 0.1}, InitialKind::two_level_unconventional);
        CHECK(u.mode(Mode::second).area.back() == doctest::Approx(20.0).epsilon(1e-6));
        for (double a : u.mode(Mode::first).area) CHECK(a == 0.0);
        CHECK(u.mode(Mode::second).intensity.front() == doctest::Approx(0.1 * 20 * 21));

        const auto c = run(20, {1.0, 0.0}, InitialKind::two_level_conventional);
        for (double i : c.mode(Mode::second).intensity) CHECK(i == 0.0);
        CHECK(c.mode(Mode::first).area.back() == doctest::Approx(20.0).epsilon(1e-6));
    }

    TEST_CASE("raw intensities drop the rate weight") {
        SolverConfig raw;
        raw.raw_eq2_intensity = true;
        const auto a = run(4, {1.0, 0.5});
        const auto b = run(4, {1.0, 0.5}, InitialKind::v_standard, raw);
        REQUIRE(a.times == b.times);
        for (std::size_t i = 0; i < a.size(); i += 97) {
            CHECK(b.mode(Mode::second).intensity[i] * 0.5 ==
                  doctest::Approx(a.mode(Mode::second).intensity[i]).epsilon(1e-12));
            CHECK(b.mode(Mode::first).intensity[i] == doctest::Approx(a.mode(Mode::first).intensity[i]));
        }
        CHECK(b.mode(Mode::second).area.back() == doctest::Approx(4.0 / 0.5).epsilon(1e-6));
    }

    TEST_CASE("uniform grid with the exact end state last") {
        SolverConfig cfg;
        cfg.sample_count = 500;
        const auto ts = run(6, {1.0, 0.5}, InitialKind::v_standard, cfg);
        REQUIRE(ts.size() == 500);
        CHECK(ts.times.front() == 0.0);
        CHECK(ts.times.back() == ts.t_end);
        const double dt = ts.t_end / 499.0;
        for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts.times[i] - ts.times[i - 1] == doctest::Approx(dt));
        const double p00 = ts.final_distribution[StateSpace(6).index_of(0, 0)];
        CHECK(ts.ground_mass.back() == doctest::Approx(p00).epsilon(1e-12));
    }

    TEST_CASE("snapshots land exactly on the requested times") {
        const std::vector<double> snaps = {0.0, 0.05, 0.05, 0.7};
        const auto ts = run(3, {1.0, 0.1}, InitialKind::v_standard, {}, snaps);
        REQUIRE(ts.snapshots.size() == 4);
        for (std::size_t i = 0; i < snaps.size(); ++i) CHECK(ts.snapshots[i].time == snaps[i]);
        CHECK(ts.snapshots[1].distribution == ts.snapshots[2].distribution);
    }

    TEST_CASE("budget and argument errors") {
        SolverConfig tiny;
        tiny.max_steps = 5;
        CHECK_THROWS_AS(run(10, {1.0, 0.1}, InitialKind::v_standard, tiny), NumericalError);

        SolverConfig bad;
        bad.rel_tol = 0.0;
        CHECK_THROWS_AS(run(2, {1.0, 0.1}, InitialKind::v_standard, bad), ValidationError);
        bad = {};
        bad.sample_count = 1;
        CHECK_THROWS_AS(run(2, {1.0, 0.1}, InitialKind::v_standard, bad), ValidationError);
        bad = {};
        bad.t_max = -1.0;
        CHECK_THROWS_AS(run(2, {1.0, 0.1}, InitialKind::v_standard, bad), ValidationError);

        const StateSpace s(2);
        const Generator g(s, {1.0, 0.1});
        CHECK_THROWS_AS(integrate(g, Distribution(3, 0.0), {}), ValidationError);
        const std::vector<double> unsorted = {0.5, 0.1};
        CHECK_THROWS_AS(integrate(g, initial_distribution(s, InitialKind::v_standard), {}, unsorted),
                        ValidationError);
    }

    TEST_CASE("explicit horizon truncates the run") {
        SolverConfig cfg;
        cfg.t_max = 0.01;
        const auto ts = run(30, {1.0, 0.1}, InitialKind::v_standard, cfg);
        CHECK(ts.t_end == 0.01);
        CHECK_FALSE(ts.completed);
    }
}
