#include "common.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace quitpath;

TEST_CASE("single-quitter stage masses convert exactly") {
    Vec<Rational> y(8, Rational(0));
    y[0b010] = Rational(1, 50);
    auto xi = lemma_xi(y, 3, Rational(1, 10));
    CHECK(xi == MixedProfile<Rational>{Rational(0), Rational(1, 50), Rational(0)});
}

TEST_CASE("multi-quitter stages keep the absorption probability") {
    Vec<double> y(8, 0.0);
    y[0b001] = 0.004;
    y[0b100] = 0.002;
    y[0b101] = 1e-6;  // simultaneous-quit crumb, allowed by the hypothesis
    auto xi = lemma_xi(y, 3, 0.01);
    double p_y = 0.004 + 0.002 + 1e-6;
    CHECK(absorb_prob(xi) == Catch::Approx(p_y).epsilon(1e-12));
    // coordinates proportional to the single-quitter masses
    CHECK(xi[0] / xi[2] == Catch::Approx(2.0).epsilon(1e-9));
    CHECK(xi[1] == 0.0);
}

TEST_CASE("hypothesis violations are reported") {
    Vec<double> y(4, 0.0);
    SECTION("total mass too large") {
        y[0b01] = 0.5;
        CHECK_THROWS_AS(lemma_xi(y, 2, 0.01), LemmaHypothesisError);
    }
    SECTION("joint quit mass out of proportion") {
        y[0b01] = 1e-6;
        y[0b11] = 1e-6;  // as big as the singleton mass itself
        CHECK_THROWS_AS(lemma_xi(y, 2, 0.01), LemmaHypothesisError);
    }
}

TEST_CASE("the stage grid follows jumps and caps at the cycle seam") {
    auto path = load_fixture_path<double>("ftv3_cycle.json", 3);
    auto grid = build_grid(path, 10);
    REQUIRE(grid.size() >= 2);
    // conditional steps of 1/10 until the pass boundary at 7/8, then repeat
    CHECK(grid[0].s == 0.0);
    CHECK(grid[1].s == Catch::Approx(0.1));
    double seam = 7.0 / 8.0;
    bool seam_present = false;
    for (const auto& pt : grid) seam_present |= std::abs(pt.s - seam) < 1e-12;
    CHECK(seam_present);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i].s > grid[i - 1].s);
}

TEST_CASE("discretization absorbs fully and keeps outcome proportions") {
    auto g = convert_game<Rational, double>(load_fixture_game<Rational>("ftv3.json"));
    auto path = load_fixture_path<double>("ftv3_cycle.json", 3);
    auto x = discretize(g, path, 50);
    CHECK(x.tail == TailKind::Cycle);
    CHECK(is_absorbing(g, x));

    // long-run outcome mass should approach the path totals 4/7 : 2/7 : 1/7
    auto st = absorption_stats(g, x, 4000);
    Vec<double> mass(8, 0.0);
    for (const auto& stage : st.stage_outcome)
        for (int a = 1; a < 8; ++a) mass[a] += stage[a];
    CHECK(mass[0b001] == Catch::Approx(4.0 / 7.0).margin(2e-2));
    CHECK(mass[0b010] == Catch::Approx(2.0 / 7.0).margin(2e-2));
    CHECK(mass[0b100] == Catch::Approx(1.0 / 7.0).margin(2e-2));
}

TEST_CASE("jump blocks become single stages with the exact marginals") {
    auto g = convert_game<Rational, double>(load_fixture_game<Rational>("ftv3.json"));
    AbsorptionPath<double> p;
    Vec<double> xi{0.3, 0.0, 0.2};
    p.prefix.push_back(PathBlock<double>::jump(xi));
    p.prefix.push_back(PathBlock<double>::flow({0.0, 1.0, 0.0}, 1.0));
    p.validate();
    auto x = discretize(g, p, 10);
    REQUIRE_FALSE(x.prefix.empty());
    CHECK(x.prefix[0][0] == Catch::Approx(0.3));
    CHECK(x.prefix[0][2] == Catch::Approx(0.2));
}

TEST_CASE("a terminal flow turns into a stationary tail") {
    auto g = convert_game<Rational, double>(load_fixture_game<Rational>("ftv3.json"));
    AbsorptionPath<double> p;
    p.prefix.push_back(PathBlock<double>::flow({1.0, 0.0, 0.0}, 1.0));
    p.validate();
    auto x = discretize(g, p, 20);
    CHECK(x.tail == TailKind::RepeatLast);
    REQUIRE_FALSE(x.prefix.empty());
    CHECK(x.prefix.back()[0] == Catch::Approx(1.0 / 20.0));
}

TEST_CASE("the distance bound holds along the whole grid") {
    auto g = convert_game<Rational, double>(load_fixture_game<Rational>("ftv3.json"));
    auto path = load_fixture_path<double>("ftv3_cycle.json", 3);
    for (int k : {10, 100}) {
        auto x = discretize(g, path, k);
        auto rep = verify_bound(g, path, k, x);
        INFO("k = " << k);
        CHECK(rep.holds);
        CHECK(rep.worst_ratio <= 1.0);
        CHECK(rep.points > 0);
    }
}
