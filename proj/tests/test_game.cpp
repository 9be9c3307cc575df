#include "common.hpp"

#include <catch_amalgamated.hpp>

using namespace quitpath;

TEST_CASE("rational parsing round-trips") {
    CHECK(parse_rational("3") == Rational(3));
    CHECK(parse_rational("-1/2") == Rational(-1, 2));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(rational_to_string(Rational(-5, 12)) == "-5/12");
    CHECK(parse_rational(rational_to_string(Rational(47, 8))) == Rational(47, 8));
}

TEST_CASE("three-player fixture loads with the min-minus-one fill") {
    auto g = load_fixture_game<Rational>("ftv3.json");
    REQUIRE(g.n == 3);
    CHECK(g.player_names[0] == "P1");
    CHECK(g.single_quit(0) == Vec<Rational>{0, 2, -1});
    CHECK(g.single_quit(1) == Vec<Rational>{-1, 0, 2});
    CHECK(g.single_quit(2) == Vec<Rational>{2, -1, 0});
    // quitters {1,2}: coordinatewise min of the two single-quit rows, minus 1
    CHECK(g.payoffs[0b011] == Vec<Rational>{-2, -1, -2});
    CHECK(g.payoffs[0b111] == Vec<Rational>{-2, -2, -2});
}

TEST_CASE("absorption probability matches the product formula") {
    MixedProfile<Rational> xi{Rational(1, 2), Rational(1, 3), Rational(1, 4)};
    // 1 - (1/2)(2/3)(3/4) = 3/4
    CHECK(absorb_prob(xi) == Rational(3, 4));
    CHECK(absorb_prob(MixedProfile<Rational>{Rational(0), Rational(0), Rational(0)}) ==
          Rational(0));
}

TEST_CASE("outcome distribution sums to one and prices the absorbing payoff") {
    auto g = load_fixture_game<Rational>("ftv3.json");
    MixedProfile<Rational> xi{Rational(1, 5), Rational(1, 7), Rational(2, 3)};

    Rational total(0);
    Vec<Rational> mass(3, Rational(0));
    Rational absorbed(0);
    for (ActionProfile a = 0; a < 8; ++a) {
        Rational p = profile_prob(xi, a);
        total += p;
        if (a == 0) continue;
        absorbed += p;
        for (int i = 0; i < 3; ++i) mass[i] += p * g.payoffs[a][i];
    }
    CHECK(total == Rational(1));
    CHECK(absorbed == absorb_prob(xi));

    auto r = absorbing_payoff(g, xi);
    auto m = absorbing_mass_payoff(g, xi);
    for (int i = 0; i < 3; ++i) {
        CHECK(m[i] == mass[i]);
        CHECK(r[i] * absorbed == mass[i]);
    }
}

TEST_CASE("degenerate conditional payoff is rejected") {
    auto g = load_fixture_game<Rational>("ftv3.json");
    MixedProfile<Rational> nobody{Rational(0), Rational(0), Rational(0)};
    CHECK_THROWS_AS(absorbing_payoff(g, nobody), DegenerateProfileError);
}

TEST_CASE("normalization shifts each player's own-quit payoff to zero") {
    auto g = load_fixture_game<Rational>("five.json");
    CHECK(is_normalized(g));  // fixtures ship with r^i(Q^i) = 0

    auto skew = g;
    skew.payoffs[0b00001][0] += Rational(3);   // r^1(Q^1) = 3
    skew.payoffs[0b00100][2] -= Rational(1, 2);
    CHECK_FALSE(is_normalized(skew));

    auto gn = normalize(skew);
    CHECK(is_normalized(gn));
    // a per-player constant shift: differences between outcomes are preserved
    for (ActionProfile a = 1; a <= gn.all_quit(); ++a)
        for (int i = 0; i < gn.n; ++i)
            CHECK(gn.payoffs[a][i] - gn.continue_payoff[i] ==
                  skew.payoffs[a][i] - skew.continue_payoff[i]);
    CHECK(gn.payoffs[0b00001][0] == Rational(0));
    CHECK(gn.payoffs[0b00010][0] == g.payoffs[0b00010][0] - Rational(3));
}

TEST_CASE("quit matrix columns are the single-quitter payoff vectors") {
    auto g = load_fixture_game<Rational>("ftv3.json");
    auto r = quit_matrix(g);
    REQUIRE(r.rows == 3);
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.column(j) == g.single_quit(int(j)));
    CHECK(r(0, 1) == Rational(-1));
    CHECK(r(2, 0) == Rational(-1));
}

TEST_CASE("scalar conversion preserves the payoff table") {
    auto g = load_fixture_game<Rational>("five.json");
    auto gd = convert_game<Rational, double>(g);
    CHECK(gd.payoffs[0b10000][3] == Catch::Approx(-5.0 / 12.0));
    CHECK(gd.payoffs[0b01000][4] == Catch::Approx(10.0 / 7.0));
    auto gr = convert_game<double, Rational>(gd);
    CHECK(gr.payoffs[0b00001][1] == Rational(2));
}
