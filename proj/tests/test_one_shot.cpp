#include "common.hpp"

#include <catch_amalgamated.hpp>

using namespace quitpath;

namespace {

// direct enumeration over the other players' outcomes, own action fixed
Rational oracle_pure(const QuittingGame<Rational>& g, const Vec<Rational>& cont, PlayerId i,
                     bool quit, const MixedProfile<Rational>& xi) {
    Rational total(0);
    for (ActionProfile others = 0; others < (ActionProfile(1) << g.n); ++others) {
        if ((others >> i) & 1) continue;
        Rational p(1);
        for (int j = 0; j < g.n; ++j) {
            if (j == i) continue;
            p *= ((others >> j) & 1) ? xi[j] : Rational(1) - xi[j];
        }
        ActionProfile a = others | (quit ? (ActionProfile(1) << i) : 0);
        total += p * (a == 0 ? cont[i] : g.payoffs[a][i]);
    }
    return total;
}

}  // namespace

TEST_CASE("pure deviation payoffs match outcome enumeration") {
    auto g = load_fixture_game<Rational>("ftv3.json");
    Vec<Rational> cont{Rational(0), Rational(1), Rational(0)};
    OneShotGame<Rational> os{&g, cont};
    MixedProfile<Rational> xi{Rational(1, 3), Rational(0), Rational(1, 4)};
    for (int i = 0; i < 3; ++i) {
        CHECK(pure_dev_payoff(os, i, StageAction::Quit, xi) == oracle_pure(g, cont, i, true, xi));
        CHECK(pure_dev_payoff(os, i, StageAction::Continue, xi) ==
              oracle_pure(g, cont, i, false, xi));
    }
}

TEST_CASE("mixed payoff is the convex combination of the pure actions") {
    auto g = load_fixture_game<Rational>("ftv3.json");
    Vec<Rational> cont{Rational(-1, 2), Rational(2), Rational(1, 3)};
    OneShotGame<Rational> os{&g, cont};
    MixedProfile<Rational> xi{Rational(2, 7), Rational(1, 2), Rational(1, 9)};
    auto v = mixed_payoff(os, xi);
    for (int i = 0; i < 3; ++i) {
        Rational q = pure_dev_payoff(os, i, StageAction::Quit, xi);
        Rational c = pure_dev_payoff(os, i, StageAction::Continue, xi);
        CHECK(v[i] == xi[i] * q + (Rational(1) - xi[i]) * c);
    }
}

TEST_CASE("eps-perfectness reduces to the pure deviations") {
    auto g = load_fixture_game<Rational>("ftv3.json");
    // continuation = the canonical cycle value at its start
    Vec<Rational> cont{Rational(0), Rational(1), Rational(0)};
    OneShotGame<Rational> os{&g, cont};

    SECTION("indifferent quitter is 0-perfect") {
        // P1 quits alone: quit pays r^1(Q^1) = 0 = gamma^1, any mix is optimal
        MixedProfile<Rational> xi{Rational(1, 2), Rational(0), Rational(0)};
        auto w = is_eps_perfect(os, xi, 0, Rational(0));
        CHECK(w.perfect);
        CHECK(min_eps_perfect(os, xi, 0) == Rational(0));
    }

    SECTION("profitable deviation is flagged with its exact margin") {
        // P3 facing P1's quit: continuing pays (1/2)(-1) + (1/2)(0) = -1/2,
        // quitting pays (1/2) r^3(Q^{13}) + (1/2) r^3(Q^3) = (1/2)(-2) = -1
        MixedProfile<Rational> xi{Rational(1, 2), Rational(0), Rational(1)};
        Rational margin = min_eps_perfect(os, xi, 2);
        CHECK(margin == Rational(1, 2));
        CHECK_FALSE(is_eps_perfect(os, xi, 2, Rational(1, 4)).perfect);
        CHECK(is_eps_perfect(os, xi, 2, Rational(1, 2)).perfect);
    }

    SECTION("payoff is linear in the own quit probability") {
        // so every mixture is dominated by the better pure action, and the
        // minimal eps also counts losses of actions played with positive
        // probability
        MixedProfile<Rational> xi{Rational(1, 3), Rational(1, 5), Rational(0)};
        for (int i = 0; i < 3; ++i) {
            Rational q = pure_dev_payoff(os, i, StageAction::Quit, xi);
            Rational c = pure_dev_payoff(os, i, StageAction::Continue, xi);
            Rational best = q > c ? q : c;
            Rational own = mixed_payoff(os, xi)[i];
            CHECK(own <= best);

            Rational expect = best - own;  // gain condition
            if (xi[i] > Rational(0) && own - q > expect) expect = own - q;
            if (xi[i] < Rational(1) && own - c > expect) expect = own - c;
            CHECK(expect == min_eps_perfect(os, xi, i));

            for (int k = 0; k <= 10; ++k) {
                auto dev = xi;
                dev[i] = Rational(k, 10);
                CHECK(mixed_payoff(os, dev)[i] <= best);
            }
        }
    }
}
