#pragma once

#include "quitpath/linalg.hpp"
#include "quitpath/scalar.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace quitpath {

using PlayerId = int;

/// Set of quitters encoded as a bitmask over player indices.
/// Mask 0 is the all-continue profile.
using ActionProfile = std::uint32_t;

inline int popcount(ActionProfile a) { return std::popcount(a); }

/// Per-player quit probabilities, xi in [0,1]^n.
template <class S>
using MixedProfile = Vec<S>;

struct DegenerateProfileError : std::runtime_error {
    DegenerateProfileError() : std::runtime_error("absorbing payoff undefined: p(xi) = 0") {}
};

/// A quitting game: n players, a payoff vector for every nonempty set of
/// simultaneous quitters, and a payoff vector for perpetual continuation.
template <class S>
struct QuittingGame {
    int n = 0;
    std::vector<std::string> player_names;
    // payoffs[mask] for mask in [1, 2^n), entry 0 unused
    std::vector<Vec<S>> payoffs;
    Vec<S> continue_payoff;

    static constexpr int kMaxPlayers = 16;

    QuittingGame() = default;
    explicit QuittingGame(int players)
        : n(players),
          payoffs(std::size_t(1) << players, Vec<S>(players, S(0))),
          continue_payoff(players, S(0)) {
        if (players < 1 || players > kMaxPlayers)
            throw std::invalid_argument("player count must be in [1,16]");
        player_names.reserve(players);
        for (int i = 0; i < players; ++i) player_names.push_back("P" + std::to_string(i + 1));
    }

    ActionProfile all_quit() const { return (ActionProfile(1) << n) - 1; }

    const Vec<S>& payoff(ActionProfile a) const {
        return a == 0 ? continue_payoff : payoffs[a];
    }

    /// Payoff vector when only player i quits.
    const Vec<S>& single_quit(PlayerId i) const { return payoffs[ActionProfile(1) << i]; }

    /// M = max absolute payoff entry; payoff paths live in [-M, M]^n.
    S payoff_bound() const {
        S m = max_abs(continue_payoff);
        for (ActionProfile a = 1; a <= all_quit(); ++a) {
            S v = max_abs(payoffs[a]);
            if (v > m) m = v;
        }
        return m;
    }
};

/// p(xi) = 1 - prod_i (1 - xi^i).
template <class S>
S absorb_prob(const MixedProfile<S>& xi) {
    S surv = S(1);
    for (const S& x : xi) surv *= (S(1) - x);
    return S(1) - surv;
}

/// xi(a): probability that exactly the players in `a` quit under xi.
template <class S>
S profile_prob(const MixedProfile<S>& xi, ActionProfile a) {
    S p = S(1);
    for (std::size_t i = 0; i < xi.size(); ++i)
        p *= (a >> i) & 1 ? xi[i] : S(1) - xi[i];
    return p;
}

/// r(xi): payoff conditional on absorption. Requires p(xi) > 0.
template <class S>
Vec<S> absorbing_payoff(const QuittingGame<S>& game, const MixedProfile<S>& xi) {
    S p = absorb_prob(xi);
    if (p == S(0)) throw DegenerateProfileError();
    Vec<S> acc(game.n, S(0));
    for (ActionProfile a = 1; a <= game.all_quit(); ++a) {
        S w = profile_prob(xi, a);
        if (w == S(0)) continue;
        const Vec<S>& r = game.payoffs[a];
        for (int i = 0; i < game.n; ++i) acc[i] += w * r[i];
    }
    for (int i = 0; i < game.n; ++i) acc[i] /= p;
    return acc;
}

/// Unnormalized absorbing payoff: sum_{a in A*} xi(a) r(a) = p(xi) r(xi).
template <class S>
Vec<S> absorbing_mass_payoff(const QuittingGame<S>& game, const MixedProfile<S>& xi) {
    Vec<S> acc(game.n, S(0));
    for (ActionProfile a = 1; a <= game.all_quit(); ++a) {
        S w = profile_prob(xi, a);
        if (w == S(0)) continue;
        const Vec<S>& r = game.payoffs[a];
        for (int i = 0; i < game.n; ++i) acc[i] += w * r[i];
    }
    return acc;
}

/// Shifts each player's payoffs so that r^i(Q^i, C^{-i}) = 0.
/// Best-response structure is unchanged.
template <class S>
QuittingGame<S> normalize(const QuittingGame<S>& game) {
    QuittingGame<S> out = game;
    for (int i = 0; i < game.n; ++i) {
        S shift = game.single_quit(i)[i];
        if (shift == S(0)) continue;
        for (ActionProfile a = 1; a <= game.all_quit(); ++a) out.payoffs[a][i] -= shift;
        out.continue_payoff[i] -= shift;
    }
    return out;
}

template <class S>
bool is_normalized(const QuittingGame<S>& game) {
    for (int i = 0; i < game.n; ++i)
        if (game.single_quit(i)[i] != S(0)) return false;
    return true;
}

/// R(Gamma): column j is the payoff vector when exactly player j quits.
template <class S>
Matrix<S> quit_matrix(const QuittingGame<S>& game) {
    Matrix<S> r(game.n, game.n);
    for (int j = 0; j < game.n; ++j) {
        const Vec<S>& col = game.single_quit(j);
        for (int i = 0; i < game.n; ++i) r(i, j) = col[i];
    }
    return r;
}

template <class Src, class Dst>
QuittingGame<Dst> convert_game(const QuittingGame<Src>& game) {
    QuittingGame<Dst> out(game.n);
    out.player_names = game.player_names;
    for (ActionProfile a = 1; a <= game.all_quit(); ++a)
        for (int i = 0; i < game.n; ++i)
            out.payoffs[a][i] = scalar_traits<Dst>::from_double(to_double(game.payoffs[a][i]));
    for (int i = 0; i < game.n; ++i)
        out.continue_payoff[i] = scalar_traits<Dst>::from_double(to_double(game.continue_payoff[i]));
    return out;
}

}  // namespace quitpath
