#pragma once

#include "quitpath/game.hpp"

#include <string>

namespace quitpath {

/// The one-stage game G_Gamma(y): absorbing action profiles pay r(a),
/// the all-continue profile pays the continuation vector y.
template <class S>
struct OneShotGame {
    const QuittingGame<S>* game;
    Vec<S> continuation;
};

enum class StageAction { Quit, Continue };

/// Payoff to player i for the pure action against xi^{-i}.
/// `xi` is a full-length profile; coordinate i is ignored.
template <class S>
S pure_dev_payoff(const OneShotGame<S>& os, PlayerId i, StageAction action,
                  const MixedProfile<S>& xi) {
    MixedProfile<S> full = xi;
    if (action == StageAction::Quit) {
        full[i] = S(1);
        return absorbing_payoff(*os.game, full)[i];
    }
    full[i] = S(0);
    S p_others = absorb_prob(full);
    if (p_others == S(0)) return os.continuation[i];
    S absorbed = absorbing_payoff(*os.game, full)[i];
    return (S(1) - p_others) * os.continuation[i] + p_others * absorbed;
}

/// Expected payoff vector of G_Gamma(y) under the mixed profile xi.
template <class S>
Vec<S> mixed_payoff(const OneShotGame<S>& os, const MixedProfile<S>& xi) {
    const QuittingGame<S>& g = *os.game;
    Vec<S> out = absorbing_mass_payoff(g, xi);
    S cont = profile_prob(xi, 0);
    for (int i = 0; i < g.n; ++i) out[i] += cont * os.continuation[i];
    return out;
}

template <class S>
struct PerfectnessWitness {
    bool perfect = true;
    // worst margin by which a condition is violated; <= 0 when perfect.
    // margin > 0 means the profile is only (margin)-perfect.
    S margin = S(0);
    StageAction action = StageAction::Quit;
    bool gain_condition = true;  // true: could gain by deviating; false: plays a losing action
};

/// Checks the two eps-perfectness conditions for player i at xi in G_Gamma(y):
/// no action gains more than eps, and no action played with positive
/// probability loses more than eps. Ties count as perfect.
template <class S>
PerfectnessWitness<S> is_eps_perfect(const OneShotGame<S>& os, const MixedProfile<S>& xi,
                                     PlayerId i, const S& eps) {
    S quit_val = pure_dev_payoff(os, i, StageAction::Quit, xi);
    S cont_val = pure_dev_payoff(os, i, StageAction::Continue, xi);
    S mix_val = xi[i] * quit_val + (S(1) - xi[i]) * cont_val;

    PerfectnessWitness<S> w;
    auto consider = [&](const S& margin, StageAction a, bool gain) {
        if (margin > w.margin) {
            w.margin = margin;
            w.action = a;
            w.gain_condition = gain;
        }
    };
    consider(quit_val - mix_val - eps, StageAction::Quit, true);
    consider(cont_val - mix_val - eps, StageAction::Continue, true);
    if (xi[i] > S(0)) consider(mix_val - quit_val - eps, StageAction::Quit, false);
    if (xi[i] < S(1)) consider(mix_val - cont_val - eps, StageAction::Continue, false);
    w.perfect = !(w.margin > S(0));
    return w;
}

/// Smallest eps for which player i would be eps-perfect at xi.
template <class S>
S min_eps_perfect(const OneShotGame<S>& os, const MixedProfile<S>& xi, PlayerId i) {
    auto w = is_eps_perfect(os, xi, i, S(0));
    return w.margin > S(0) ? w.margin : S(0);
}

}  // namespace quitpath
