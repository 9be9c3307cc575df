#pragma once

#include "quitpath/game.hpp"
#include "quitpath/one_shot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace quitpath {

enum class TailKind { AllContinue, RepeatLast, Cycle };

/// Stage-indexed strategy profile with a finite description:
/// explicit prefix stages followed by a tail rule.
template <class S>
struct BehaviorProfile {
    std::vector<MixedProfile<S>> prefix;
    TailKind tail = TailKind::AllContinue;
    std::vector<MixedProfile<S>> cycle;  // used when tail == Cycle

    int players() const {
        if (!prefix.empty()) return static_cast<int>(prefix[0].size());
        if (!cycle.empty()) return static_cast<int>(cycle[0].size());
        return 0;
    }

    /// Mixed profile played at stage n (1-based).
    const MixedProfile<S>& stage(std::size_t n) const {
        if (n == 0) throw std::invalid_argument("stages are 1-based");
        if (n <= prefix.size()) return prefix[n - 1];
        switch (tail) {
            case TailKind::RepeatLast:
                if (prefix.empty()) throw std::invalid_argument("RepeatLast with empty prefix");
                return prefix.back();
            case TailKind::Cycle:
                if (cycle.empty()) throw std::invalid_argument("Cycle tail with no stages");
                return cycle[(n - prefix.size() - 1) % cycle.size()];
            case TailKind::AllContinue:
            default:
                break;
        }
        all_continue_.assign(players(), S(0));
        return all_continue_;
    }

    /// Profile shifted to start at stage n (drops stages 1..n-1).
    BehaviorProfile shifted(std::size_t n) const {
        BehaviorProfile out;
        out.tail = tail;
        out.cycle = cycle;
        if (n <= prefix.size() + 1) {
            out.prefix.assign(prefix.begin() + (n - 1), prefix.end());
            if (tail == TailKind::RepeatLast && out.prefix.empty() && !prefix.empty())
                out.prefix = {prefix.back()};
            return out;
        }
        std::size_t past = n - prefix.size() - 1;  // stages consumed inside the tail
        switch (tail) {
            case TailKind::AllContinue:
                out.prefix.clear();
                return out;
            case TailKind::RepeatLast:
                out.prefix = {prefix.back()};
                return out;
            case TailKind::Cycle: {
                std::size_t off = past % cycle.size();
                out.prefix.clear();
                std::rotate(out.cycle.begin(), out.cycle.begin() + off, out.cycle.end());
                return out;
            }
        }
        return out;
    }

  private:
    mutable MixedProfile<S> all_continue_;
};

/// Distribution of the absorption stage and absorbing action profile
/// up to a finite horizon, plus the survival mass past the horizon.
template <class S>
struct AbsorptionStats {
    std::vector<S> stage_absorb_prob;            // p(x_n), per stage
    std::vector<Vec<S>> stage_outcome;           // unconditional mass per quitter mask (index over A*)
    S survival = S(1);                           // P(theta > horizon)
};

template <class S>
AbsorptionStats<S> absorption_stats(const QuittingGame<S>& game, const BehaviorProfile<S>& x,
                                    std::size_t horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    AbsorptionStats<S> st;
    S surv = S(1);
    for (std::size_t n = 1; n <= horizon; ++n) {
        const MixedProfile<S>& xi = x.stage(n);
        S p = absorb_prob(xi);
        st.stage_absorb_prob.push_back(p);
        Vec<S> mass(std::size_t(1) << game.n, S(0));
        if (p > S(0)) {
            for (ActionProfile a = 1; a <= game.all_quit(); ++a) mass[a] = surv * profile_prob(xi, a);
        }
        st.stage_outcome.push_back(std::move(mass));
        surv *= (S(1) - p);
    }
    st.survival = surv;
    return st;
}

/// True if the profile absorbs with probability 1. Exact: the tail rule
/// makes the infinite product computable.
template <class S>
bool is_absorbing(const QuittingGame<S>&, const BehaviorProfile<S>& x) {
    S surv = S(1);
    for (const auto& xi : x.prefix) surv *= (S(1) - absorb_prob(xi));
    if (surv == S(0)) return true;
    switch (x.tail) {
        case TailKind::AllContinue:
            return false;
        case TailKind::RepeatLast:
            return absorb_prob(x.prefix.back()) > S(0);
        case TailKind::Cycle: {
            S beta = S(1);
            for (const auto& xi : x.cycle) beta *= (S(1) - absorb_prob(xi));
            return beta < S(1);
        }
    }
    return false;
}

/// gamma(x): expected payoff. Exact closed form via the tail's fixed point,
/// so `tol` is never consumed by truncation for the supported tail rules.
template <class S>
Vec<S> payoff(const QuittingGame<S>& game, const BehaviorProfile<S>& x) {
    // tail value = expected payoff of the tail played from a fresh start
    Vec<S> tail_value(game.n, S(0));
    switch (x.tail) {
        case TailKind::AllContinue:
            tail_value = game.continue_payoff;
            break;
        case TailKind::RepeatLast: {
            const MixedProfile<S>& xi = x.prefix.back();
            tail_value = absorb_prob(xi) > S(0) ? absorbing_payoff(game, xi) : game.continue_payoff;
            break;
        }
        case TailKind::Cycle: {
            S beta = S(1);
            Vec<S> mass(game.n, S(0));
            for (const auto& xi : x.cycle) {
                Vec<S> m = absorbing_mass_payoff(game, xi);
                for (int i = 0; i < game.n; ++i) mass[i] += beta * m[i];
                beta *= (S(1) - absorb_prob(xi));
            }
            if (beta == S(1)) {
                tail_value = game.continue_payoff;
            } else {
                for (int i = 0; i < game.n; ++i) tail_value[i] = mass[i] / (S(1) - beta);
            }
            break;
        }
    }
    Vec<S> v = tail_value;
    for (auto it = x.prefix.rbegin(); it != x.prefix.rend(); ++it) {
        S p = absorb_prob(*it);
        Vec<S> m = absorbing_mass_payoff(game, *it);
        for (int i = 0; i < game.n; ++i) v[i] = m[i] + (S(1) - p) * v[i];
    }
    return v;
}

/// gamma_n(x): payoff of the profile shifted to stage n.
template <class S>
Vec<S> payoff_from(const QuittingGame<S>& game, const BehaviorProfile<S>& x, std::size_t n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    return payoff(game, x.shifted(n));
}

template <class S>
struct BestResponse {
    S value = S(0);
    BehaviorProfile<S> reply;  // pure reply: 0/1 per stage, finite description
};

namespace detail {

/// Ingredients of player i's one-stage decision against xi^{-i}:
/// quit payoff, continuation survival factor, and absorbed continue mass.
template <class S>
struct StageView {
    S quit_value;   // r^i(Q^i, xi^{-i})
    S beta;         // 1 - p(xi^{-i})
    S cont_mass;    // p(xi^{-i}) * r^i(C^i, xi^{-i})
};

template <class S>
StageView<S> stage_view(const QuittingGame<S>& game, const MixedProfile<S>& xi_full, PlayerId i) {
    MixedProfile<S> quit = xi_full;
    quit[i] = S(1);
    MixedProfile<S> cont = xi_full;
    cont[i] = S(0);
    StageView<S> sv;
    sv.quit_value = absorbing_payoff(game, quit)[i];
    sv.beta = S(1) - absorb_prob(cont);
    sv.cont_mass = absorbing_mass_payoff(game, cont)[i];
    return sv;
}

}  // namespace detail

/// Optimal value of player i's decision problem against x^{-i} (the
/// coordinate-i entries of `others` are ignored). Tail values are solved as
/// stationary / periodic Bellman fixed points; the prefix is folded in by
/// backward induction. `tol` bounds the fixed-point iteration error.
template <class S>
BestResponse<S> best_response_value(const QuittingGame<S>& game, const BehaviorProfile<S>& others,
                                    PlayerId i, double tol) {
    if (tol <= 0) throw std::invalid_argument("tol must be positive");
    const S M = game.payoff_bound();

    S tail_value = S(0);
    bool tail_quits = false;  // whether the optimal tail play is to quit at once
    std::vector<bool> cycle_quits;

    auto stationary_value = [&](const MixedProfile<S>& xi_full) -> std::pair<S, bool> {
        auto sv = detail::stage_view(game, xi_full, i);
        S cont_forever = sv.beta < S(1) ? sv.cont_mass / (S(1) - sv.beta) : game.continue_payoff[i];
        if (sv.quit_value > cont_forever) return {sv.quit_value, true};
        return {cont_forever, false};
    };

    switch (others.tail) {
        case TailKind::AllContinue: {
            MixedProfile<S> zero(game.n, S(0));
            auto [v, q] = stationary_value(zero);
            tail_value = v;
            tail_quits = q;
            break;
        }
        case TailKind::RepeatLast: {
            auto [v, q] = stationary_value(others.prefix.back());
            tail_value = v;
            tail_quits = q;
            break;
        }
        case TailKind::Cycle: {
            const std::size_t m = others.cycle.size();
            std::vector<detail::StageView<S>> views;
            views.reserve(m);
            S beta_total = S(1);
            for (const auto& xi : others.cycle) {
                views.push_back(detail::stage_view(game, xi, i));
                beta_total *= views.back().beta;
            }
            if (beta_total == S(1)) {
                // others never quit inside the cycle: stationary all-continue view
                S best_quit = views[0].quit_value;
                for (const auto& v : views) best_quit = std::max(best_quit, v.quit_value);
                tail_value = std::max(best_quit, game.continue_payoff[i]);
                tail_quits = best_quit >= game.continue_payoff[i];
                cycle_quits.assign(m, tail_quits);
                break;
            }
            // value iteration on the periodic Bellman equation; error contracts
            // by beta_total per sweep
            Vec<S> v(m, S(0));
            double beta_d = to_double(beta_total);
            int sweeps = static_cast<int>(
                std::ceil(std::log(std::max(1e-300, tol / (2.0 * to_double(M) + 1.0))) /
                          std::log(std::max(1e-12, beta_d)))) + 2;
            for (int s = 0; s < sweeps; ++s) {
                for (std::size_t k = m; k-- > 0;) {
                    const auto& sv = views[k];
                    S cont = sv.cont_mass + sv.beta * v[(k + 1) % m];
                    v[k] = std::max(sv.quit_value, cont);
                }
            }
            cycle_quits.assign(m, false);
            for (std::size_t k = 0; k < m; ++k) {
                const auto& sv = views[k];
                S cont = sv.cont_mass + sv.beta * v[(k + 1) % m];
                cycle_quits[k] = sv.quit_value > cont;
            }
            tail_value = v[0];
            break;
        }
    }

    // backward induction over the prefix
    S value = tail_value;
    std::vector<bool> prefix_quits(others.prefix.size(), false);
    for (std::size_t k = others.prefix.size(); k-- > 0;) {
        auto sv = detail::stage_view(game, others.prefix[k], i);
        S cont = sv.cont_mass + sv.beta * value;
        if (sv.quit_value > cont) {
            prefix_quits[k] = true;
            value = sv.quit_value;
        } else {
            value = cont;
        }
    }

    BestResponse<S> br;
    br.value = value;
    BehaviorProfile<S>& reply = br.reply;
    auto stage_of = [&](bool quits) {
        MixedProfile<S> s(game.n, S(0));
        if (quits) s[i] = S(1);
        return s;
    };
    for (bool q : prefix_quits) reply.prefix.push_back(stage_of(q));
    if (others.tail == TailKind::Cycle && !cycle_quits.empty()) {
        reply.tail = TailKind::Cycle;
        for (bool q : cycle_quits) reply.cycle.push_back(stage_of(q));
    } else {
        reply.prefix.push_back(stage_of(tail_quits));
        reply.tail = TailKind::RepeatLast;
    }
    return br;
}

template <class S>
struct EquilibriumReport {
    bool equilibrium = true;
    Vec<S> deviation_gain;  // best_response value minus on-path payoff, per player
};

/// x is an eps-equilibrium iff no player gains more than eps by deviating.
template <class S>
EquilibriumReport<S> is_eps_equilibrium(const QuittingGame<S>& game, const BehaviorProfile<S>& x,
                                        const S& eps, double tol) {
    EquilibriumReport<S> rep;
    Vec<S> gamma = payoff(game, x);
    rep.deviation_gain.assign(game.n, S(0));
    for (int i = 0; i < game.n; ++i) {
        auto br = best_response_value(game, x, i, tol);
        rep.deviation_gain[i] = br.value - gamma[i];
        if (to_double(rep.deviation_gain[i]) > to_double(eps) + tol) rep.equilibrium = false;
    }
    return rep;
}

template <class S>
struct SeqPerfectReport {
    bool perfect = true;
    S worst_margin = S(0);
    std::size_t worst_stage = 0;
};

/// Player i is sequentially eps-perfect at x iff she is eps-perfect at x_n in
/// G_Gamma(gamma_{n+1}(x)) at every stage n. The prefix is checked stage by
/// stage; the tail is stationary or periodic, so one stage / one period of it
/// is checked exactly.
template <class S>
SeqPerfectReport<S> is_seq_eps_perfect_profile(const QuittingGame<S>& game,
                                               const BehaviorProfile<S>& x, PlayerId i,
                                               const S& eps) {
    std::size_t tail_stages = 1;
    if (x.tail == TailKind::Cycle) tail_stages = x.cycle.size();
    std::size_t horizon = x.prefix.size() + tail_stages;

    SeqPerfectReport<S> rep;
    for (std::size_t n = 1; n <= horizon; ++n) {
        OneShotGame<S> os{&game, payoff_from(game, x, n + 1)};
        auto w = is_eps_perfect(os, x.stage(n), i, eps);
        if (w.margin > rep.worst_margin) {
            rep.worst_margin = w.margin;
            rep.worst_stage = n;
        }
        if (!w.perfect) rep.perfect = false;
    }
    return rep;
}

}  // namespace quitpath
