#pragma once

#include "quitpath/path.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace quitpath {

struct LemmaHypothesisError : std::runtime_error {
    explicit LemmaHypothesisError(const std::string& what) : std::runtime_error(what) {}
};

/// The unique mixed profile with p(xi) = p(y) whose coordinates are
/// proportional to the single-quitter masses of y. `y` is a sub-probability
/// vector indexed by quitter mask (entry 0 ignored); `eps0` is the smallness
/// threshold of the hypotheses: p(y) <= eps0 and every multi-quit mass
/// containing player i is <= eps0 * y(Q^i).
template <class S>
MixedProfile<S> lemma_xi(const Vec<S>& y, int n, const S& eps0) {
    S p_y = S(0);
    Vec<S> single(n, S(0));
    for (ActionProfile a = 1; a < (ActionProfile(1) << n); ++a) {
        if (y[a] < S(0)) throw LemmaHypothesisError("negative mass");
        p_y += y[a];
        if (popcount(a) == 1) {
            for (int i = 0; i < n; ++i)
                if (a == (ActionProfile(1) << i)) single[i] += y[a];
        }
    }
    // relative slack absorbs floating-point rounding of interval masses
    const S slack = eps0 / S(1000000000000LL);
    if (p_y > eps0 + slack) throw LemmaHypothesisError("p(y) exceeds the smallness threshold");
    for (ActionProfile a = 1; a < (ActionProfile(1) << n); ++a) {
        if (popcount(a) < 2 || y[a] == S(0)) continue;
        for (int i = 0; i < n; ++i) {
            if (!((a >> i) & 1)) continue;
            if (y[a] > (eps0 + slack) * single[i])
                throw LemmaHypothesisError("multi-quit mass too large relative to quitter " +
                                           std::to_string(i + 1));
        }
    }

    MixedProfile<S> xi(n, S(0));
    if (p_y == S(0)) return xi;
    S total = S(0);
    int support = 0;
    for (int i = 0; i < n; ++i) {
        total += single[i];
        if (single[i] > S(0)) ++support;
    }
    if (total == S(0)) throw LemmaHypothesisError("absorbed mass without single quitters");
    if (support == 1) {
        // single quitter: xi = p(y) e_i exactly
        for (int i = 0; i < n; ++i)
            if (single[i] > S(0)) xi[i] = p_y;
        return xi;
    }
    // xi^i = zeta * w_i with w on the simplex; p(xi(zeta)) = 1 - prod(1 - zeta w_i)
    // is strictly increasing, so bisect zeta until p matches p(y)
    Vec<S> w(n, S(0));
    for (int i = 0; i < n; ++i) w[i] = single[i] / total;
    S w_max = max_abs(w);
    S lo = p_y;          // union bound: p(xi(p_y)) <= p_y
    S hi = S(1) / w_max; // largest coordinate hits 1: p >= p(y)
    auto p_of = [&](const S& zeta) {
        S surv = S(1);
        for (int i = 0; i < n; ++i) surv *= (S(1) - zeta * w[i]);
        return S(1) - surv;
    };
    const S tol = S(1) / S(100000000000000LL);  // 1e-14
    for (int it = 0; it < 200; ++it) {
        S mid = (lo + hi) / S(2);
        if (p_of(mid) < p_y) lo = mid;
        else hi = mid;
        if (hi - lo <= tol * p_y) break;
    }
    S zeta = (lo + hi) / S(2);
    for (int i = 0; i < n; ++i) xi[i] = zeta * w[i];
    return xi;
}

enum class GridKind { BigJump, Fine };

template <class S>
struct GridPoint {
    S s = S(0);
    GridKind kind = GridKind::Fine;
};

namespace detail {

/// Splits a block list into the spans the stage grid respects: jumps are
/// their own segment, maximal runs of contiguous flow blocks are one segment
/// (the fine step may cross interior flow boundaries, per the grid's
/// sup-over-S(pi)-union-T(pi) rule).
template <class S>
struct GridSegment {
    bool is_jump = false;
    const PathBlock<S>* jump = nullptr;
    S t0 = S(0), t1 = S(0);  // absolute span
};

template <class S>
std::vector<GridSegment<S>> grid_segments(const std::vector<PathBlock<S>>& blocks, S& t) {
    std::vector<GridSegment<S>> segs;
    for (const auto& b : blocks) {
        S t_next = t + (S(1) - t) * b.absorb();
        if (b.kind == BlockKind::Jump) {
            segs.push_back({true, &b, t, t_next});
        } else if (!segs.empty() && !segs.back().is_jump && segs.back().t1 == t) {
            segs.back().t1 = t_next;
        } else {
            segs.push_back({false, nullptr, t, t_next});
        }
        t = t_next;
    }
    return segs;
}

}  // namespace detail

/// The inductive stage grid of the discretization at fineness k: jumps are
/// their own stage (BigJump when their conditional mass is >= 1/k); on flow
/// spans the conditional step is 1/k, capped at jumps and at the cycle-pass
/// boundary. Cycle passes are unrolled until the survival mass drops below
/// `cutoff` (the per-pass structure repeats exactly in conditional terms).
template <class S>
std::vector<GridPoint<S>> build_grid(const AbsorptionPath<S>& path, int k,
                                     double cutoff = 1e-9) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    path.validate();
    if (!path.absorbing()) throw InvalidPathError("only absorbing paths are discretized");
    const S inv_k = S(1) / S(k);
    std::vector<GridPoint<S>> grid;
    auto emit = [&](const detail::GridSegment<S>& seg) {
        if (seg.is_jump) {
            grid.push_back({seg.t0, seg.jump->absorb() >= inv_k ? GridKind::BigJump : GridKind::Fine});
            return;
        }
        S s = seg.t0;
        while (s < seg.t1) {
            grid.push_back({s, GridKind::Fine});
            if (seg.t1 == S(1) && to_double(S(1) - s) < cutoff) break;
            S step = s + (S(1) - s) * inv_k;
            s = step < seg.t1 ? step : seg.t1;
        }
    };
    S t = S(0);
    for (const auto& seg : detail::grid_segments(path.prefix, t)) {
        emit(seg);
        if (t == S(1)) return grid;
    }
    while (!path.cycle.empty() && to_double(S(1) - t) >= cutoff)
        for (const auto& seg : detail::grid_segments(path.cycle, t)) emit(seg);
    return grid;
}

namespace detail {

/// Normalized mass y absorbed over [s0, s1) of the path.
template <class S>
Vec<S> interval_mass(const AbsorptionPath<S>& path, const S& s0, const S& s1, int n) {
    PathPoint<S> a = eval(path, s0, /*left_limit=*/true);
    PathPoint<S> b = s1 == S(1) ? [&] {
        PathPoint<S> pt;
        PathTotals<S> tot = path_totals(path);
        pt.pi = tot.pi_one;
        pt.pi_hat = S(1) - tot.residual;
        return pt;
    }()
                                : eval(path, s1, /*left_limit=*/true);
    Vec<S> y(std::size_t(1) << n, S(0));
    for (std::size_t m = 1; m < y.size(); ++m) y[m] = (b.pi[m] - a.pi[m]) / (S(1) - s0);
    return y;
}

/// One stage of the discretization for the grid interval starting at `pt`
/// and ending at `s_next`.
template <class S>
MixedProfile<S> stage_for(const AbsorptionPath<S>& path, const GridPoint<S>& pt,
                          const S& s_next, int n, const S& eps0) {
    Vec<S> y = interval_mass(path, pt.s, s_next, n);
    if (pt.kind == GridKind::BigJump) {
        // recover xi from the jump's product masses: xi^i = y(Q^i) / prod-free
        // factor; equivalently solve the same proportional system, which is
        // exact because y is exactly a product measure here
        MixedProfile<S> xi(n, S(0));
        S p_y = S(0);
        for (std::size_t m = 1; m < y.size(); ++m) p_y += y[m];
        // xi^i = (mass of profiles where i quits) / (1 - mass where i does not
        // quit but someone does) ... the direct marginal: P(i quits) = xi^i
        for (int i = 0; i < n; ++i) {
            S marg = S(0);
            for (std::size_t m = 1; m < y.size(); ++m)
                if ((m >> i) & 1) marg += y[m];
            xi[i] = marg;
        }
        return xi;
    }
    return lemma_xi(y, n, eps0);
}

}  // namespace detail

/// The Prop 4.5 profile x^k: stage n plays the jump's own profile at big-jump
/// grid points and the lemma_xi reconstruction of the interval mass at fine
/// points. Cycle tails reuse the discretization of one cycle pass; a terminal
/// full flow becomes a stationary repeated stage.
template <class S>
BehaviorProfile<S> discretize(const QuittingGame<S>& game, const AbsorptionPath<S>& path, int k) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    path.validate();
    if (!path.absorbing()) throw InvalidPathError("only absorbing paths are discretized");
    const int n = game.n;
    const S inv_k = S(1) / S(k);
    BehaviorProfile<S> x;

    // a prefix ending in a full flow block has a stationary discretization
    // tail: once inside that block, every stage absorbs conditional mass 1/k
    // split by the same z, so one RepeatLast stage covers all of them
    S terminal_start = S(2);  // sentinel past 1
    if (!path.prefix.empty() && path.prefix.back().kind == BlockKind::Flow &&
        path.prefix.back().rho == S(1)) {
        S u = S(0);
        for (std::size_t b = 0; b + 1 < path.prefix.size(); ++b)
            u = u + (S(1) - u) * path.prefix[b].absorb();
        terminal_start = u;
    }

    auto segment_stages = [&](const detail::GridSegment<S>& seg,
                              std::vector<MixedProfile<S>>& out) -> bool {
        // returns true when the segment ends in the stationary terminal stage
        if (seg.is_jump) {
            GridPoint<S> pt{seg.t0, seg.jump->absorb() >= inv_k ? GridKind::BigJump : GridKind::Fine};
            out.push_back(detail::stage_for(path, pt, seg.t1, n, inv_k));
            return false;
        }
        S s = seg.t0;
        while (s < seg.t1) {
            if (!(s < terminal_start)) {
                const PathBlock<S>& last = path.prefix.back();
                Vec<S> y(std::size_t(1) << n, S(0));
                for (int i = 0; i < n; ++i) y[ActionProfile(1) << i] = inv_k * last.z[i];
                out.push_back(lemma_xi(y, n, inv_k));
                return true;
            }
            S step = s + (S(1) - s) * inv_k;
            S s_next = step < seg.t1 ? step : seg.t1;
            out.push_back(detail::stage_for(path, GridPoint<S>{s, GridKind::Fine}, s_next, n, inv_k));
            s = s_next;
        }
        return false;
    };

    S t = S(0);
    for (const auto& seg : detail::grid_segments(path.prefix, t)) {
        if (segment_stages(seg, x.prefix)) {
            x.tail = TailKind::RepeatLast;
            return x;
        }
        if (t == S(1)) return x;  // certain jump: prefix absorbs everything
    }
    if (!path.cycle.empty()) {
        x.tail = TailKind::Cycle;
        for (const auto& seg : detail::grid_segments(path.cycle, t))
            segment_stages(seg, x.cycle);
    }
    return x;
}

/// Check of the discretization error bound at every grid point:
/// ||pi^{x^k}_{s-} - pi_{s-}||_inf <= s * 2^n (n+1) / k.
template <class S>
struct BoundReport {
    bool holds = true;
    double worst_ratio = 0.0;  // lhs / rhs over grid points with rhs > 0
    double worst_s = -1.0;
    double worst_abs = 0.0;  // largest absolute deviation seen
    std::size_t points = 0;
};

template <class S>
BoundReport<S> verify_bound(const QuittingGame<S>& game, const AbsorptionPath<S>& path, int k,
                            const BehaviorProfile<S>& profile, double cutoff = 1e-9) {
    AbsorptionPath<S> disc = from_profile(game, profile);
    S factor = S((std::int64_t(1) << game.n) * (game.n + 1)) / S(k);
    BoundReport<S> rep;
    for (const auto& pt : build_grid(path, k, cutoff)) {
        // left limits taken a relative 1e-11 before the grid point, so that
        // 1e-14-level rounding of the profile's stage boundaries cannot flip
        // a stage in or out of the comparison
        S t_eval = pt.s - pt.s / S(100000000000LL);
        PathPoint<S> a = eval(path, t_eval, /*left_limit=*/true);
        PathPoint<S> b = eval(disc, t_eval, /*left_limit=*/true);
        S dist = S(0);
        for (std::size_t m = 1; m < a.pi.size(); ++m) {
            S d = abs_value(a.pi[m] - b.pi[m]);
            if (d > dist) dist = d;
        }
        S rhs = pt.s * factor;
        ++rep.points;
        double dd = to_double(dist);
        if (dd > rep.worst_abs) rep.worst_abs = dd;
        if (dist > rhs) {
            rep.holds = false;
            rep.worst_ratio = 1e300;
            rep.worst_s = to_double(pt.s);
        } else if (rhs > S(0) && rep.worst_ratio < 1e300) {
            double ratio = dd / to_double(rhs);
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.worst_s = to_double(pt.s);
            }
        }
    }
    return rep;
}

}  // namespace quitpath
