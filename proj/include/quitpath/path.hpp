#pragma once

#include "quitpath/game.hpp"
#include "quitpath/one_shot.hpp"
#include "quitpath/strategy.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace quitpath {

enum class BlockKind { Jump, Flow };

/// One segment of an absorption path, in conditional coordinates.
/// Jump: the players play the mixed profile xi once (discrete time).
/// Flow: single players quit in continuous time, the conditional absorption
/// over the block is rho and the absorbed mass splits across players by z.
template <class S>
struct PathBlock {
    BlockKind kind = BlockKind::Jump;
    MixedProfile<S> xi;  // Jump
    Vec<S> z;            // Flow: distribution over players (simplex)
    S rho = S(0);        // Flow: conditional absorption in (0,1]

    static PathBlock jump(MixedProfile<S> profile) {
        PathBlock b;
        b.kind = BlockKind::Jump;
        b.xi = std::move(profile);
        return b;
    }
    static PathBlock flow(Vec<S> dir, S r) {
        PathBlock b;
        b.kind = BlockKind::Flow;
        b.z = std::move(dir);
        b.rho = std::move(r);
        return b;
    }

    /// Conditional absorption probability of the block.
    S absorb() const { return kind == BlockKind::Jump ? absorb_prob(xi) : rho; }
};

struct InvalidPathError : std::runtime_error {
    explicit InvalidPathError(const std::string& what) : std::runtime_error(what) {}
};

/// A monotone cadlag absorption record pi_t, stored as conditional blocks.
/// An optional cycle repeats forever in conditional coordinates, which keeps
/// infinite paths (sum of conditional probabilities diverging) finite data.
template <class S>
struct AbsorptionPath {
    std::vector<PathBlock<S>> prefix;
    std::vector<PathBlock<S>> cycle;
    bool allow_non_absorbing = false;

    int players() const {
        for (const auto& b : prefix) return b.kind == BlockKind::Jump ? int(b.xi.size()) : int(b.z.size());
        for (const auto& b : cycle) return b.kind == BlockKind::Jump ? int(b.xi.size()) : int(b.z.size());
        return 0;
    }

    /// Conditional survival of one cycle pass (1 if there is no cycle).
    S cycle_survival() const {
        S beta = S(1);
        for (const auto& b : cycle) beta *= (S(1) - b.absorb());
        return beta;
    }

    bool absorbing() const {
        for (const auto& b : prefix)
            if (b.absorb() == S(1)) return true;
        return !cycle.empty() && cycle_survival() < S(1);
    }

    void validate() const {
        int n = players();
        auto check_block = [&](const PathBlock<S>& b, bool in_cycle) {
            if (b.kind == BlockKind::Jump) {
                if (int(b.xi.size()) != n) throw InvalidPathError("jump dimension mismatch");
                for (const S& x : b.xi)
                    if (x < S(0) || x > S(1)) throw InvalidPathError("jump xi outside [0,1]");
                if (absorb_prob(b.xi) == S(0)) throw InvalidPathError("jump with p(xi) = 0");
            } else {
                if (int(b.z.size()) != n) throw InvalidPathError("flow dimension mismatch");
                S sum = S(0);
                for (const S& zi : b.z) {
                    if (zi < S(0)) throw InvalidPathError("flow z has negative entry");
                    sum += zi;
                }
                if (sum != S(1)) throw InvalidPathError("flow z must lie on the simplex");
                if (b.rho <= S(0) || b.rho > S(1)) throw InvalidPathError("flow rho outside (0,1]");
                if (in_cycle && b.rho == S(1)) throw InvalidPathError("cycle block absorbs everything");
            }
        };
        for (const auto& b : prefix) check_block(b, false);
        for (const auto& b : cycle) check_block(b, true);
        if (!cycle.empty()) {
            S beta = cycle_survival();
            if (beta == S(0) || beta == S(1))
                throw InvalidPathError("cycle conditional absorption must lie in (0,1)");
        }
        if (!absorbing() && !allow_non_absorbing)
            throw InvalidPathError("path does not absorb with probability 1");
    }
};

/// Absolute absorption-probability span of each block: prefix blocks followed
/// by `cycle_passes` unrolled repetitions of the cycle.
template <class S>
std::vector<std::pair<S, S>> absolute_times(const AbsorptionPath<S>& path,
                                            std::size_t cycle_passes = 1) {
    std::vector<std::pair<S, S>> spans;
    S t = S(0);
    auto push = [&](const PathBlock<S>& b) {
        S t_next = t + (S(1) - t) * b.absorb();
        spans.emplace_back(t, t_next);
        t = t_next;
    };
    for (const auto& b : path.prefix) push(b);
    for (std::size_t p = 0; p < cycle_passes; ++p)
        for (const auto& b : path.cycle) push(b);
    return spans;
}

/// Total absorbed mass pi_1(a) per action profile, and the residual mass that
/// is never absorbed (positive only for non-absorbing paths).
template <class S>
struct PathTotals {
    Vec<S> pi_one;  // indexed by quitter mask, entry 0 unused
    S residual = S(0);
};

namespace detail {

template <class S>
void add_block_mass(Vec<S>& acc, const PathBlock<S>& b, const S& scale, int n) {
    if (b.kind == BlockKind::Jump) {
        for (ActionProfile a = 1; a < (ActionProfile(1) << n); ++a)
            acc[a] += scale * profile_prob(b.xi, a);
    } else {
        for (int i = 0; i < n; ++i) acc[ActionProfile(1) << i] += scale * b.rho * b.z[i];
    }
}

}  // namespace detail

template <class S>
PathTotals<S> path_totals(const AbsorptionPath<S>& path) {
    int n = path.players();
    PathTotals<S> tot;
    tot.pi_one.assign(std::size_t(1) << n, S(0));
    S t = S(0);
    for (const auto& b : path.prefix) {
        detail::add_block_mass(tot.pi_one, b, S(1) - t, n);
        t = t + (S(1) - t) * b.absorb();
    }
    if (!path.cycle.empty()) {
        S beta = path.cycle_survival();
        if (beta < S(1)) {
            // one conditional pass, then the geometric series over repetitions
            Vec<S> pass(std::size_t(1) << n, S(0));
            S u = S(0);
            for (const auto& b : path.cycle) {
                detail::add_block_mass(pass, b, S(1) - u, n);
                u = u + (S(1) - u) * b.absorb();
            }
            S scale = (S(1) - t) / (S(1) - beta);
            for (std::size_t a = 1; a < pass.size(); ++a) tot.pi_one[a] += scale * pass[a];
            t = S(1);
        }
    }
    tot.residual = S(1) - t;
    return tot;
}

/// pi_t evaluated at absolute coordinate t (cadlag; set left_limit for pi_{t-}).
template <class S>
struct PathPoint {
    Vec<S> pi;   // per quitter mask
    S pi_hat = S(0);
};

template <class S>
PathPoint<S> eval(const AbsorptionPath<S>& path, const S& t, bool left_limit = false) {
    if (t < S(0) || t > S(1)) throw InvalidPathError("t outside [0,1]");
    int n = path.players();
    PathPoint<S> pt;
    pt.pi.assign(std::size_t(1) << n, S(0));

    S cur = S(0);
    auto process = [&](const PathBlock<S>& b) -> bool {
        // returns true when t lies inside this block's span (done)
        S t_next = cur + (S(1) - cur) * b.absorb();
        if (b.kind == BlockKind::Jump) {
            if (t < cur || (t == cur && left_limit)) {
                pt.pi_hat = cur;
                return true;
            }
            if (t < t_next || (t == t_next && left_limit && t_next > cur)) {
                // inside the dead interval [cur, t_next): post-jump constant
                detail::add_block_mass(pt.pi, b, S(1) - cur, n);
                pt.pi_hat = t_next;
                return true;
            }
            detail::add_block_mass(pt.pi, b, S(1) - cur, n);
        } else {
            if (t < t_next || (t == t_next && left_limit)) {
                if (t < cur) {
                    pt.pi_hat = cur;
                    return true;
                }
                // flow is continuous: partial mass (t - cur) * z_i
                for (int i = 0; i < n; ++i) pt.pi[ActionProfile(1) << i] += (t - cur) * b.z[i];
                pt.pi_hat = t;
                return true;
            }
            for (int i = 0; i < n; ++i) pt.pi[ActionProfile(1) << i] += (t_next - cur) * b.z[i];
        }
        cur = t_next;
        return false;
    };

    for (const auto& b : path.prefix)
        if (process(b)) return pt;
    if (!path.cycle.empty() && path.cycle_survival() < S(1)) {
        // unroll cycle passes until t is reached; pass count grows like log(1-t)
        while (cur < t || (cur == t && !left_limit)) {
            bool done = false;
            for (const auto& b : path.cycle)
                if (process(b)) { done = true; break; }
            if (done) return pt;
            if (S(1) - cur == S(0)) break;
        }
        pt.pi_hat = cur;
        return pt;
    }
    pt.pi_hat = cur;
    return pt;
}

/// Embedding of an absorbing behavior profile as a pure-jump absorption path.
/// Stages where every player continues do not alter pi^x and are skipped.
template <class S>
AbsorptionPath<S> from_profile(const QuittingGame<S>& game, const BehaviorProfile<S>& x) {
    if (!is_absorbing(game, x)) throw InvalidPathError("profile is not absorbing");
    AbsorptionPath<S> path;
    bool certain = false;
    for (const auto& xi : x.prefix) {
        if (absorb_prob(xi) == S(0)) continue;
        path.prefix.push_back(PathBlock<S>::jump(xi));
        if (absorb_prob(xi) == S(1)) { certain = true; break; }
    }
    if (certain) return path;
    switch (x.tail) {
        case TailKind::AllContinue:
            // is_absorbing guaranteed the prefix already absorbed everything
            throw InvalidPathError("profile is not absorbing");
        case TailKind::RepeatLast:
            path.cycle.push_back(PathBlock<S>::jump(x.prefix.back()));
            if (absorb_prob(x.prefix.back()) == S(1)) {
                path.prefix.push_back(path.cycle.back());
                path.cycle.clear();
            }
            break;
        case TailKind::Cycle:
            for (const auto& xi : x.cycle)
                if (absorb_prob(xi) > S(0)) path.cycle.push_back(PathBlock<S>::jump(xi));
            break;
    }
    return path;
}

/// Average payoff vector of the mass absorbed inside one block.
template <class S>
Vec<S> block_avg_payoff(const QuittingGame<S>& game, const PathBlock<S>& b) {
    if (b.kind == BlockKind::Jump) return absorbing_payoff(game, b.xi);
    Vec<S> out(game.n, S(0));
    for (int i = 0; i < game.n; ++i) {
        const Vec<S>& col = game.single_quit(i);
        for (int j = 0; j < game.n; ++j) out[j] += b.z[i] * col[j];
    }
    return out;
}

/// gamma values at block boundaries: entry k is the left limit of the payoff
/// path at the start of block k (so entry 0 is gamma_{0-} for prefix-first
/// paths); `cycle_start` is the fixed-point value at the cycle entry.
template <class S>
struct PayoffBoundaries {
    std::vector<Vec<S>> prefix_pre;  // per prefix block, gamma just before it
    std::vector<Vec<S>> cycle_pre;   // per cycle block (one pass)
    Vec<S> terminal;                 // value after all prefix blocks (cycle fixed point or r(C))
    bool terminal_defined = true;    // false when the prefix absorbs everything
};

template <class S>
PayoffBoundaries<S> payoff_boundaries(const QuittingGame<S>& game, const AbsorptionPath<S>& path) {
    PayoffBoundaries<S> pb;
    int n = game.n;
    if (!path.cycle.empty() && path.cycle_survival() < S(1)) {
        // fixed point: gamma_c = pass_mass + beta * gamma_c
        S beta = S(1);
        Vec<S> mass(n, S(0));
        for (const auto& b : path.cycle) {
            S p = b.absorb();
            Vec<S> avg = block_avg_payoff(game, b);
            for (int i = 0; i < n; ++i) mass[i] += beta * p * avg[i];
            beta *= (S(1) - p);
        }
        pb.terminal.assign(n, S(0));
        for (int i = 0; i < n; ++i) pb.terminal[i] = mass[i] / (S(1) - beta);
        // boundary values inside one pass
        pb.cycle_pre.assign(path.cycle.size(), Vec<S>(n, S(0)));
        Vec<S> g = pb.terminal;
        for (std::size_t k = path.cycle.size(); k-- > 0;) {
            const auto& b = path.cycle[k];
            S p = b.absorb();
            Vec<S> avg = block_avg_payoff(game, b);
            for (int i = 0; i < n; ++i) g[i] = p * avg[i] + (S(1) - p) * g[i];
            pb.cycle_pre[k] = g;
        }
        // by construction pb.cycle_pre[0] == pb.terminal (the fixed point)
    } else {
        bool certain = false;
        for (const auto& b : path.prefix)
            if (b.absorb() == S(1)) certain = true;
        if (certain) {
            pb.terminal.assign(n, S(0));
            pb.terminal_defined = false;
        } else {
            pb.terminal = game.continue_payoff;  // residual mass is never absorbed
        }
    }
    Vec<S> g = pb.terminal;
    pb.prefix_pre.assign(path.prefix.size(), Vec<S>(n, S(0)));
    for (std::size_t k = path.prefix.size(); k-- > 0;) {
        const auto& b = path.prefix[k];
        S p = b.absorb();
        Vec<S> avg = block_avg_payoff(game, b);
        if (p == S(1)) {
            g = avg;
        } else {
            for (int i = 0; i < n; ++i) g[i] = p * avg[i] + (S(1) - p) * g[i];
        }
        pb.prefix_pre[k] = g;
    }
    return pb;
}

/// gamma_t(pi): expected payoff conditional on survival past t. Returns the
/// paper's 0-vector convention, flagged, where the path has fully absorbed.
template <class S>
struct PayoffPathPoint {
    Vec<S> gamma;
    bool defined = true;
};

template <class S>
PayoffPathPoint<S> payoff_path(const QuittingGame<S>& game, const AbsorptionPath<S>& path,
                               const S& t, bool left_limit = false) {
    if (t < S(0) || t >= S(1)) throw InvalidPathError("payoff path defined on [0,1)");
    PayoffBoundaries<S> pb = payoff_boundaries(game, path);
    int n = game.n;

    auto in_block = [&](const PathBlock<S>& b, const S& t0, const S& t1,
                        const Vec<S>& pre, const Vec<S>& post) -> PayoffPathPoint<S> {
        PayoffPathPoint<S> out;
        if (b.kind == BlockKind::Jump) {
            if (t == t0 && left_limit) { out.gamma = pre; return out; }
            if (t1 == S(1)) { out.gamma.assign(n, S(0)); out.defined = false; return out; }
            out.gamma = post;  // constant on the dead interval
            return out;
        }
        if (t == t0 && left_limit) { out.gamma = pre; return out; }
        // flow: gamma^j(t) = A^j + (post^j - A^j)(1 - t1)/(1 - t)
        Vec<S> a = block_avg_payoff(game, b);
        out.gamma.assign(n, S(0));
        if (t1 == S(1)) {
            // final full flow block: bounded payoff path forces gamma == A
            out.gamma = a;
            return out;
        }
        S factor = (S(1) - t1) / (S(1) - t);
        for (int i = 0; i < n; ++i) out.gamma[i] = a[i] + (post[i] - a[i]) * factor;
        return out;
    };

    S cur = S(0);
    for (std::size_t k = 0; k < path.prefix.size(); ++k) {
        const auto& b = path.prefix[k];
        S t_next = cur + (S(1) - cur) * b.absorb();
        if (t < t_next || (t == t_next && left_limit && t_next > cur) || t_next == S(1)) {
            if (t < cur || (t == cur && left_limit)) {
                PayoffPathPoint<S> out;
                out.gamma = pb.prefix_pre[k];
                return out;
            }
            const Vec<S>& post = k + 1 < path.prefix.size()
                                     ? pb.prefix_pre[k + 1]
                                     : (pb.cycle_pre.empty() ? pb.terminal : pb.cycle_pre[0]);
            return in_block(b, cur, t_next, pb.prefix_pre[k], post);
        }
        cur = t_next;
    }
    if (path.cycle.empty() || path.cycle_survival() == S(1)) {
        PayoffPathPoint<S> out;
        if (!pb.terminal_defined) {
            out.gamma.assign(n, S(0));
            out.defined = false;
        } else {
            out.gamma = pb.terminal;
        }
        return out;
    }
    // inside the cycle: unroll passes until the block containing t
    while (true) {
        for (std::size_t k = 0; k < path.cycle.size(); ++k) {
            const auto& b = path.cycle[k];
            S t_next = cur + (S(1) - cur) * b.absorb();
            if (t < t_next || (t == t_next && left_limit && t_next > cur)) {
                if (t < cur || (t == cur && left_limit)) {
                    PayoffPathPoint<S> out;
                    out.gamma = pb.cycle_pre[k];
                    return out;
                }
                const Vec<S>& post =
                    k + 1 < path.cycle.size() ? pb.cycle_pre[k + 1] : pb.cycle_pre[0];
                return in_block(b, cur, t_next, pb.cycle_pre[k], post);
            }
            cur = t_next;
        }
        if (S(1) - cur == S(0)) {
            PayoffPathPoint<S> out;
            out.gamma.assign(n, S(0));
            out.defined = false;
            return out;
        }
    }
}

/// Certification report for sequential eps-perfectness of a path.
template <class S>
struct PathCertReport {
    struct PlayerEntry {
        S worst_margin = S(0);  // positive = violation beyond eps
        double worst_t = -1.0;
        std::string condition;  // "SP.1" / "SP.2a" / "SP.2b"
    };
    bool certified = true;
    std::vector<PlayerEntry> players;
};

struct CertifyConfig {
    // extra interior sample points per flow block; endpoint checks are exact
    // because gamma^j is monotone in 1/(1-t) on a constant-z block
    int interior_grid = 0;
};

template <class S>
PathCertReport<S> certify(const QuittingGame<S>& game, const AbsorptionPath<S>& path,
                          const S& eps, const CertifyConfig& cfg = {}) {
    path.validate();
    if (!path.absorbing()) throw InvalidPathError("only absorbing paths can be certified");
    int n = game.n;
    PathCertReport<S> rep;
    rep.players.assign(n, {});

    PayoffBoundaries<S> pb = payoff_boundaries(game, path);

    auto note = [&](int i, const S& margin, double at, const char* cond) {
        if (margin > rep.players[i].worst_margin) {
            rep.players[i].worst_margin = margin;
            rep.players[i].worst_t = at;
            rep.players[i].condition = cond;
        }
        if (margin > S(0)) rep.certified = false;
    };

    auto check_jump = [&](const PathBlock<S>& b, const S& t0, const S& t_next, const Vec<S>& post) {
        if (t_next == S(1)) return;  // SP.1 applies only where pi_hat_t < 1
        OneShotGame<S> os{&game, post};
        for (int i = 0; i < n; ++i) {
            auto w = is_eps_perfect(os, b.xi, i, eps);
            note(i, w.margin, to_double(t0), "SP.1");
        }
    };

    auto check_flow = [&](const PathBlock<S>& b, const S& t0, const S& t_next, const Vec<S>& pre,
                          const Vec<S>& post) {
        Vec<S> a = block_avg_payoff(game, b);
        Vec<S> end_gamma = t_next == S(1) ? a : post;
        // monotonicity guard: the interior value must lie between the endpoints
        if (cfg.interior_grid >= 0) {
            S tm = t0 + (t_next - t0) / S(2);
            S factor = t_next == S(1) ? S(0) : (S(1) - t_next) / (S(1) - tm);
            for (int j = 0; j < n; ++j) {
                S mid = a[j] + (end_gamma[j] - a[j]) * factor;
                S lo = std::min(pre[j], end_gamma[j]), hi = std::max(pre[j], end_gamma[j]);
                S slack = scalar_traits<S>::from_ratio(1, 1000000000);
                if (mid < lo - slack || mid > hi + slack)
                    throw InvalidPathError("flow payoff is not monotone on a block");
            }
        }
        for (int j = 0; j < n; ++j) {
            S rq = game.single_quit(j)[j];
            S gmin = std::min(pre[j], end_gamma[j]);
            S gmax = std::max(pre[j], end_gamma[j]);
            note(j, rq - gmin - eps, to_double(t0), "SP.2a");
            if (b.z[j] > S(0)) note(j, gmax - rq - eps, to_double(t0), "SP.2b");
        }
        for (int g = 1; g <= cfg.interior_grid; ++g) {
            S tg = t0 + (t_next - t0) * S(g) / S(cfg.interior_grid + 1);
            S factor = t_next == S(1) ? S(0) : (S(1) - t_next) / (S(1) - tg);
            for (int j = 0; j < n; ++j) {
                S gj = a[j] + (end_gamma[j] - a[j]) * factor;
                S rq = game.single_quit(j)[j];
                note(j, rq - gj - eps, to_double(tg), "SP.2a");
                if (b.z[j] > S(0)) note(j, gj - rq - eps, to_double(tg), "SP.2b");
            }
        }
    };

    S cur = S(0);
    for (std::size_t k = 0; k < path.prefix.size(); ++k) {
        const auto& b = path.prefix[k];
        S t_next = cur + (S(1) - cur) * b.absorb();
        const Vec<S>& post = k + 1 < path.prefix.size()
                                 ? pb.prefix_pre[k + 1]
                                 : (pb.cycle_pre.empty() ? pb.terminal : pb.cycle_pre[0]);
        if (b.kind == BlockKind::Jump) check_jump(b, cur, t_next, post);
        else check_flow(b, cur, t_next, pb.prefix_pre[k], post);
        cur = t_next;
        if (t_next == S(1)) break;
    }
    // one cycle pass certifies the whole tail: the conditional data and the
    // payoff path values repeat exactly on every later pass
    for (std::size_t k = 0; k < path.cycle.size(); ++k) {
        const auto& b = path.cycle[k];
        S t_next = cur + (S(1) - cur) * b.absorb();
        const Vec<S>& post = k + 1 < path.cycle.size() ? pb.cycle_pre[k + 1] : pb.cycle_pre[0];
        if (b.kind == BlockKind::Jump) check_jump(b, cur, t_next, post);
        else check_flow(b, cur, t_next, pb.cycle_pre[k], post);
        cur = t_next;
    }
    return rep;
}

/// Sup-distance of two paths over a sample grid (diagnostic metric for
/// weak convergence; the grid should avoid jump instants of path_a).
template <class S>
S weak_distance(const AbsorptionPath<S>& a, const AbsorptionPath<S>& b, const Vec<S>& grid) {
    S worst = S(0);
    for (const S& t : grid) {
        PathPoint<S> pa = eval(a, t);
        PathPoint<S> pc = eval(b, t);
        std::size_t m = std::min(pa.pi.size(), pc.pi.size());
        for (std::size_t k = 1; k < m; ++k) {
            S d = abs_value(pa.pi[k] - pc.pi[k]);
            if (d > worst) worst = d;
        }
    }
    return worst;
}

}  // namespace quitpath
