#pragma once

#include "quitpath/lcp.hpp"
#include "quitpath/path.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace quitpath {

/// Snapshot of the payoff flow: gamma lives on Y (the boundary of the
/// nonnegative orthant) and z distributes the quitting rate over the active
/// coordinates {i : gamma_i = 0}.
template <class S>
struct FlowState {
    S u = S(0);  // absolute path time
    Vec<S> gamma;
    std::uint32_t active = 0;
    Vec<S> z;
};

template <class S>
std::uint32_t active_set(const Vec<S>& gamma) {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < gamma.size(); ++i)
        if (gamma[i] == S(0)) m |= std::uint32_t(1) << i;
    return m;
}

enum class FlowOutcome {
    Event,      // an inactive coordinate reached 0
    Terminal,   // gamma == Rz: the flow can run to full absorption
    Divergent   // no coordinate ever hits 0 and gamma != Rz (backtrack)
};

template <class S>
struct FlowStep {
    FlowOutcome outcome = FlowOutcome::Divergent;
    S rho = S(0);  // conditional duration until the event (1 for Terminal)
    FlowState<S> next;
};

/// Checks that supp(z) is active with (Rz)^j = 0 there, and (Rz)^j <= 0 on
/// the rest of the active set -- the forward-time viability condition that
/// keeps gamma nonnegative with the supported coordinates pinned at 0.
template <class S>
bool is_viable_direction(const Matrix<S>& r, const Vec<S>& gamma, const Vec<S>& z) {
    Vec<S> a = r.mul(z);
    for (std::size_t j = 0; j < gamma.size(); ++j) {
        if (z[j] > S(0) && (gamma[j] != S(0) || a[j] != S(0))) return false;
        if (gamma[j] == S(0) && a[j] > S(0)) return false;
    }
    return true;
}

/// Advances the flow gamma(tau) = (gamma_0 - tau * Rz) / (1 - tau) in
/// conditional time to the first instant an inactive coordinate hits 0.
/// A coordinate j can only hit 0 when (Rz)^j > gamma^j_0.
template <class S>
FlowStep<S> flow_segment(const QuittingGame<S>& game, const FlowState<S>& state) {
    Matrix<S> r = quit_matrix(game);
    if (!is_viable_direction(r, state.gamma, state.z))
        throw std::invalid_argument("flow direction is not viable at this state");
    Vec<S> a = r.mul(state.z);

    FlowStep<S> step;
    bool have = false;
    S rho = S(0);
    for (std::size_t j = 0; j < state.gamma.size(); ++j) {
        if (!(state.gamma[j] > S(0)) || !(a[j] > state.gamma[j])) continue;
        S cand = state.gamma[j] / a[j];
        if (!have || cand < rho) {
            rho = cand;
            have = true;
        }
    }
    if (!have) {
        step.outcome = state.gamma == a ? FlowOutcome::Terminal : FlowOutcome::Divergent;
        step.rho = S(1);
        return step;
    }
    step.outcome = FlowOutcome::Event;
    step.rho = rho;
    step.next.u = state.u + (S(1) - state.u) * rho;
    step.next.gamma.assign(state.gamma.size(), S(0));
    for (std::size_t j = 0; j < state.gamma.size(); ++j)
        step.next.gamma[j] = (state.gamma[j] - rho * a[j]) / (S(1) - rho);
    step.next.active = active_set(step.next.gamma);
    return step;
}

template <class S>
struct CycleCertificate {
    std::vector<PathBlock<S>> cycle;  // empty for fully absorbing finite paths
    Vec<S> gamma;                     // payoff fixed point at the cycle start
    PathCertReport<S> report;
};

template <class S>
struct SynthesisResult {
    AbsorptionPath<S> path;
    CycleCertificate<S> cert;
};

struct QMatrixPreconditionError : std::runtime_error {
    explicit QMatrixPreconditionError(const std::string& what) : std::runtime_error(what) {}
};

struct SynthesisBudgetError : std::runtime_error {
    explicit SynthesisBudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct SynthesisConfig {
    int max_events = 64;           // depth cap of one search branch
    long backtrack_budget = 4000;  // total direction expansions per search
    int max_period = 11;           // cap for the periodic-orbit enumeration
    long walk_budget = 500000;     // closed-walk enumeration cap
    long q_samples = 200;          // precondition spot check; 0 disables
    double newton_eps = 1e-8;      // certification tolerance for refined orbits
};

namespace detail {

/// Depth-first forward search. The chain stores exact gamma values; a repeat
/// closes a cycle (gamma determines the whole future, and the repeat value is
/// automatically the fixed point of the cycle's affine payoff map).
template <class S>
struct SynthSearch {
    const QuittingGame<S>& game;
    Matrix<S> r, neg_r;
    const SynthesisConfig& cfg;
    long budget;
    std::vector<Vec<S>> chain_gamma;
    std::vector<PathBlock<S>> chain_blocks;
    AbsorptionPath<S> out;

    explicit SynthSearch(const QuittingGame<S>& g, const SynthesisConfig& c)
        : game(g), r(quit_matrix(g)), neg_r(g.n, g.n), cfg(c), budget(c.backtrack_budget) {
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j) neg_r(i, j) = -r(i, j);
    }

    // singleton directions by player index first, then mixed directions from
    // the LCP on -R_J by i0 index
    std::vector<Vec<S>> candidates(const Vec<S>& gamma) {
        const std::size_t n = gamma.size();
        std::vector<std::size_t> j_set;
        for (std::size_t j = 0; j < n; ++j)
            if (gamma[j] == S(0)) j_set.push_back(j);
        std::vector<Vec<S>> cands;
        for (std::size_t j : j_set) {
            Vec<S> z(n, S(0));
            z[j] = S(1);
            if (is_viable_direction(r, gamma, z)) cands.push_back(std::move(z));
        }
        for (std::size_t pos = 0; pos < j_set.size(); ++pos) {
            Vec<S> zj;
            try {
                zj = step1_direction(neg_r, j_set, pos);
            } catch (const NoLcpSolutionError&) {
                continue;
            }
            Vec<S> z(n, S(0));
            for (std::size_t k = 0; k < j_set.size(); ++k) z[j_set[k]] = zj[k];
            if (!is_viable_direction(r, gamma, z)) continue;
            bool dup = false;
            for (const auto& c : cands)
                if (c == z) dup = true;
            if (!dup) cands.push_back(std::move(z));
        }
        return cands;
    }

    bool dfs(const Vec<S>& gamma) {
        for (std::size_t k = 0; k < chain_gamma.size(); ++k) {
            if (chain_gamma[k] == gamma) {
                out.prefix.assign(chain_blocks.begin(), chain_blocks.begin() + k);
                out.cycle.assign(chain_blocks.begin() + k, chain_blocks.end());
                return true;
            }
        }
        if (int(chain_blocks.size()) >= cfg.max_events) return false;
        for (auto& z : candidates(gamma)) {
            if (--budget < 0) throw SynthesisBudgetError("direction budget exhausted");
            FlowState<S> st;
            st.gamma = gamma;
            st.active = active_set(gamma);
            st.z = z;
            FlowStep<S> step = flow_segment(game, st);
            if (step.outcome == FlowOutcome::Divergent) continue;
            if (step.outcome == FlowOutcome::Terminal) {
                out.prefix = chain_blocks;
                out.prefix.push_back(PathBlock<S>::flow(z, S(1)));
                out.cycle.clear();
                return true;
            }
            chain_gamma.push_back(gamma);
            chain_blocks.push_back(PathBlock<S>::flow(z, step.rho));
            if (dfs(step.next.gamma)) return true;
            chain_gamma.pop_back();
            chain_blocks.pop_back();
        }
        return false;
    }
};

inline std::vector<int> canonical_rotation(const std::vector<int>& w) {
    std::vector<int> best = w;
    std::vector<int> cur = w;
    for (std::size_t k = 1; k < w.size(); ++k) {
        std::rotate(cur.begin(), cur.begin() + 1, cur.end());
        if (cur < best) best = cur;
    }
    return best;
}

inline bool is_repetition(const std::vector<int>& w) {
    for (std::size_t d = 1; d < w.size(); ++d) {
        if (w.size() % d != 0) continue;
        bool rep = true;
        for (std::size_t k = d; k < w.size() && rep; ++k)
            if (w[k] != w[k % d]) rep = false;
        if (rep) return true;
    }
    return false;
}

/// All closed walks up to max_len in the event digraph (edge i -> j iff the
/// next quitter j's payoff coordinate can be driven to 0 by i, i.e. R_{j,i}
/// > 0), one representative per rotation class, primitive periods only.
inline std::vector<std::vector<int>> closed_walks(const std::vector<std::vector<int>>& adj,
                                                  int max_len, long budget) {
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> out;
    std::vector<int> walk;
    long steps = 0;
    auto extend = [&](auto&& self, int node) -> void {
        if (++steps > budget) return;
        walk.push_back(node);
        // record if the walk closes back to its first node
        for (int next : adj[node]) {
            if (next == walk.front() && walk.size() >= 2 && !is_repetition(walk)) {
                auto canon = canonical_rotation(walk);
                if (seen.insert(canon).second) out.push_back(canon);
            }
        }
        if (int(walk.size()) < max_len) {
            // only visit nodes >= the start node: every rotation class is
            // still generated from its minimal node
            for (int next : adj[node]) {
                if (next >= walk.front()) self(self, next);
            }
        }
        walk.pop_back();
    };
    for (int s = 0; s < int(adj.size()); ++s) extend(extend, s);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

/// Newton refinement of block durations rho for a hypothesized periodic
/// orbit of singleton flows: residual k is the payoff coordinate of quitter
/// order[k] at the start of its block, which must be 0 on an equilibrium
/// orbit. gamma at the cycle start is the fixed point of the cycle map.
inline bool periodic_residual(const Matrix<double>& r, const std::vector<int>& order,
                              const std::vector<double>& rho, std::vector<double>& f) {
    const std::size_t p = order.size(), n = r.rows;
    double beta = 1.0;
    Vec<double> mass(n, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        for (std::size_t i = 0; i < n; ++i) mass[i] += beta * rho[k] * r(i, order[k]);
        beta *= 1.0 - rho[k];
    }
    if (beta > 1.0 - 1e-14) return false;
    Vec<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = mass[i] / (1.0 - beta);
    f.assign(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        f[k] = g[order[k]];
        for (std::size_t i = 0; i < n; ++i)
            g[i] = (g[i] - rho[k] * r(i, order[k])) / (1.0 - rho[k]);
    }
    return true;
}

inline std::optional<std::vector<double>> solve_periodic(const Matrix<double>& r,
                                                         const std::vector<int>& order,
                                                         double guess) {
    const std::size_t p = order.size();
    std::vector<double> rho(p, guess), f, f2;
    if (!periodic_residual(r, order, rho, f)) return std::nullopt;
    for (int iter = 0; iter < 80; ++iter) {
        double worst = 0.0;
        for (double v : f) worst = std::max(worst, std::fabs(v));
        if (worst < 1e-12) return rho;
        // finite-difference Jacobian
        Matrix<double> jac(p, p);
        const double h = 1e-7;
        for (std::size_t c = 0; c < p; ++c) {
            auto bumped = rho;
            bumped[c] += h;
            if (!periodic_residual(r, order, bumped, f2)) return std::nullopt;
            for (std::size_t k = 0; k < p; ++k) jac(k, c) = (f2[k] - f[k]) / h;
        }
        Vec<double> rhs(p);
        for (std::size_t k = 0; k < p; ++k) rhs[k] = -f[k];
        auto sol = solve_linear_system(jac, rhs);
        if (!sol.consistent || !sol.kernel.empty()) return std::nullopt;
        for (std::size_t k = 0; k < p; ++k)
            rho[k] = std::clamp(rho[k] + sol.particular[k], 1e-9, 1.0 - 1e-9);
        if (!periodic_residual(r, order, rho, f)) return std::nullopt;
    }
    return std::nullopt;
}

template <class S>
std::string cycle_key(const std::vector<PathBlock<S>>& cycle) {
    // canonical rotation of the block list, durations rounded so that exact
    // and Newton-refined copies of the same orbit collide
    auto render = [&](std::size_t shift) {
        std::ostringstream os;
        for (std::size_t k = 0; k < cycle.size(); ++k) {
            const auto& b = cycle[(k + shift) % cycle.size()];
            os << (b.kind == BlockKind::Flow ? "F" : "J") << ";";
            const Vec<S>& v = b.kind == BlockKind::Flow ? b.z : b.xi;
            for (const S& x : v) os << std::llround(to_double(x) * 1e9) << ",";
            if (b.kind == BlockKind::Flow) os << "|" << std::llround(to_double(b.rho) * 1e9);
            os << "#";
        }
        return os.str();
    };
    std::string best = render(0);
    for (std::size_t s = 1; s < cycle.size(); ++s) best = std::min(best, render(s));
    return best;
}

}  // namespace detail

/// Enumerates candidate periodic orbits of singleton flows (closed walks in
/// the event digraph), refines each by Newton, and keeps those the
/// independent certifier accepts at cfg.newton_eps.
template <class S>
std::vector<SynthesisResult<S>> enumerate_periodic(const QuittingGame<S>& game,
                                                   const SynthesisConfig& cfg = {}) {
    Matrix<S> r = quit_matrix(game);
    Matrix<double> rd(game.n, game.n);
    for (int i = 0; i < game.n; ++i)
        for (int j = 0; j < game.n; ++j) rd(i, j) = to_double(r(i, j));
    std::vector<std::vector<int>> adj(game.n);
    for (int i = 0; i < game.n; ++i)
        for (int j = 0; j < game.n; ++j)
            if (rd(j, i) > 0.0) adj[i].push_back(j);

    std::vector<SynthesisResult<S>> out;
    for (const auto& order : detail::closed_walks(adj, cfg.max_period, cfg.walk_budget)) {
        std::optional<std::vector<double>> rho;
        for (double guess : {0.25, 0.5, 0.1}) {
            rho = detail::solve_periodic(rd, order, guess);
            if (rho) break;
        }
        if (!rho) continue;
        bool degenerate = false;
        for (double v : *rho)
            if (v < 1e-8 || v > 1.0 - 1e-8) degenerate = true;
        if (degenerate) continue;

        SynthesisResult<S> res;
        for (std::size_t k = 0; k < order.size(); ++k) {
            Vec<S> z(game.n, S(0));
            z[order[k]] = S(1);
            res.path.cycle.push_back(PathBlock<S>::flow(z, scalar_traits<S>::from_double((*rho)[k])));
        }
        try {
            res.cert.report = certify(game, res.path, scalar_traits<S>::from_double(cfg.newton_eps));
        } catch (const InvalidPathError&) {
            continue;
        }
        if (!res.cert.report.certified) continue;
        res.cert.cycle = res.path.cycle;
        res.cert.gamma = payoff_boundaries(game, res.path).terminal;
        out.push_back(std::move(res));
    }
    return out;
}

namespace detail {

template <class S>
void check_preconditions(const QuittingGame<S>& game, const SynthesisConfig& cfg) {
    if (!is_normalized(game))
        throw std::invalid_argument("synthesis requires a normalized game");
    if (cfg.q_samples > 0) {
        QMatrixConfig qc;
        qc.samples = cfg.q_samples;
        for (const auto& mv : principal_minors_q(quit_matrix(game), qc)) {
            if (!mv.verdict.passed())
                throw QMatrixPreconditionError("principal minor " + std::to_string(mv.subset) +
                                               " failed the Q test");
        }
    }
}

template <class S>
std::vector<Vec<S>> start_battery(const QuittingGame<S>& game) {
    const int n = game.n;
    const S m = game.payoff_bound();
    std::vector<Vec<S>> starts;
    auto on_y = [](const Vec<S>& g) {
        bool zero = false;
        for (const S& x : g) {
            if (x < S(0)) return false;
            if (x == S(0)) zero = true;
        }
        return zero;
    };
    // vertices of [0,M]^n on the boundary Y
    for (std::uint32_t mask = 0; mask + 1 < (std::uint32_t(1) << n); ++mask) {
        Vec<S> g(n, S(0));
        for (int i = 0; i < n; ++i)
            if ((mask >> i) & 1) g[i] = m;
        starts.push_back(std::move(g));
    }
    // edge midpoints: one coordinate at M/2, the rest at 0 or M
    for (int mid = 0; mid < n; ++mid) {
        for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << (n - 1)); ++mask) {
            Vec<S> g(n, S(0));
            g[mid] = m / S(2);
            int bit = 0;
            for (int i = 0; i < n; ++i) {
                if (i == mid) continue;
                if ((mask >> bit) & 1) g[i] = m;
                ++bit;
            }
            if (on_y(g)) starts.push_back(std::move(g));
        }
    }
    // nonnegative quit-matrix columns: terminal single-flow candidates
    Matrix<S> r = quit_matrix(game);
    for (int j = 0; j < n; ++j) {
        Vec<S> col = r.column(j);
        if (on_y(col)) starts.push_back(std::move(col));
    }
    return starts;
}

template <class S>
SynthesisResult<S> finish_result(const QuittingGame<S>& game, AbsorptionPath<S> path) {
    SynthesisResult<S> res;
    res.path = std::move(path);
    res.cert.report = certify(game, res.path, S(0));
    if (!res.cert.report.certified)
        throw SynthesisBudgetError("synthesized path failed certification");
    res.cert.cycle = res.path.cycle;
    auto pb = payoff_boundaries(game, res.path);
    res.cert.gamma = res.path.cycle.empty()
                         ? block_avg_payoff(game, res.path.prefix.back())
                         : pb.terminal;
    return res;
}

}  // namespace detail

/// Builds a certified absorption path whose payoff path stays on Y.
/// With a start, runs the exact event-driven search from that payoff vector.
/// Without one, prefers a certified periodic orbit (the exact search cannot
/// land on irrational cycle fixed points) and falls back to the battery of
/// boundary starts.
template <class S>
SynthesisResult<S> synthesize(const QuittingGame<S>& game, std::optional<Vec<S>> start,
                              const SynthesisConfig& cfg = {}) {
    detail::check_preconditions(game, cfg);
    if (start) {
        if (int(start->size()) != game.n)
            throw std::invalid_argument("start dimension mismatch");
        bool zero = false;
        for (const S& x : *start) {
            if (x < S(0)) throw std::invalid_argument("start must be on Y (nonnegative)");
            if (x == S(0)) zero = true;
        }
        if (!zero) throw std::invalid_argument("start must have a zero coordinate");
        detail::SynthSearch<S> search(game, cfg);
        if (!search.dfs(*start))
            throw SynthesisBudgetError("no path found from the given start");
        return detail::finish_result(game, std::move(search.out));
    }
    auto periodic = enumerate_periodic(game, cfg);
    if (!periodic.empty()) return std::move(periodic.front());
    for (const auto& g : detail::start_battery(game)) {
        detail::SynthSearch<S> search(game, cfg);
        try {
            if (search.dfs(g)) return detail::finish_result(game, std::move(search.out));
        } catch (const SynthesisBudgetError&) {
        }
    }
    throw SynthesisBudgetError("search exhausted without a certified path");
}

/// Runs synthesize from every battery start and merges in the periodic-orbit
/// enumeration; results are deduplicated by their cycle up to rotation.
template <class S>
std::vector<SynthesisResult<S>> scan_starts(const QuittingGame<S>& game,
                                            const SynthesisConfig& cfg = {}) {
    detail::check_preconditions(game, cfg);
    std::vector<SynthesisResult<S>> out;
    std::set<std::string> keys;
    auto add = [&](SynthesisResult<S> res) {
        std::string key = res.path.cycle.empty() ? "terminal:" + detail::cycle_key<S>(res.path.prefix)
                                                 : detail::cycle_key<S>(res.path.cycle);
        if (keys.insert(key).second) out.push_back(std::move(res));
    };
    for (const auto& g : detail::start_battery(game)) {
        detail::SynthSearch<S> search(game, cfg);
        try {
            if (search.dfs(g)) add(detail::finish_result(game, std::move(search.out)));
        } catch (const SynthesisBudgetError&) {
        }
    }
    for (auto& res : enumerate_periodic(game, cfg)) add(std::move(res));
    return out;
}

/// The same infinite path started at phase t of its first cycle pass:
/// prefix = remainder of the block containing t, cycle rotated accordingly.
/// Only defined for cycle-only flow paths.
template <class S>
AbsorptionPath<S> shift_start(const AbsorptionPath<S>& path, const S& t) {
    if (!path.prefix.empty() || path.cycle.empty())
        throw InvalidPathError("shift_start needs a cycle-only path");
    for (const auto& b : path.cycle)
        if (b.kind != BlockKind::Flow) throw InvalidPathError("shift_start needs flow blocks");
    if (t < S(0) || t >= S(1)) throw InvalidPathError("shift phase outside [0,1)");
    S cur = S(0);
    std::size_t k = 0;
    while (true) {
        S t_next = cur + (S(1) - cur) * path.cycle[k].absorb();
        if (t < t_next) break;
        cur = t_next;
        k = (k + 1) % path.cycle.size();
    }
    AbsorptionPath<S> out;
    out.allow_non_absorbing = path.allow_non_absorbing;
    for (std::size_t i = 0; i < path.cycle.size(); ++i)
        out.cycle.push_back(path.cycle[(k + 1 + i) % path.cycle.size()]);
    if (t > cur) {
        S t_next = cur + (S(1) - cur) * path.cycle[k].absorb();
        S rem = (t_next - t) / (S(1) - t);
        if (rem > S(0))
            out.prefix.push_back(PathBlock<S>::flow(path.cycle[k].z, rem));
        else
            return out;  // t exactly at the block end: pure rotation
    } else {
        // t at a block start: rotation beginning with block k
        out.cycle.clear();
        for (std::size_t i = 0; i < path.cycle.size(); ++i)
            out.cycle.push_back(path.cycle[(k + i) % path.cycle.size()]);
    }
    return out;
}

}  // namespace quitpath
