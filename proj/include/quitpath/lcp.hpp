#pragma once

#include "quitpath/linalg.hpp"
#include "quitpath/scalar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace quitpath {

/// The simplex-normalized linear complementarity problem:
/// find w >= 0 and z on the simplex over {0,...,n} with
/// w = z_0 q + sum_i z_i R^i and z_i = 0 or w_i = 0 for i >= 1.
template <class S>
struct LcpInstance {
    Matrix<S> R;
    Vec<S> q;
};

template <class S>
struct LcpSolution {
    Vec<S> w;        // length n
    Vec<S> z;        // length n+1, z[0] is the q-weight
    std::uint32_t support = 0;  // bit i-1 set iff z_i allowed positive
};

template <class S>
bool lcp_residual_ok(const LcpInstance<S>& inst, const LcpSolution<S>& sol, double tol) {
    const std::size_t n = inst.q.size();
    S sum = sol.z[0];
    for (std::size_t i = 1; i <= n; ++i) sum += sol.z[i];
    if (abs_value(sum - S(1)) > scalar_traits<S>::from_double(tol)) return false;
    for (std::size_t j = 0; j < n; ++j) {
        S w = sol.z[0] * inst.q[j];
        for (std::size_t i = 0; i < n; ++i) w += sol.z[i + 1] * inst.R(j, i);
        if (abs_value(w - sol.w[j]) > scalar_traits<S>::from_double(tol)) return false;
        if (to_double(sol.w[j]) < -tol || to_double(sol.z[j + 1]) < -tol) return false;
        if (to_double(sol.z[j + 1]) > tol && to_double(sol.w[j]) > tol) return false;
    }
    return true;
}

namespace detail {

inline std::vector<std::uint32_t> supports_by_size(std::size_t n) {
    std::vector<std::uint32_t> masks(std::size_t(1) << n);
    std::iota(masks.begin(), masks.end(), 0u);
    std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    return masks;
}

}  // namespace detail

/// Exhaustive support enumeration. For every support the complementarity
/// constraints reduce to a small linear system; degenerate (singular) systems
/// fall back to exact Fourier-Motzkin feasibility over the solution family.
/// Returns solutions ordered by (support size, support mask); with
/// `first_only` stops at the first one.
template <class S>
std::vector<LcpSolution<S>> solve_enumerate(const LcpInstance<S>& inst, bool first_only = false,
                                            double tol = 0.0) {
    const std::size_t n = inst.q.size();
    if (n > 16) throw std::invalid_argument("lcp dimension capped at 16");
    const S stol = scalar_traits<S>::from_double(tol);
    std::vector<LcpSolution<S>> out;

    for (std::uint32_t mask : detail::supports_by_size(n)) {
        std::vector<std::size_t> sup;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1) sup.push_back(i);
        const std::size_t m = sup.size() + 1;  // unknowns: z0, then z_i for i in support

        Matrix<S> a(m, m);
        Vec<S> b(m, S(0));
        for (std::size_t r = 0; r < sup.size(); ++r) {  // w_j = 0 for j in support
            a(r, 0) = inst.q[sup[r]];
            for (std::size_t c = 0; c < sup.size(); ++c) a(r, c + 1) = inst.R(sup[r], sup[c]);
        }
        for (std::size_t c = 0; c < m; ++c) a(m - 1, c) = S(1);  // simplex constraint
        b[m - 1] = S(1);

        auto lin = solve_linear_system(a, b);
        if (!lin.consistent) continue;

        Vec<S> point;
        if (lin.kernel.empty()) {
            point = lin.particular;
        } else {
            // degenerate support: search the affine solution family for a
            // point meeting the sign constraints
            std::vector<Inequality<S>> ineqs;
            auto affine = [&](std::size_t comp) {
                Inequality<S> q;
                q.coef.resize(lin.kernel.size());
                for (std::size_t k = 0; k < lin.kernel.size(); ++k) q.coef[k] = lin.kernel[k][comp];
                q.offset = lin.particular[comp];
                return q;
            };
            for (std::size_t c = 0; c < m; ++c) ineqs.push_back(affine(c));  // z >= 0
            for (std::size_t j = 0; j < n; ++j) {
                if ((mask >> j) & 1) continue;  // w_j >= 0 for j off support
                Inequality<S> q;
                q.coef.assign(lin.kernel.size(), S(0));
                q.offset = lin.particular[0] * inst.q[j];
                for (std::size_t c = 0; c < sup.size(); ++c)
                    q.offset += lin.particular[c + 1] * inst.R(j, sup[c]);
                for (std::size_t k = 0; k < lin.kernel.size(); ++k) {
                    q.coef[k] = lin.kernel[k][0] * inst.q[j];
                    for (std::size_t c = 0; c < sup.size(); ++c)
                        q.coef[k] += lin.kernel[k][c + 1] * inst.R(j, sup[c]);
                }
                ineqs.push_back(std::move(q));
            }
            auto witness = fm_feasible(std::move(ineqs), lin.kernel.size());
            if (!witness) continue;
            point = lin.particular;
            for (std::size_t k = 0; k < lin.kernel.size(); ++k)
                for (std::size_t c = 0; c < m; ++c) point[c] += (*witness)[k] * lin.kernel[k][c];
        }

        LcpSolution<S> sol;
        sol.support = mask;
        sol.z.assign(n + 1, S(0));
        sol.z[0] = point[0];
        bool ok = !(point[0] < -stol);
        for (std::size_t c = 0; c < sup.size() && ok; ++c) {
            if (point[c + 1] < -stol) ok = false;
            sol.z[sup[c] + 1] = point[c + 1];
        }
        if (!ok) continue;
        sol.w.assign(n, S(0));
        for (std::size_t j = 0; j < n && ok; ++j) {
            S w = sol.z[0] * inst.q[j];
            for (std::size_t i = 0; i < n; ++i) w += sol.z[i + 1] * inst.R(j, i);
            if ((mask >> j) & 1) w = S(0);  // solved to zero; clamp rounding noise
            else if (w < -stol) ok = false;
            else if (w < S(0)) w = S(0);
            sol.w[j] = w;
        }
        if (!ok) continue;
        out.push_back(std::move(sol));
        if (first_only) break;
    }
    return out;
}

/// Verdict of the sampled Q-matrix falsifier. A "no counterexample" verdict
/// is evidence, not a proof: the test is a seeded sampler, not a decision
/// procedure.
struct QMatrixVerdict {
    bool counterexample_found = false;
    long samples_checked = 0;
    Vec<double> counterexample;  // empty unless found

    bool passed() const { return !counterexample_found; }
};

struct QMatrixConfig {
    std::uint64_t seed = 20230411;
    long samples = 10000;
};

namespace detail {

template <class S>
std::optional<Vec<double>> q_counterexample(const Matrix<S>& r_exactish, const Matrix<double>& rd,
                                            const Vec<double>& q) {
    LcpInstance<double> fast{rd, q};
    if (!solve_enumerate(fast, true, 1e-9).empty()) return std::nullopt;
    // no solution at double precision: confirm exactly before reporting
    const std::size_t n = q.size();
    LcpInstance<Rational> exact;
    exact.R = Matrix<Rational>(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            exact.R(i, j) = scalar_traits<Rational>::from_double(to_double(r_exactish(i, j)));
    exact.q.resize(n);
    for (std::size_t i = 0; i < n; ++i) exact.q[i] = scalar_traits<Rational>::from_double(q[i]);
    if (!solve_enumerate(exact, true).empty()) return std::nullopt;
    return q;
}

}  // namespace detail

/// Deterministic seeded falsifier: checks lcp(R,q) solvability over all
/// nonzero sign-pattern representatives in {-1,0,1}^n plus uniform sphere
/// samples, up to cfg.samples right-hand sides in total.
template <class S>
QMatrixVerdict is_q_matrix_sampled(const Matrix<S>& r, const QMatrixConfig& cfg = {}) {
    if (cfg.samples < 1) throw std::invalid_argument("samples must be >= 1");
    const std::size_t n = r.rows;
    Matrix<double> rd(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) rd(i, j) = to_double(r(i, j));

    QMatrixVerdict verdict;
    auto try_q = [&](const Vec<double>& q) -> bool {
        ++verdict.samples_checked;
        auto ce = detail::q_counterexample(r, rd, q);
        if (ce) {
            verdict.counterexample_found = true;
            verdict.counterexample = *ce;
            return true;
        }
        return false;
    };

    // sign-pattern representatives
    long patterns = 1;
    for (std::size_t i = 0; i < n; ++i) patterns *= 3;
    for (long code = 1; code < patterns && verdict.samples_checked < cfg.samples; ++code) {
        Vec<double> q(n, 0.0);
        long c = code;
        for (std::size_t i = 0; i < n; ++i) {
            int d = static_cast<int>(c % 3);
            c /= 3;
            q[i] = d == 0 ? 0.0 : (d == 1 ? 1.0 : -1.0);
        }
        if (try_q(q)) return verdict;
    }

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (verdict.samples_checked < cfg.samples) {
        Vec<double> q(n);
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = gauss(rng);
            norm += q[i] * q[i];
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) continue;
        for (std::size_t i = 0; i < n; ++i) q[i] /= norm;
        if (try_q(q)) return verdict;
    }
    return verdict;
}

/// Q verdict for every nonempty principal submatrix R_J.
template <class S>
struct MinorVerdict {
    std::uint32_t subset = 0;
    QMatrixVerdict verdict;
};

template <class S>
std::vector<MinorVerdict<S>> principal_minors_q(const Matrix<S>& r, const QMatrixConfig& cfg = {}) {
    const std::size_t n = r.rows;
    if (n > 12) throw std::invalid_argument("principal minor scan capped at 12 players");
    std::vector<MinorVerdict<S>> out;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1) idx.push_back(i);
        QMatrixConfig sub_cfg = cfg;
        sub_cfg.seed = cfg.seed + mask;  // deterministic per subset
        MinorVerdict<S> mv;
        mv.subset = mask;
        mv.verdict = is_q_matrix_sampled(r.submatrix(idx), sub_cfg);
        out.push_back(std::move(mv));
    }
    return out;
}

struct NoLcpSolutionError : std::runtime_error {
    NoLcpSolutionError() : std::runtime_error("lcp has no solution; Q-matrix precondition failed") {}
};

/// Step-1 direction finder: a distribution z on J whose weighted column
/// combination of R_J is componentwise nonnegative with equality somewhere.
/// Solves lcp(R_J, q_hat) with q_hat = -e_{i0} and rescales away z_0.
/// Preference among multiple solutions: smallest support, then smallest
/// support mask; this pins the output for reproducible synthesis.
template <class S>
Vec<S> step1_direction(const Matrix<S>& r, const std::vector<std::size_t>& subset,
                       std::size_t i0_pos) {
    const std::size_t m = subset.size();
    if (i0_pos >= m) throw std::invalid_argument("i0 must index into the subset");
    LcpInstance<S> inst;
    inst.R = r.submatrix(subset);
    inst.q.assign(m, S(0));
    inst.q[i0_pos] = S(-1);
    auto sols = solve_enumerate(inst, false, scalar_traits<S>::exact ? 0.0 : 1e-10);
    for (const auto& sol : sols) {
        if (sol.z[0] == S(1)) continue;  // excluded: q_hat_{i0} < 0 forbids z_0 = 1
        Vec<S> z(m, S(0));
        S denom = S(1) - sol.z[0];
        for (std::size_t i = 0; i < m; ++i) z[i] = sol.z[i + 1] / denom;
        // post-hoc verification of the nonnegativity / equality conditions
        bool nonneg = true, has_zero = false;
        const S slack = scalar_traits<S>::from_double(scalar_traits<S>::exact ? 0.0 : 1e-9);
        for (std::size_t j = 0; j < m; ++j) {
            S comb = S(0);
            for (std::size_t i = 0; i < m; ++i) comb += z[i] * inst.R(j, i);
            if (comb < -slack) nonneg = false;
            if (abs_value(comb) <= slack) has_zero = true;
        }
        if (nonneg && has_zero) return z;
    }
    throw NoLcpSolutionError();
}

}  // namespace quitpath
