#pragma once

#include "quitpath/scalar.hpp"

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace quitpath {

/// Dense row-major matrix, sized once at construction.
template <class S>
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<S> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, S(0)) {}

    S& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const S& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    Vec<S> column(std::size_t j) const {
        Vec<S> out(rows);
        for (std::size_t i = 0; i < rows; ++i) out[i] = (*this)(i, j);
        return out;
    }

    Vec<S> mul(const Vec<S>& x) const {
        Vec<S> out(rows, S(0));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) out[i] += (*this)(i, j) * x[j];
        return out;
    }

    Matrix submatrix(const std::vector<std::size_t>& idx) const {
        Matrix out(idx.size(), idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = (*this)(idx[i], idx[j]);
        return out;
    }
};

/// Result of row reduction on [A|b]: either inconsistent, or a particular
/// solution plus a basis of the kernel (empty basis = unique solution).
template <class S>
struct LinearSolution {
    bool consistent = false;
    Vec<S> particular;
    std::vector<Vec<S>> kernel;
};

template <class S>
LinearSolution<S> solve_linear_system(Matrix<S> a, Vec<S> b) {
    const std::size_t m = a.rows, n = a.cols;
    std::vector<std::size_t> pivot_col;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t piv = row;
        // exact scalars only need a nonzero pivot; for doubles pick the largest
        for (std::size_t i = row; i < m; ++i)
            if (abs_value(a(i, col)) > abs_value(a(piv, col))) piv = i;
        if (a(piv, col) == S(0)) continue;
        if (piv != row) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(row, j));
            std::swap(b[piv], b[row]);
        }
        S inv = a(row, col);
        for (std::size_t j = col; j < n; ++j) a(row, j) /= inv;
        b[row] /= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row || a(i, col) == S(0)) continue;
            S f = a(i, col);
            for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(row, j);
            b[i] -= f * b[row];
        }
        pivot_col.push_back(col);
        ++row;
    }
    LinearSolution<S> sol;
    for (std::size_t i = row; i < m; ++i)
        if (b[i] != S(0)) return sol;  // inconsistent
    sol.consistent = true;
    sol.particular.assign(n, S(0));
    std::vector<bool> is_pivot(n, false);
    for (std::size_t k = 0; k < pivot_col.size(); ++k) {
        is_pivot[pivot_col[k]] = true;
        sol.particular[pivot_col[k]] = b[k];
    }
    for (std::size_t f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        Vec<S> v(n, S(0));
        v[f] = S(1);
        for (std::size_t k = 0; k < pivot_col.size(); ++k) v[pivot_col[k]] = -a(k, f);
        sol.kernel.push_back(std::move(v));
    }
    return sol;
}

/// Feasibility of a system of linear inequalities sum_j c_j x_j + d >= 0
/// by Fourier-Motzkin elimination. Returns a witness point when feasible.
/// Only used on tiny systems (degenerate LCP supports), where the
/// doubly-exponential blowup is irrelevant.
template <class S>
struct Inequality {
    Vec<S> coef;  // length = number of variables
    S offset = S(0);
};

template <class S>
std::optional<Vec<S>> fm_feasible(std::vector<Inequality<S>> ineqs, std::size_t nvars) {
    if (nvars == 0) {
        for (const auto& q : ineqs)
            if (q.offset < S(0)) return std::nullopt;
        return Vec<S>{};
    }
    const std::size_t v = nvars - 1;
    std::vector<Inequality<S>> lower, upper, rest;
    for (auto& q : ineqs) {
        if (q.coef[v] > S(0)) lower.push_back(std::move(q));
        else if (q.coef[v] < S(0)) upper.push_back(std::move(q));
        else rest.push_back(std::move(q));
    }
    for (const auto& lo : lower) {
        for (const auto& up : upper) {
            // combine a*x_v + L >= 0 (a>0) with -b*x_v + U >= 0 (b>0)
            Inequality<S> c;
            c.coef.assign(nvars - 1, S(0));
            S a = lo.coef[v], b = -up.coef[v];
            for (std::size_t j = 0; j < v; ++j) c.coef[j] = b * lo.coef[j] + a * up.coef[j];
            c.offset = b * lo.offset + a * up.offset;
            rest.push_back(std::move(c));
        }
    }
    for (auto& q : rest) q.coef.resize(v);
    auto sub = fm_feasible(std::move(rest), v);
    if (!sub) return std::nullopt;
    Vec<S> point = *sub;
    // back-substitute: x_v must satisfy x_v >= -L/a and x_v <= U/b
    bool has_lo = false, has_hi = false;
    S lo_val = S(0), hi_val = S(0);
    for (const auto& q : lower) {
        S bound = -q.offset;
        for (std::size_t j = 0; j < v; ++j) bound -= q.coef[j] * point[j];
        bound /= q.coef[v];
        if (!has_lo || bound > lo_val) { lo_val = bound; has_lo = true; }
    }
    for (const auto& q : upper) {
        S bound = q.offset;
        for (std::size_t j = 0; j < v; ++j) bound += q.coef[j] * point[j];
        bound /= -q.coef[v];
        if (!has_hi || bound < hi_val) { hi_val = bound; has_hi = true; }
    }
    S x;
    if (has_lo && has_hi) x = (lo_val + hi_val) / S(2);
    else if (has_lo) x = lo_val;
    else if (has_hi) x = hi_val;
    else x = S(0);
    point.push_back(x);
    return point;
}

}  // namespace quitpath
