#pragma once

// Exact minimizer of the training objective over a regular (w, b) grid.
//
// Two implementations:
//   grid_min_enumerate — walks every grid point; only usable for <= 3 dims.
//   grid_min_branch_bound — exact branch-and-bound over index boxes, usable
//     at 5 dims where full enumeration (121^5 points) is not.
// The branch-and-bound prune uses the convexity of the objective: for any
// subgradient g at the box centre c, f(x) >= f(c) + g.(x - c), so
// f over the box is at least f(c) - sum_i |g_i| * halfwidth_i. A box whose
// bound cannot beat the incumbent contains no better grid point. Both
// implementations return the same value (cross-checked in the test suite).

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "triage/features.hpp"
#include "triage/model.hpp"

namespace test_support {

struct GridSpec {
    double lo = -3.0;
    double hi = 3.0;
    double step = 0.05;

    int points() const { return static_cast<int>(std::llround((hi - lo) / step)) + 1; }
    double value(int k) const { return lo + step * k; }
};

struct GridProblem {
    const std::vector<triage::FeatureVector>* matrix = nullptr;
    const std::vector<int>* labels = nullptr;
    triage::LossKind loss = triage::LossKind::logistic;
    double lambda = 0.0;
    double cw = 1.0;
    GridSpec grid;

    std::size_t dims() const { return (*matrix)[0].values.size() + 1; }  // + bias

    double eval(const std::vector<double>& point) const {
        std::vector<double> w(point.begin(), point.end() - 1);
        return triage::loss_and_gradient(w, point.back(), *matrix, *labels, loss, lambda, cw)
            .loss;
    }
};

struct GridResult {
    double min_value = std::numeric_limits<double>::infinity();
    std::vector<int> argmin;  // grid indices, bias last
    std::uint64_t evaluated = 0;
};

inline GridResult grid_min_enumerate(const GridProblem& p) {
    const std::size_t d = p.dims();
    const int n = p.grid.points();
    GridResult result;
    std::vector<int> idx(d, 0);
    std::vector<double> point(d);
    for (;;) {
        for (std::size_t i = 0; i < d; ++i) point[i] = p.grid.value(idx[i]);
        double v = p.eval(point);
        ++result.evaluated;
        if (v < result.min_value) {
            result.min_value = v;
            result.argmin = idx;
        }
        std::size_t i = 0;
        while (i < d && ++idx[i] == n) {
            idx[i] = 0;
            ++i;
        }
        if (i == d) break;
    }
    return result;
}

namespace detail {

struct BBState {
    const GridProblem* p = nullptr;
    GridResult result;
    // Guard added to the lower bound before pruning, protecting the exact
    // minimum against floating-point slop in the bound itself.
    double guard = 0.0;
};

inline void bb_enumerate_leaf(BBState& st, const std::vector<std::pair<int, int>>& box) {
    const std::size_t d = box.size();
    std::vector<int> idx(d);
    for (std::size_t i = 0; i < d; ++i) idx[i] = box[i].first;
    std::vector<double> point(d);
    for (;;) {
        for (std::size_t i = 0; i < d; ++i) point[i] = st.p->grid.value(idx[i]);
        double v = st.p->eval(point);
        ++st.result.evaluated;
        if (v < st.result.min_value) {
            st.result.min_value = v;
            st.result.argmin = idx;
        }
        std::size_t i = 0;
        while (i < d && ++idx[i] > box[i].second) {
            idx[i] = box[i].first;
            ++i;
        }
        if (i == d) break;
    }
}

inline void bb_visit(BBState& st, std::vector<std::pair<int, int>>& box) {
    const std::size_t d = box.size();
    std::uint64_t cells = 1;
    for (const auto& [lo, hi] : box) cells *= static_cast<std::uint64_t>(hi - lo + 1);
    if (cells <= 243) {
        bb_enumerate_leaf(st, box);
        return;
    }

    // Subgradient bound at the box centre.
    std::vector<double> centre(d), halfwidth(d);
    for (std::size_t i = 0; i < d; ++i) {
        double lo = st.p->grid.value(box[i].first);
        double hi = st.p->grid.value(box[i].second);
        centre[i] = 0.5 * (lo + hi);
        halfwidth[i] = 0.5 * (hi - lo);
    }
    std::vector<double> w(centre.begin(), centre.end() - 1);
    triage::LossGrad lg = triage::loss_and_gradient(w, centre.back(), *st.p->matrix,
                                                    *st.p->labels, st.p->loss, st.p->lambda,
                                                    st.p->cw);
    ++st.result.evaluated;
    double bound = lg.loss;
    for (std::size_t i = 0; i + 1 < d; ++i) bound -= std::fabs(lg.grad_w[i]) * halfwidth[i];
    bound -= std::fabs(lg.grad_b) * halfwidth[d - 1];
    if (bound - st.guard >= st.result.min_value) return;

    // Split the widest dimension; visit the half nearer the downhill
    // direction first so the incumbent tightens early.
    std::size_t widest = 0;
    for (std::size_t i = 1; i < d; ++i) {
        if (box[i].second - box[i].first > box[widest].second - box[widest].first) widest = i;
    }
    int lo = box[widest].first, hi = box[widest].second;
    int mid = lo + (hi - lo) / 2;
    double g = widest + 1 < d ? lg.grad_w[widest] : lg.grad_b;
    auto visit_half = [&](int a, int b) {
        box[widest] = {a, b};
        bb_visit(st, box);
        box[widest] = {lo, hi};
    };
    if (g > 0) {  // downhill is toward smaller values
        visit_half(lo, mid);
        visit_half(mid + 1, hi);
    } else {
        visit_half(mid + 1, hi);
        visit_half(lo, mid);
    }
}

}  // namespace detail

// `warm_starts`: optional grid points (index vectors) evaluated up front to
// seed the incumbent; they only accelerate pruning, never change the result.
inline GridResult grid_min_branch_bound(const GridProblem& p,
                                        const std::vector<std::vector<int>>& warm_starts = {}) {
    detail::BBState st;
    st.p = &p;
    st.guard = 1e-9;
    const std::size_t d = p.dims();
    std::vector<double> point(d);
    for (const auto& idx : warm_starts) {
        if (idx.size() != d) continue;
        for (std::size_t i = 0; i < d; ++i) point[i] = p.grid.value(idx[i]);
        double v = p.eval(point);
        ++st.result.evaluated;
        if (v < st.result.min_value) {
            st.result.min_value = v;
            st.result.argmin = idx;
        }
    }
    std::vector<std::pair<int, int>> box(d, {0, p.grid.points() - 1});
    detail::bb_visit(st, box);
    return st.result;
}

// Nearest in-grid index vector for a continuous (w, b) point.
inline std::vector<int> snap_to_grid(const std::vector<double>& w, double b, const GridSpec& g) {
    std::vector<int> idx;
    auto snap = [&](double v) {
        int k = static_cast<int>(std::llround((v - g.lo) / g.step));
        if (k < 0) k = 0;
        if (k >= g.points()) k = g.points() - 1;
        return k;
    };
    for (double v : w) idx.push_back(snap(v));
    idx.push_back(snap(b));
    return idx;
}

}  // namespace test_support
