#pragma once

// Central finite-difference oracle for the training objective. Implemented
// against the objective definition alone, so it validates the analytic
// gradient rather than restating it.

#include <cmath>
#include <cstddef>
#include <vector>

#include "triage/features.hpp"
#include "triage/model.hpp"

namespace test_support {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t worst_component = 0;  // n = bias, < n = weight index
    bool all_margins_away_from_kink = true;
};

inline double objective_at(std::vector<double> w, double b,
                           const std::vector<triage::FeatureVector>& matrix,
                           const std::vector<int>& labels, triage::LossKind loss, double lambda,
                           double cw) {
    return triage::loss_and_gradient(w, b, matrix, labels, loss, lambda, cw).loss;
}

// Componentwise relative error between the analytic gradient and central
// differences with step h. Relative error uses max(|analytic|, |numeric|, 1)
// as denominator so near-zero components compare absolutely.
inline GradCheckResult check_gradient(const std::vector<double>& w, double b,
                                      const std::vector<triage::FeatureVector>& matrix,
                                      const std::vector<int>& labels, triage::LossKind loss,
                                      double lambda, double cw, double h = 1e-5) {
    GradCheckResult result;
    triage::LossGrad analytic = triage::loss_and_gradient(w, b, matrix, labels, loss, lambda, cw);

    // Record whether any sample sits within 0.01 of the hinge kink at
    // margin 1; the subgradient is not expected to match there.
    if (loss == triage::LossKind::hinge) {
        for (std::size_t i = 0; i < matrix.size(); ++i) {
            double m = b;
            for (std::size_t k = 0; k < w.size(); ++k) m += w[k] * matrix[i].values[k];
            m *= labels[i];
            if (std::fabs(m - 1.0) < 0.01) result.all_margins_away_from_kink = false;
        }
    }

    auto update = [&](std::size_t comp, double analytic_g, double numeric_g) {
        double denom = std::max({std::fabs(analytic_g), std::fabs(numeric_g), 1.0});
        double rel = std::fabs(analytic_g - numeric_g) / denom;
        if (rel > result.max_rel_err) {
            result.max_rel_err = rel;
            result.worst_component = comp;
        }
    };

    std::vector<double> wp = w;
    for (std::size_t k = 0; k < w.size(); ++k) {
        wp[k] = w[k] + h;
        double up = objective_at(wp, b, matrix, labels, loss, lambda, cw);
        wp[k] = w[k] - h;
        double dn = objective_at(wp, b, matrix, labels, loss, lambda, cw);
        wp[k] = w[k];
        update(k, analytic.grad_w[k], (up - dn) / (2.0 * h));
    }
    double up = objective_at(w, b + h, matrix, labels, loss, lambda, cw);
    double dn = objective_at(w, b - h, matrix, labels, loss, lambda, cw);
    update(w.size(), analytic.grad_b, (up - dn) / (2.0 * h));
    return result;
}

}  // namespace test_support
