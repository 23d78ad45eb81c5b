#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "subloc/cleanup.hpp"
#include "subloc/model.hpp"
#include "subloc/mp.hpp"
#include "subloc/schedule.hpp"

namespace subloc {

// Knobs for the full recovery pipeline. d = 0 lets the pipeline pick the
// cheapest degree whose transition sits below lambda; subcritical lambdas
// have no such degree, so they are rejected unless allow_subcritical is
// set, in which case a fixed-degree truncated schedule is used and the
// step-count constant falls back to a default.
struct PipelineOptions {
    double epsilon = 1e-4;
    int d = 0;
    Variant variant = Variant::optimal;
    bool allow_subcritical = false;
    int subcritical_d = 3;
    int subcritical_horizon = 25;
    double subcritical_s_star = 4.0;
};

struct StageTimings {
    double generate_ms = 0.0;
    double mp_ms = 0.0;
    double cleanup_ms = 0.0;
};

struct RecoveryResult {
    std::vector<int> c_tilde;  // post-threshold candidates
    std::vector<int> c_hat;    // final size-K estimate
    ErrorReport tilde_report;  // c_tilde vs truth (size may differ from K)
    ErrorReport hat_report;
    Eigen::VectorXd beliefs;
    int d = 0;
    int t_star = 0;
    double mu_hat_tstar = 0.0;
    double s_star = 0.0;
    double eta = 0.0;  // NaN when lambda is below the certificate regime
    StageTimings timings;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// Truncates a budget-T schedule at the first stalled step so the engine
// does not burn iterations on a converged recursion.
inline NonlinearitySchedule stalled_schedule(double lambda, int d, int horizon,
                                             Variant variant) {
    NonlinearitySchedule s = build_schedule_horizon(lambda, d, horizon, variant);
    int t_star = s.t_star;
    for (int t = 1; t + 1 < static_cast<int>(s.mu_hat.size()); ++t) {
        if (std::abs(s.mu_hat[t + 1] - s.mu_hat[t]) < 1e-9) {
            t_star = t + 1;
            break;
        }
    }
    if (t_star < 2) t_star = 2;
    s.t_star = t_star;
    s.coeffs.resize(t_star);
    s.mu_hat.resize(t_star + 1);
    return s;
}

}  // namespace detail

// Full recovery run on one planted instance: schedule construction,
// message passing, belief thresholding at half the predicted mean, then
// spectral cleanup padded back up to size K. The cleanup stage is skipped
// when thresholding leaves nothing, in which case the estimate is the
// top-K beliefs directly.
inline RecoveryResult run_alg1(const PlantedInstance& inst, const PipelineOptions& opt,
                               std::uint64_t cleanup_seed) {
    const double lambda = inst.lambda();
    RecoveryResult res;

    NonlinearitySchedule sched;
    const double M = 8.0 * std::log(1.0 / opt.epsilon);
    bool subcritical = false;
    if (opt.d > 0) {
        sched = build_schedule(lambda, opt.d, M, opt.variant);
    } else if (lambda > kInvE) {
        sched = build_schedule(lambda, d_star(lambda), M, opt.variant);
    } else if (opt.allow_subcritical) {
        subcritical = true;
        sched = detail::stalled_schedule(lambda, opt.subcritical_d, opt.subcritical_horizon,
                                         opt.variant);
    } else {
        throw SubcriticalLambda("run_alg1: lambda <= 1/e and no explicit degree given");
    }
    res.d = sched.d;
    res.t_star = sched.t_star;
    res.mu_hat_tstar = sched.mu_hat_tstar();

    auto t0 = std::chrono::steady_clock::now();
    Eigen::MatrixXd A = scale(inst.W, inst.n);
    res.timings.generate_ms = detail::ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    res.beliefs = run_mp(A, sched);
    res.timings.mp_ms = detail::ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    res.c_tilde = threshold_beliefs(res.beliefs, res.mu_hat_tstar);
    res.tilde_report = error_report(res.c_tilde, inst.support, inst.K);

    if (subcritical) {
        res.s_star = opt.subcritical_s_star;
        res.eta = std::numeric_limits<double>::quiet_NaN();
    } else {
        try {
            res.s_star = s_star_symmetric(opt.epsilon, lambda);
        } catch (const InvalidRegime&) {
            res.s_star = opt.subcritical_s_star;
        }
        res.eta = (lambda >= kInvE) ? eta_symmetric(opt.epsilon, lambda)
                                    : std::numeric_limits<double>::quiet_NaN();
    }

    if (res.c_tilde.empty()) {
        // Nothing survived the threshold; fall back to ranking by belief.
        std::vector<int> all(inst.n);
        for (int i = 0; i < inst.n; ++i) all[i] = i;
        std::vector<double> score(all.size());
        for (int i = 0; i < inst.n; ++i) score[i] = res.beliefs(i);
        res.c_hat = detail::top_by_score(all, score, inst.K, {}, res.beliefs);
    } else {
        res.c_hat = power_cleanup(A, res.c_tilde, inst.K, res.s_star, cleanup_seed,
                                  res.beliefs);
    }
    res.hat_report = error_report(res.c_hat, inst.support, inst.K);
    res.timings.cleanup_ms = detail::ms_since(t0);
    return res;
}

}  // namespace subloc
