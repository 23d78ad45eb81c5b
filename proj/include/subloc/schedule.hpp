#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "subloc/errors.hpp"
#include "subloc/hermite.hpp"
#include "subloc/state_evolution.hpp"

namespace subloc {

// Which per-iteration transform the message-passing run applies.
//   optimal: the degree-d Hermite polynomial tuned to mu_hat_t
//   affine:  (1 + mu_hat_t x)/sqrt(1 + mu_hat_t^2), i.e. optimal with d=1
//   linear:  constant 1 at t=0, identity afterwards (no adaptation)
enum class Variant { optimal, linear, affine };

inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::optimal: return "optimal";
        case Variant::linear: return "linear";
        case Variant::affine: return "affine";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& s) {
    if (s == "optimal") return Variant::optimal;
    if (s == "linear") return Variant::linear;
    if (s == "affine") return Variant::affine;
    throw Error("unknown variant: " + s);
}

// Immutable per-iteration coefficient plan for one message-passing run.
// coeffs[t] is applied when producing iteration t+1 from iteration t, so a
// horizon-t* run consumes entries 0..t*-1; the two-sided run consumes one
// more (entries 0..t*) because its final half-step lands on index t*+1.
// mu_hat holds the predicted trace alongside, one entry past the last
// consumed coefficient, so thresholds can read mu_hat[t_star] directly.
struct NonlinearitySchedule {
    int d = 1;
    Variant variant = Variant::optimal;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    int t_star = 0;
    std::vector<HermiteCoeffs> coeffs;
    std::vector<double> mu_hat;

    double mu_hat_tstar() const { return mu_hat.at(t_star); }
};

namespace detail {

// Predicted trace for the linear variant: mu_hat_t^2 = lambda^t for t >= 1
// (the t=0 transform is the constant 1, which seeds mu_hat_1^2 = lambda).
inline SETrace linear_trace(double lambda, Stop stop) {
    if (!(lambda > 0.0)) throw Error("linear schedule: lambda must be positive");
    SETrace tr;
    tr.lambda1 = tr.lambda2 = lambda;
    tr.d = 1;
    tr.values_sq.push_back(0.0);
    tr.values.push_back(0.0);
    for (int t = 0;; ++t) {
        if (stop.kind == Stop::Kind::horizon && t == stop.T) break;
        double x = (t == 0) ? lambda : lambda * tr.values_sq[t];
        tr.values_sq.push_back(x);
        tr.values.push_back(std::sqrt(x));
        int n = t + 1;
        if (stop.kind == Stop::Kind::horizon) {
            if (x > kDivergeSq) tr.diverged = true;
            continue;
        }
        if (tr.values[n] > stop.M) {
            tr.t_star = n;
            tr.diverged = true;
            break;
        }
        if (n >= 2 && std::abs(tr.values[n] - tr.values[n - 1]) < kStallTol) {
            throw NoDivergence("linear schedule stalls at mu_hat = " +
                               std::to_string(tr.values[n]) + " (lambda <= 1)");
        }
        if (n >= kSeIterCap) {
            throw NoDivergence("linear schedule did not cross M within cap");
        }
    }
    return tr;
}

inline HermiteCoeffs schedule_entry(Variant variant, double mu_hat_t, int d) {
    switch (variant) {
        case Variant::optimal:
            return optimal_coeffs(mu_hat_t, d);
        case Variant::affine:
            return optimal_coeffs(mu_hat_t, 1);
        case Variant::linear: {
            HermiteCoeffs c;
            if (mu_hat_t == 0.0) {
                c.d = 0;
                c.a = {1.0};
            } else {
                c.d = 1;
                c.a = {0.0, 1.0};
            }
            return c;
        }
    }
    throw Error("unreachable variant");
}

inline SETrace trace_for(Variant variant, double lambda, int d, Stop stop) {
    switch (variant) {
        case Variant::optimal: return se_trace(lambda, d, stop);
        case Variant::affine: return se_trace(lambda, 1, stop);
        case Variant::linear: return linear_trace(lambda, stop);
    }
    throw Error("unreachable variant");
}

inline NonlinearitySchedule assemble(const SETrace& tr, Variant variant, int d,
                                     int horizon, int entries) {
    NonlinearitySchedule s;
    s.d = (variant == Variant::optimal) ? d : 1;
    s.variant = variant;
    s.lambda1 = tr.lambda1;
    s.lambda2 = tr.lambda2;
    s.t_star = horizon;
    s.mu_hat = tr.values;
    s.coeffs.reserve(entries);
    for (int t = 0; t < entries; ++t) {
        // The linear variant's entry at t=0 must be the constant transform;
        // keying on mu_hat_t = 0 achieves that for every variant at once.
        s.coeffs.push_back(schedule_entry(variant, tr.values[t], s.d));
    }
    return s;
}

}  // namespace detail

// Plan a run that stops at the first iterate with mu_hat > M. Throws
// NoDivergence when the trace stalls below M, which is exactly the case
// lambda at or below the degree-d threshold.
inline NonlinearitySchedule build_schedule(double lambda, int d, double M, Variant variant) {
    if (d < 1) throw Error("build_schedule: degree must be >= 1");
    SETrace tr = detail::trace_for(variant, lambda, d, Stop::threshold(M));
    return detail::assemble(tr, variant, d, tr.t_star, tr.t_star);
}

// Plan a fixed-horizon run (T message rounds counting the final belief
// pass). Never throws for stalling; used for diagnostics and for sweeps
// below threshold where no crossing exists.
inline NonlinearitySchedule build_schedule_horizon(double lambda, int d, int T, Variant variant) {
    if (d < 1) throw Error("build_schedule_horizon: degree must be >= 1");
    if (T < 1) throw Error("build_schedule_horizon: horizon must be >= 1");
    SETrace tr = detail::trace_for(variant, lambda, d, Stop::horizon(T));
    return detail::assemble(tr, variant, d, T, T);
}

// Plan for the two-sided run: t_star is the even crossing index of the
// alternating trace, and the coefficient list carries t_star + 1 entries
// because the last half-step writes beliefs at index t_star + 1.
inline NonlinearitySchedule build_schedule_bicluster(double lambda1, double lambda2, int d,
                                                     double M) {
    if (d < 1) throw Error("build_schedule_bicluster: degree must be >= 1");
    SETrace tr = se_trace_bicluster(lambda1, lambda2, d, Stop::threshold(M));
    NonlinearitySchedule s = detail::assemble(tr, Variant::optimal, d, tr.t_star, tr.t_star + 1);
    return s;
}

// Same layout with the stopping index imposed rather than searched for.
// T must be even so the run ends on a row-belief index.
inline NonlinearitySchedule build_schedule_bicluster_horizon(double lambda1, double lambda2,
                                                             int d, int T) {
    if (d < 1) throw Error("build_schedule_bicluster_horizon: degree must be >= 1");
    if (T < 2 || T % 2 != 0) {
        throw Error("build_schedule_bicluster_horizon: T must be even and >= 2");
    }
    SETrace tr = se_trace_bicluster(lambda1, lambda2, d, Stop::horizon(T + 1));
    return detail::assemble(tr, Variant::optimal, d, T, T + 1);
}

}  // namespace subloc
