#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "subloc/errors.hpp"
#include "subloc/hermite.hpp"

namespace subloc {

inline constexpr double kInvE = 1.0 / std::numbers::e;

// Stop rule for a state-evolution run: either a fixed horizon T, or
// "iterate until mu_hat crosses level M".
struct Stop {
    enum class Kind { horizon, threshold } kind;
    int T = 0;
    double M = 0.0;

    static Stop horizon(int T) { return {Kind::horizon, T, 0.0}; }
    static Stop threshold(double M) { return {Kind::threshold, 0, M}; }
};

// Trace of the scalar recursion mu_hat^2_{t+1} = lambda * G_d(mu_hat^2_t).
// The squared sequence is the primary state (exact by construction);
// `values` is its entrywise square root. For the two-sided variant the
// multiplier alternates: lambda1 on even t, lambda2 on odd t.
struct SETrace {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    int d = 0;
    std::vector<double> values;     // mu_hat_t, t = 0..T
    std::vector<double> values_sq;  // mu_hat_t^2
    bool diverged = false;
    int t_star = -1;  // negative when no threshold stop applied or not reached
};

namespace detail {

inline constexpr double kDivergeSq = 1e6;    // mu_hat^2 above this is "diverged"
inline constexpr int kSeIterCap = 10000;
inline constexpr double kStallTol = 1e-12;

// Shared engine. `paired_tstar` selects the crossing rule: plain first
// crossing of M, or (for the alternating recursion) the first even t with
// min(mu_hat_t, mu_hat_{t+1}) > M, which guarantees both sides of the
// alternation have cleared the level.
inline SETrace se_core(double l1, double l2, int d, Stop stop, bool paired_tstar) {
    if (!(l1 > 0.0) || !(l2 > 0.0)) throw Error("se_trace: lambda must be positive");
    if (d < 1) throw Error("se_trace: degree must be >= 1");

    SETrace tr;
    tr.lambda1 = l1;
    tr.lambda2 = l2;
    tr.d = d;
    tr.values_sq.push_back(0.0);
    tr.values.push_back(0.0);

    for (int t = 0;; ++t) {
        if (stop.kind == Stop::Kind::horizon && t == stop.T) break;

        double mult = (t % 2 == 0) ? l1 : l2;
        double x = mult * partial_exp(d, tr.values_sq[t]);
        tr.values_sq.push_back(x);
        tr.values.push_back(std::sqrt(x));
        int n = t + 1;  // index of the fresh value

        if (stop.kind == Stop::Kind::horizon) {
            if (x > kDivergeSq) tr.diverged = true;
            continue;
        }

        // Threshold mode: crossing, then stall, then the hard cap.
        if (paired_tstar) {
            if (n % 2 == 1 && n >= 1) {
                int te = n - 1;  // candidate even index
                if (std::min(tr.values[te], tr.values[n]) > stop.M) {
                    tr.t_star = te;
                    tr.diverged = true;
                    break;
                }
            }
        } else {
            if (tr.values[n] > stop.M) {
                tr.t_star = n;
                tr.diverged = true;
                break;
            }
        }

        // Stalled when both parity subsequences have stopped moving. The
        // two-sided recursion can settle into a 2-cycle whose consecutive
        // deltas never shrink, so consecutive-step deltas alone would miss it.
        if (n >= 3 && std::abs(tr.values[n] - tr.values[n - 2]) < kStallTol &&
            std::abs(tr.values[n - 1] - tr.values[n - 3]) < kStallTol) {
            throw NoDivergence("state evolution stalled near mu_hat = " +
                               std::to_string(tr.values[n]) + " below M = " +
                               std::to_string(stop.M));
        }
        if (n >= kSeIterCap) {
            throw NoDivergence("state evolution did not cross M = " +
                               std::to_string(stop.M) + " within " +
                               std::to_string(kSeIterCap) + " steps");
        }
    }
    return tr;
}

}  // namespace detail

inline SETrace se_trace(double lambda, int d, Stop stop) {
    return detail::se_core(lambda, lambda, d, stop, false);
}

inline SETrace se_trace_bicluster(double lambda1, double lambda2, int d, Stop stop) {
    return detail::se_core(lambda1, lambda2, d, stop, true);
}

// One row of the degree-threshold table. The plain fields are enough for
// display; the excess fields carry a*_d - 1 and lambda*_d - 1/e without
// cancellation, which matters because both gaps decay factorially and
// fall below double resolution around d = 17.
struct ThresholdRow {
    int d = 0;
    double a_star = 0.0;
    double lambda_star = 0.0;
    double a_excess = 0.0;       // a*_d - 1
    double lambda_excess = 0.0;  // lambda*_d - 1/e
};

namespace detail {

// Sum of 1/k! for k >= m.
inline double exp_tail(int m) {
    double term = 1.0 / factorial(m);
    double sum = term;
    for (int k = m + 1; k <= m + 60 && term > 0.0; ++k) {
        term /= static_cast<double>(k);
        sum += term;
    }
    return sum;
}

inline ThresholdRow threshold_row(int d) {
    ThresholdRow row;
    row.d = d;
    if (d == 1) {
        // G_1(a) = a*G_0(a) has no root; the degree-1 threshold is 1 directly.
        row.a_star = std::numeric_limits<double>::quiet_NaN();
        row.a_excess = std::numeric_limits<double>::quiet_NaN();
        row.lambda_star = 1.0;
        row.lambda_excess = 1.0 - kInvE;
        return row;
    }
    if (d <= 12) {
        // Bisection on h(a) = G_d(a) - a*G_{d-1}(a), strictly decreasing,
        // h(1) = 1/d! > 0. Bracket [1, b] with b doubled to a sign change.
        auto h = [d](double a) { return partial_exp(d, a) - a * partial_exp(d - 1, a); };
        double lo = 1.0, hi = 2.0;
        while (h(hi) > 0.0) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            double mid = 0.5 * (lo + hi);
            (h(mid) > 0.0 ? lo : hi) = mid;
        }
        row.a_star = 0.5 * (lo + hi);
        row.a_excess = row.a_star - 1.0;
        double g = partial_exp(d - 1, row.a_star);
        row.lambda_star = 1.0 / g;
        // e - g is ~1.6e-10 at d = 12, still 6 clean digits in doubles;
        // beyond that the series branch below takes over.
        row.lambda_excess = (std::numbers::e - g) / (std::numbers::e * g);
        return row;
    }
    // For d >= 13 expand about a = 1. With eps = a*_d - 1,
    //   0 = G_d(1+eps) - (1+eps) G_{d-1}(1+eps)
    //     = 1/d! - eps*E_{d-2} - (eps^2/2)(E_{d-2}+E_{d-3}) + O(eps^3),
    // where E_m = G_m(1). Solving to second order keeps the relative error
    // near eps ~ 1/(e*d!), far below anything the table's consumers resolve.
    double e2 = partial_exp(d - 2, 1.0);
    double e3 = partial_exp(d - 3, 1.0);
    double eps0 = (1.0 / factorial(d)) / e2;
    double eps = eps0 * (1.0 - 0.5 * eps0 * (e2 + e3) / e2);
    row.a_star = 1.0 + eps;
    row.a_excess = eps;
    double g = partial_exp(d - 1, row.a_star);
    row.lambda_star = 1.0 / g;
    // e - G_{d-1}(a*) = tail_d - eps*E_{d-2} - (eps^2/2) E_{d-3} + O(eps^3);
    // the leading terms cancel to tail_{d+1}, losing only ~log10(d) digits.
    double num = exp_tail(d) - eps * e2 - 0.5 * eps * eps * e3;
    row.lambda_excess = num / (std::numbers::e * g);
    return row;
}

}  // namespace detail

// Rows for d = 1..50, built once per process.
inline const std::vector<ThresholdRow>& threshold_table() {
    static const std::vector<ThresholdRow> table = [] {
        std::vector<ThresholdRow> t;
        t.reserve(50);
        for (int d = 1; d <= 50; ++d) t.push_back(detail::threshold_row(d));
        return t;
    }();
    return table;
}

// Root of G_d(a) = a*G_{d-1}(a). Past d = 12 the root sits within one ulp
// of 1 + series(d); bisection cannot place it more accurately, and either
// route leaves |G_d(a) - a*G_{d-1}(a)| under 1e-12.
inline double solve_a_star(int d) {
    if (d < 2) throw Error("solve_a_star: defined for d >= 2");
    if (d > 50) throw Error("solve_a_star: table covers d <= 50");
    return threshold_table()[d - 1].a_star;
}

inline double lambda_star(int d) {
    if (d < 1) throw Error("lambda_star: defined for d >= 1");
    if (d > 50) throw Error("lambda_star: table covers d <= 50");
    return threshold_table()[d - 1].lambda_star;
}

// Smallest d whose threshold lies below lambda. Compared through the
// excess fields so that lambdas within 1e-12 of 1/e still resolve.
inline int d_star(double lambda) {
    if (!(lambda > kInvE)) {
        throw SubcriticalLambda("d_star: lambda = " + std::to_string(lambda) +
                                " is not above 1/e");
    }
    double gap = lambda - kInvE;
    for (const auto& row : threshold_table()) {
        if (row.lambda_excess < gap) return row.d;
    }
    throw SubcriticalLambda("d_star: no degree up to 50 has threshold below lambda");
}

// ---- Region geometry for the two-sided recursion ----

enum class RegionVerdict { inside, outside, boundary };

// Parametrization of the critical curve: y > 0 maps to
// (y*e^{-1/y}, e^{-y}/y). y = 1 gives the corner (1/e, 1/e).
inline std::pair<double, double> boundary_point(double y) {
    if (!(y > 0.0)) throw Error("boundary_point: y must be positive");
    return {y * std::exp(-1.0 / y), std::exp(-y) / y};
}

// Iterates the even-step composition x -> lambda2 * e^(lambda1 * e^x) and
// reports whether it escapes to infinity. Guards keep exp() in range: once
// any intermediate clears 700 the trajectory cannot come back down.
inline bool phi_diverges(double lambda1, double lambda2) {
    double x = 0.0;
    for (int t = 0; t < detail::kSeIterCap; ++t) {
        if (x > 700.0) return true;
        double inner = lambda1 * std::exp(x);
        if (inner > 700.0) return true;
        double nx = lambda2 * std::exp(inner);
        if (nx > detail::kDivergeSq) return true;
        if (std::abs(nx - x) < detail::kStallTol) return false;
        x = nx;
    }
    return false;
}

// Classifies (lambda1, lambda2) against the critical curve analytically:
// solve lambda1 = y*e^{-1/y} (strictly increasing in y) and compare
// lambda2 with e^{-y}/y. Divergence holds above the curve, which matches
// the iterative check away from the boundary.
inline RegionVerdict in_region_G(double lambda1, double lambda2) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw Error("in_region_G: lambdas must be positive");
    auto f = [](double y) { return y * std::exp(-1.0 / y); };
    double lo = 1e-12, hi = 1.0;
    while (f(hi) < lambda1) hi *= 2.0;
    for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < lambda1 ? lo : hi) = mid;
    }
    double y = 0.5 * (lo + hi);
    double crit = std::exp(-y) / y;
    double tol = 1e-9 * std::max(crit, lambda2);
    if (std::abs(lambda2 - crit) <= tol) return RegionVerdict::boundary;
    return lambda2 > crit ? RegionVerdict::inside : RegionVerdict::outside;
}

// Membership in the degree-d divergence region. Degree 1 admits a closed
// form: the affine recursion diverges exactly when lambda1*lambda2 >= 1
// (growth is linear on the boundary itself, which an iteration cap would
// misread). Higher degrees iterate the capped recursion directly.
inline bool in_region_Gd(double lambda1, double lambda2, int d) {
    if (d < 1) throw Error("in_region_Gd: degree must be >= 1");
    if (d == 1) return lambda1 * lambda2 >= 1.0;
    std::vector<double> v{0.0};
    for (int t = 0; t < detail::kSeIterCap; ++t) {
        double mult = (t % 2 == 0) ? lambda1 : lambda2;
        double x = mult * partial_exp(d, v.back());
        v.push_back(x);
        int n = t + 1;
        if (x > detail::kDivergeSq) return true;
        if (n >= 3 && std::abs(v[n] - v[n - 2]) < detail::kStallTol &&
            std::abs(v[n - 1] - v[n - 3]) < detail::kStallTol) {
            return false;
        }
    }
    return false;
}

// Smallest degree whose alternating trace escapes under the capped
// iteration; throws OutsideG when no degree up to 50 does.
inline int d_star_bicluster(double lambda1, double lambda2) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
        throw OutsideG("d_star_bicluster: lambdas must be positive");
    }
    for (int d = 1; d <= 50; ++d) {
        bool div = (d == 1) ? false : in_region_Gd(lambda1, lambda2, d);
        if (d == 1) {
            // Stay with the iterative meaning here: on the exact G_1
            // boundary the trace grows linearly and no finite run can win,
            // so the scan moves on to degree 2 instead of claiming d=1.
            std::vector<double> v{0.0};
            for (int t = 0; t < detail::kSeIterCap; ++t) {
                double mult = (t % 2 == 0) ? lambda1 : lambda2;
                double x = mult * (1.0 + v.back());
                v.push_back(x);
                int n = t + 1;
                if (x > detail::kDivergeSq) {
                    div = true;
                    break;
                }
                if (n >= 3 && std::abs(v[n] - v[n - 2]) < detail::kStallTol &&
                    std::abs(v[n - 1] - v[n - 3]) < detail::kStallTol) {
                    break;
                }
            }
        }
        if (div) return d;
    }
    throw OutsideG("d_star_bicluster: no degree up to 50 diverges at (" +
                   std::to_string(lambda1) + ", " + std::to_string(lambda2) + ")");
}

}  // namespace subloc
