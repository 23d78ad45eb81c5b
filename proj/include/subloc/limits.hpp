#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "subloc/errors.hpp"
#include "subloc/state_evolution.hpp"

namespace subloc {

// Weak-recovery margin of the optimal estimator: K mu^2 / (4 log(n/K)).
// Values above 1 mean weak recovery is information-theoretically possible
// in the asymptotic sense; these are finite-n evaluations of liminf
// conditions and should be read as annotations, not guarantees.
inline double weak_margin(int n, int K, double mu) {
    if (K < 1 || K >= n) throw Error("weak_margin: need 1 <= K < n");
    return K * mu * mu / (4.0 * std::log(static_cast<double>(n) / K));
}

// Exact-recovery margin of the MLE: sqrt(K) mu / (sqrt(2 log K) + sqrt(2 log n)).
inline double exact_margin(int n, int K, double mu) {
    if (K < 2 || K >= n) throw Error("exact_margin: need 2 <= K < n");
    return std::sqrt(static_cast<double>(K)) * mu /
           (std::sqrt(2.0 * std::log(static_cast<double>(K))) +
            std::sqrt(2.0 * std::log(static_cast<double>(n))));
}

inline bool mp_feasible(double lambda) {
    if (!(lambda > 0.0)) throw Error("mp_feasible: lambda must be positive");
    return lambda > kInvE;
}

inline bool spectral_feasible(double lambda) {
    if (!(lambda > 0.0)) throw Error("spectral_feasible: lambda must be positive");
    return lambda > 1.0;
}

// Margins and their threshold booleans in one record. A factory fills
// either the principal-submatrix fields or the rectangular ones; unused
// margins stay NaN with their booleans false. Every boolean equals
// "margin > 1" by construction.
struct ThresholdReport {
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    // principal submatrix
    double weak_it = kUnset, exact_it = kUnset, mp = kUnset, spectral = kUnset;
    bool weak_it_ok = false, exact_it_ok = false, mp_ok = false, spectral_ok = false;

    // rectangular model; trailing index says which side gets recovered
    double mle_weak = kUnset;
    double colsum_weak_1 = kUnset, colsum_weak_2 = kUnset;
    double vote_weak = kUnset;
    double vote_exact_1 = kUnset, vote_exact_2 = kUnset;
    double colsum_exact = kUnset;
    bool mle_weak_ok = false;
    bool colsum_weak_1_ok = false, colsum_weak_2_ok = false;
    bool vote_weak_ok = false;
    bool vote_exact_1_ok = false, vote_exact_2_ok = false;
    bool colsum_exact_ok = false;
    RegionVerdict region = RegionVerdict::outside;
    bool has_region = false;

    std::vector<std::tuple<std::string, double, bool>> entries() const {
        std::vector<std::tuple<std::string, double, bool>> out;
        auto add = [&](const char* name, double m, bool ok) {
            if (!std::isnan(m)) out.emplace_back(name, m, ok);
        };
        add("weak_it", weak_it, weak_it_ok);
        add("exact_it", exact_it, exact_it_ok);
        add("mp", mp, mp_ok);
        add("spectral", spectral, spectral_ok);
        add("mle_weak", mle_weak, mle_weak_ok);
        add("colsum_weak_1", colsum_weak_1, colsum_weak_1_ok);
        add("colsum_weak_2", colsum_weak_2, colsum_weak_2_ok);
        add("vote_weak", vote_weak, vote_weak_ok);
        add("vote_exact_1", vote_exact_1, vote_exact_1_ok);
        add("vote_exact_2", vote_exact_2, vote_exact_2_ok);
        add("colsum_exact", colsum_exact, colsum_exact_ok);
        return out;
    }
};

// Report for the principal submatrix model. The message-passing margin is
// lambda e and the spectral margin is lambda, so "margin > 1" lines up
// with the usual lambda > 1/e and lambda > 1 statements.
inline ThresholdReport threshold_report(int n, int K, double mu) {
    ThresholdReport r;
    r.weak_it = weak_margin(n, K, mu);
    if (K >= 2) r.exact_it = exact_margin(n, K, mu);
    double lambda = mu * mu * K * static_cast<double>(K) / n;
    r.mp = lambda * std::exp(1.0);
    r.spectral = lambda;
    r.weak_it_ok = r.weak_it > 1.0;
    r.exact_it_ok = !std::isnan(r.exact_it) && r.exact_it > 1.0;
    r.mp_ok = r.mp > 1.0;
    r.spectral_ok = r.spectral > 1.0;
    return r;
}

// Report for the rectangular model. Sides are wired so that margins
// ending in _1 speak about recovering the row support and _2 about the
// column support; in particular the exact-voting margin for rows reads
// sqrt(K2) mu over the order-statistic widths of the n1 rows.
inline ThresholdReport bicluster_margins(int n1, int n2, int K1, int K2, double mu) {
    if (K1 < 1 || K1 >= n1 || K2 < 1 || K2 >= n2) {
        throw Error("bicluster_margins: need 1 <= Ki < ni");
    }
    auto logt = [](int a, int b) { return std::log(static_cast<double>(a) / b); };
    const double n1d = n1, n2d = n2, k1d = K1, k2d = K2;
    ThresholdReport r;
    r.mle_weak = mu * std::sqrt(k1d * k2d) /
                 std::sqrt(2.0 * (k1d * logt(n1, K1) + k2d * logt(n2, K2)));
    r.colsum_weak_1 = k2d * k2d * mu * mu / (2.0 * n2d * logt(n1, K1));
    r.colsum_weak_2 = k1d * k1d * mu * mu / (2.0 * n1d * logt(n2, K2));
    r.vote_weak = k2d * mu * mu / (2.0 * logt(n1, K1));
    r.vote_exact_1 = std::sqrt(k2d) * mu /
                     (std::sqrt(2.0 * std::log(k1d)) + std::sqrt(2.0 * std::log(n1d)));
    r.vote_exact_2 = std::sqrt(k1d) * mu /
                     (std::sqrt(2.0 * std::log(k2d)) + std::sqrt(2.0 * std::log(n2d)));
    r.colsum_exact = k1d * mu / (std::sqrt(2.0 * n1d) *
                                 (std::sqrt(std::log(k2d)) + std::sqrt(std::log(n2d))));
    r.mle_weak_ok = r.mle_weak > 1.0;
    r.colsum_weak_1_ok = r.colsum_weak_1 > 1.0;
    r.colsum_weak_2_ok = r.colsum_weak_2 > 1.0;
    r.vote_weak_ok = r.vote_weak > 1.0;
    r.vote_exact_1_ok = r.vote_exact_1 > 1.0;
    r.vote_exact_2_ok = r.vote_exact_2 > 1.0;
    r.colsum_exact_ok = r.colsum_exact > 1.0;
    double l1 = mu * mu * k1d * k1d / n1d;
    double l2 = mu * mu * k2d * k2d / n2d;
    r.region = in_region_G(l1, l2);
    r.has_region = true;
    return r;
}

// Scaling-regime phase classification: with K = rho n / log n and
// mu^2 = mu0^2 log^2 n / n, message passing succeeds when rho^2 mu0^2 e
// exceeds 1 and exact recovery when rho mu0^2 / 8 does. Boundary points
// fall to the weaker region (strict inequalities).
enum class PhaseRegion { I, II, III, IV };

inline const char* phase_region_name(PhaseRegion r) {
    switch (r) {
        case PhaseRegion::I: return "I";
        case PhaseRegion::II: return "II";
        case PhaseRegion::III: return "III";
        case PhaseRegion::IV: return "IV";
    }
    return "?";
}

inline PhaseRegion phase_region(double mu0, double rho) {
    if (!(mu0 > 0.0) || !(rho > 0.0)) throw Error("phase_region: mu0, rho must be positive");
    bool mp = rho * rho * mu0 * mu0 * std::exp(1.0) > 1.0;
    bool exact = rho * mu0 * mu0 / 8.0 > 1.0;
    if (mp && exact) return PhaseRegion::I;
    if (mp) return PhaseRegion::II;
    if (exact) return PhaseRegion::III;
    return PhaseRegion::IV;
}

// The two phase-boundary curves as rho(mu0).
inline double phase_curve_mp(double mu0) {
    if (!(mu0 > 0.0)) throw Error("phase_curve_mp: mu0 must be positive");
    return std::exp(-0.5) / mu0;
}

inline double phase_curve_exact(double mu0) {
    if (!(mu0 > 0.0)) throw Error("phase_curve_exact: mu0 must be positive");
    return 8.0 / (mu0 * mu0);
}

}  // namespace subloc
