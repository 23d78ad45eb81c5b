#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "subloc/errors.hpp"
#include "subloc/rng.hpp"
#include "subloc/state_evolution.hpp"

namespace subloc {

// Binary entropy in nats, with the 0*log(0) = 0 convention at both ends.
inline double entropy(double eps) {
    if (eps < 0.0 || eps > 1.0) throw Error("entropy: argument outside [0,1]");
    double h = 0.0;
    if (eps > 0.0) h += eps * std::log(1.0 / eps);
    if (eps < 1.0) h += (1.0 - eps) * std::log(1.0 / (1.0 - eps));
    return h;
}

inline constexpr double kEpsilonCap = 1e-3;  // epsilon lives in (0, 1e-3)

namespace detail {
inline void check_epsilon(double eps, const char* who) {
    if (!(eps > 0.0) || !(eps < kEpsilonCap)) {
        throw Error(std::string(who) + ": epsilon must lie in (0, 1e-3)");
    }
}
}  // namespace detail

// Guaranteed misclassification-fraction bound for the cleanup stage,
//   eta = 2 eps + 5000 (h(eps)+eps) / (lambda (1-eps)^2).
// The constants are loose by design; eta is a certificate, not a forecast.
inline double eta_symmetric(double eps, double lambda) {
    detail::check_epsilon(eps, "eta_symmetric");
    if (!(lambda >= kInvE)) throw Error("eta_symmetric: lambda must be >= 1/e");
    double he = entropy(eps) + eps;
    return 2.0 * eps + 5000.0 * he / (lambda * (1.0 - eps) * (1.0 - eps));
}

// Step-count constant s* = 2 / log( sqrt(lambda)(1-eps) / (16 sqrt(h(eps)+eps)) ).
// Only meaningful when the log argument exceeds 1.
inline double s_star_symmetric(double eps, double lambda) {
    detail::check_epsilon(eps, "s_star_symmetric");
    if (!(lambda >= kInvE)) throw Error("s_star_symmetric: lambda must be >= 1/e");
    double beta = 16.0 * std::sqrt(entropy(eps) + eps);
    double arg = std::sqrt(lambda) * (1.0 - eps) / beta;
    if (!(arg > 1.0)) {
        throw InvalidRegime("s_star_symmetric: sqrt(lambda)(1-eps) must exceed 16 sqrt(h+eps)");
    }
    return 2.0 / std::log(arg);
}

// Largest eps in (0, 1e-3) with eta(eps, lambda) <= eta_target. eta is
// strictly increasing in eps, so bisection applies; when even the cap
// satisfies the target, the value just below 1e-3 is returned.
inline double epsilon_for_eta(double eta_target, double lambda) {
    if (!(eta_target > 0.0)) throw Error("epsilon_for_eta: target must be positive");
    if (!(lambda > kInvE)) throw Error("epsilon_for_eta: lambda must exceed 1/e");
    double hi = std::nextafter(kEpsilonCap, 0.0);
    if (eta_symmetric(hi, lambda) <= eta_target) return hi;
    double lo = 1e-300;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        double mid = 0.5 * (lo + hi);
        (eta_symmetric(mid, lambda) <= eta_target ? lo : hi) = mid;
    }
    return lo;
}

// Noise-to-signal constant of the rectangular cleanup,
// c0 = (sqrt(n1)+sqrt(n2)) / (mu sqrt(K1 K2)).
inline double c0_bicluster(int n1, int n2, int K1, int K2, double mu) {
    if (!(mu > 0.0)) throw Error("c0_bicluster: mu must be positive");
    if (n1 < 1 || n2 < 1 || K1 < 1 || K2 < 1) throw Error("c0_bicluster: bad dimensions");
    return (std::sqrt(static_cast<double>(n1)) + std::sqrt(static_cast<double>(n2))) /
           (mu * std::sqrt(static_cast<double>(K1) * static_cast<double>(K2)));
}

inline double eta_bicluster(double eps, double c0) {
    detail::check_epsilon(eps, "eta_bicluster");
    double he = entropy(eps) + eps;
    return 2.0 * eps + 650.0 * c0 * c0 * he / ((1.0 - eps) * (1.0 - eps));
}

inline double s_star_bicluster(double eps, double c0) {
    detail::check_epsilon(eps, "s_star_bicluster");
    double b = 3.0 * c0 * std::sqrt(entropy(eps) + eps);
    double arg = (1.0 - eps - b) / b;
    if (!(arg > 1.0)) {
        throw InvalidRegime("s_star_bicluster: 3 c0 sqrt(h+eps) must stay below (1-eps)/2");
    }
    return 1.0 / std::log(arg);
}

namespace detail {

inline Eigen::VectorXd sphere_point(int m, Rng& rng) {
    Eigen::VectorXd u(m);
    for (int i = 0; i < m; ++i) u(i) = rng.normal();
    double nrm = u.norm();
    if (nrm > 0.0) u /= nrm;
    return u;
}

// Ranks `members` by (score descending, index ascending) and returns the
// first `take`, optionally padding from `pool` ranked by (pad_score
// descending, index ascending).
inline std::vector<int> top_by_score(const std::vector<int>& members,
                                     const std::vector<double>& scores, int take,
                                     const std::vector<int>& pool,
                                     const Eigen::VectorXd& pad_scores) {
    std::vector<int> order(members.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return members[a] < members[b];
    });
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(order.size()) && static_cast<int>(out.size()) < take; ++i) {
        out.push_back(members[order[i]]);
    }
    if (static_cast<int>(out.size()) < take && !pool.empty()) {
        std::vector<int> porder = pool;
        std::stable_sort(porder.begin(), porder.end(), [&](int a, int b) {
            if (pad_scores(a) != pad_scores(b)) return pad_scores(a) > pad_scores(b);
            return a < b;
        });
        for (int idx : porder) {
            if (static_cast<int>(out.size()) >= take) break;
            out.push_back(idx);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

// Power-method cleanup of a candidate set. Starting from a spherical
// random unit vector on the block A(c_tilde, c_tilde), runs
// ceil(s_star * log n) normalized multiplications and keeps the K
// candidates with the largest |u_i| (ties to the smaller index). When the
// candidate set is smaller than K, the remainder is filled from the
// highest `beliefs` outside it, which keeps the output size at K for any
// downstream voting. An exactly zero iterate triggers a reseeded restart,
// at most three times. The observer, when set, sees every normalized
// iterate (for alignment diagnostics).
inline std::vector<int> power_cleanup(
    const Eigen::MatrixXd& A, const std::vector<int>& c_tilde, int K, double s_star,
    std::uint64_t seed, const Eigen::VectorXd& beliefs,
    const std::function<void(int, const Eigen::VectorXd&)>& observer = nullptr) {
    if (c_tilde.empty()) throw Error("power_cleanup: candidate set is empty");
    if (K < 1) throw Error("power_cleanup: K must be >= 1");
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(c_tilde.size());

    Eigen::MatrixXd B(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) B(a, b) = A(c_tilde[a], c_tilde[b]);
    }
    const int steps = static_cast<int>(std::ceil(s_star * std::log(static_cast<double>(n))));

    Eigen::VectorXd u;
    bool converged = false;
    for (int attempt = 0; attempt <= 3 && !converged; ++attempt) {
        Rng rng(attempt == 0 ? seed : mix_seed(seed, static_cast<std::uint64_t>(attempt)));
        u = detail::sphere_point(m, rng);
        if (u.norm() == 0.0) continue;
        bool dead = false;
        for (int t = 0; t < steps; ++t) {
            Eigen::VectorXd w = B * u;
            double nrm = w.norm();
            if (nrm == 0.0) {
                dead = true;
                break;
            }
            u = w / nrm;
            if (observer) observer(t + 1, u);
        }
        converged = !dead;
    }
    if (!converged) throw ZeroVector("power_cleanup: iterate vanished on 4 attempts");

    std::vector<double> mag(m);
    for (int a = 0; a < m; ++a) mag[a] = std::abs(u(a));
    std::vector<int> pool;
    if (m < K) {
        std::vector<char> in(n, 0);
        for (int i : c_tilde) in[i] = 1;
        for (int i = 0; i < n; ++i) {
            if (!in[i]) pool.push_back(i);
        }
    }
    return detail::top_by_score(c_tilde, mag, K, pool, beliefs);
}

// Rectangular cleanup: separate power iterations for the row vector (on
// B B^T) and the column vector (on B^T B), where B = W restricted to
// (c_tilde1, c_tilde2). Multiplications run in pairs with one
// normalization per pair, ceil(s_star * log(n1 n2)) pairs. Selection and
// padding mirror the square case per side. Row and column starts use
// independent derived seeds.
inline std::pair<std::vector<int>, std::vector<int>> power_cleanup_bicluster(
    const Eigen::MatrixXd& W, const std::vector<int>& c_tilde1, const std::vector<int>& c_tilde2,
    int K1, int K2, double s_star, std::uint64_t seed, const Eigen::VectorXd& row_beliefs,
    const Eigen::VectorXd& col_beliefs) {
    if (c_tilde1.empty() || c_tilde2.empty()) {
        throw Error("power_cleanup_bicluster: candidate sets must be nonempty");
    }
    if (K1 < 1 || K2 < 1) throw Error("power_cleanup_bicluster: K must be >= 1");
    const int n1 = static_cast<int>(W.rows());
    const int n2 = static_cast<int>(W.cols());
    const int m1 = static_cast<int>(c_tilde1.size());
    const int m2 = static_cast<int>(c_tilde2.size());

    Eigen::MatrixXd B(m1, m2);
    for (int a = 0; a < m1; ++a) {
        for (int b = 0; b < m2; ++b) B(a, b) = W(c_tilde1[a], c_tilde2[b]);
    }
    const int pairs = static_cast<int>(
        std::ceil(s_star * std::log(static_cast<double>(n1) * static_cast<double>(n2))));

    auto iterate = [&](int dim, std::uint64_t s, bool row_side) {
        Eigen::VectorXd u;
        for (int attempt = 0; attempt <= 3; ++attempt) {
            Rng rng(attempt == 0 ? s : mix_seed(s, static_cast<std::uint64_t>(attempt)));
            u = detail::sphere_point(dim, rng);
            if (u.norm() == 0.0) continue;
            bool dead = false;
            for (int t = 0; t < pairs; ++t) {
                Eigen::VectorXd w = row_side ? Eigen::VectorXd(B * (B.transpose() * u))
                                             : Eigen::VectorXd(B.transpose() * (B * u));
                double nrm = w.norm();
                if (nrm == 0.0) {
                    dead = true;
                    break;
                }
                u = w / nrm;
            }
            if (!dead) return u;
        }
        throw ZeroVector("power_cleanup_bicluster: iterate vanished on 4 attempts");
    };

    Eigen::VectorXd u = iterate(m1, mix_seed(seed, 0), true);
    Eigen::VectorXd v = iterate(m2, mix_seed(seed, 1), false);

    std::vector<double> umag(m1), vmag(m2);
    for (int a = 0; a < m1; ++a) umag[a] = std::abs(u(a));
    for (int b = 0; b < m2; ++b) vmag[b] = std::abs(v(b));

    auto pad_pool = [](int n, const std::vector<int>& members) {
        std::vector<char> in(n, 0);
        for (int i : members) in[i] = 1;
        std::vector<int> pool;
        for (int i = 0; i < n; ++i) {
            if (!in[i]) pool.push_back(i);
        }
        return pool;
    };
    std::vector<int> pool1 = (m1 < K1) ? pad_pool(n1, c_tilde1) : std::vector<int>{};
    std::vector<int> pool2 = (m2 < K2) ? pad_pool(n2, c_tilde2) : std::vector<int>{};

    return {detail::top_by_score(c_tilde1, umag, K1, pool1, row_beliefs),
            detail::top_by_score(c_tilde2, vmag, K2, pool2, col_beliefs)};
}

}  // namespace subloc
