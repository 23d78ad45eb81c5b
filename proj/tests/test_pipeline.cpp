#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracle_helpers.hpp"
#include "subloc/pipeline.hpp"

using Catch::Matchers::WithinAbs;
using subloc::PipelineOptions;

TEST_CASE("noiseless block is recovered exactly end to end", "[pipeline]") {
    // The run must be short: without noise the block messages trail the
    // predicted trace by roughly (K-1)/K per iteration, so a long schedule
    // can drag the final beliefs under the half-trace threshold. lambda = 4
    // crosses in six steps, which keeps the margin wide.
    const int n = 200, K = 40;
    const double mu = std::sqrt(4.0 * n) / K;
    auto inst = subloc::gen_symmetric(n, K, mu, 44, true);

    auto res = subloc::run_alg1(inst, PipelineOptions{}, 1);
    CHECK(res.d == 1);  // lambda = 4 is already above the degree-1 transition
    CHECK(res.tilde_report.exact);
    CHECK(res.hat_report.exact);
    CHECK(res.c_hat == inst.support);

    // crossing index agrees with an independent long-double replay
    double M = 8.0 * std::log(1.0 / 1e-4);
    auto trace = oracle::se_ld(4.0L, 4.0L, 1, 40);
    int want_t = 0;
    for (int t = 1; t < static_cast<int>(trace.size()); ++t) {
        if (std::sqrt(static_cast<double>(trace[t])) > M) {
            want_t = t;
            break;
        }
    }
    CHECK(res.t_star == want_t);
    CHECK_THAT(res.mu_hat_tstar, WithinAbs(std::sqrt(static_cast<double>(trace[want_t])), 1e-9));
}

TEST_CASE("noisy instance at comfortable signal strength", "[pipeline]") {
    const int n = 400, K = 60;

    // lambda = 4: near-complete recovery, a couple of stragglers allowed
    auto inst = subloc::gen_symmetric(n, K, std::sqrt(4.0 * n) / K, 10);
    auto res = subloc::run_alg1(inst, PipelineOptions{}, 2);
    CHECK(res.c_hat.size() == static_cast<std::size_t>(K));
    CHECK(res.hat_report.fraction <= 0.1);
    CHECK(res.eta > 0.0);
    CHECK(res.s_star > 0.0);
    CHECK(res.timings.mp_ms >= 0.0);

    // lambda = 6: exact at this size
    auto strong = subloc::gen_symmetric(n, K, std::sqrt(6.0 * n) / K, 10);
    auto rs = subloc::run_alg1(strong, PipelineOptions{}, 2);
    CHECK(rs.hat_report.exact);
}

TEST_CASE("subcritical lambda is rejected unless opted in", "[pipeline]") {
    const int n = 150, K = 15;
    const double mu = std::sqrt(0.2 * n) / K;  // lambda = 0.2 < 1/e
    auto inst = subloc::gen_symmetric(n, K, mu, 6);

    CHECK_THROWS_AS(subloc::run_alg1(inst, PipelineOptions{}, 1), subloc::SubcriticalLambda);

    PipelineOptions opt;
    opt.allow_subcritical = true;
    auto res = subloc::run_alg1(inst, opt, 1);
    CHECK(res.d == 3);                     // fixed fallback degree
    CHECK(res.t_star >= 2);
    CHECK(res.t_star < 25);                // truncated at the stall, not the horizon
    CHECK(res.s_star == 4.0);              // certificate constants do not apply
    CHECK(std::isnan(res.eta));
    CHECK(res.c_hat.size() == static_cast<std::size_t>(K));
}

TEST_CASE("explicit degree below its transition is refused", "[pipeline]") {
    const int n = 100, K = 10;
    const double mu = std::sqrt(0.5 * n) / K;  // lambda = 0.5
    auto inst = subloc::gen_symmetric(n, K, mu, 3);

    PipelineOptions opt;
    opt.d = 1;  // degree-1 transition sits at 1 > 0.5
    CHECK_THROWS_AS(subloc::run_alg1(inst, opt, 1), subloc::NoDivergence);

    opt.d = 2;  // degree-2 transition is 0.414 < 0.5
    auto res = subloc::run_alg1(inst, opt, 1);
    CHECK(res.d == 2);
    CHECK(res.c_hat.size() == static_cast<std::size_t>(K));
}

TEST_CASE("empty threshold set falls back to top beliefs", "[pipeline]") {
    // On an all-negative matrix the beliefs flip sign every iteration, so
    // a lambda whose trace crosses at an odd step leaves them all negative.
    // The threshold then keeps nothing and ranking by belief decides; all
    // beliefs tie, so the smallest indices win, which here is the support.
    subloc::PlantedInstance inst;
    inst.n = 20;
    inst.K = 4;
    inst.mu = std::sqrt(2.5 * 20.0) / 4.0;  // lambda = 2.5 crosses at t = 9
    inst.support = {0, 1, 2, 3};
    inst.W = Eigen::MatrixXd::Constant(20, 20, -1.0);

    auto res = subloc::run_alg1(inst, PipelineOptions{}, 1);
    REQUIRE(res.t_star == 9);
    CHECK(res.beliefs(0) < 0.0);
    CHECK(res.c_tilde.empty());
    CHECK(res.c_hat == std::vector<int>{0, 1, 2, 3});
    CHECK(res.hat_report.exact);
}

TEST_CASE("affine variant coincides with optimal at degree one", "[pipeline]") {
    const int n = 150, K = 25;
    const double mu = std::sqrt(2.0 * n) / K;
    auto inst = subloc::gen_symmetric(n, K, mu, 12);

    PipelineOptions a;
    a.d = 1;
    a.variant = subloc::Variant::optimal;
    PipelineOptions b;
    b.d = 1;
    b.variant = subloc::Variant::affine;

    auto ra = subloc::run_alg1(inst, a, 5);
    auto rb = subloc::run_alg1(inst, b, 5);
    CHECK(ra.t_star == rb.t_star);
    CHECK(ra.c_hat == rb.c_hat);
    CHECK((ra.beliefs - rb.beliefs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unadapted variant still recovers an easy block", "[pipeline]") {
    const int n = 300, K = 60;
    const double mu = std::sqrt(6.0 * n) / K;  // lambda = 6, very strong
    auto inst = subloc::gen_symmetric(n, K, mu, 9);

    PipelineOptions opt;
    opt.variant = subloc::Variant::linear;
    opt.d = 1;
    auto res = subloc::run_alg1(inst, opt, 4);
    CHECK(res.c_hat.size() == static_cast<std::size_t>(K));
    CHECK(res.hat_report.fraction < 0.1);
}
