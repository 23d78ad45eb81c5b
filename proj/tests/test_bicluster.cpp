#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracle_helpers.hpp"
#include "subloc/bicluster.hpp"
#include "subloc/model.hpp"

using Catch::Matchers::WithinRel;
using subloc::BiclusterInstance;
using subloc::gen_bicluster;

TEST_CASE("two-sided planning constants", "[bicluster]") {
    BiclusterInstance inst = gen_bicluster(100, 400, 20, 30, 1.0, 3, true);
    REQUIRE(inst.lambda1() == 4.0);
    REQUIRE(inst.lambda2() == 2.25);

    subloc::Alg3Plan plan = subloc::plan_alg3(inst);
    CHECK(plan.d == 1);
    CHECK(plan.t_star == 8);
    CHECK_THAT(plan.s_star, WithinRel(0.50915867520769403, 1e-11));

    // replay the alternating recursion in long double and find the first
    // even index that clears the level together with its successor
    double M = 8.0 * std::log(1.0 / 1e-4);
    auto v = oracle::se_ld(4.0L, 2.25L, 1, 12);
    int te = -1;
    for (int t = 2; t + 1 < static_cast<int>(v.size()); t += 2) {
        if (std::sqrt(v[t]) > M && std::sqrt(v[t + 1]) > M) {
            te = t;
            break;
        }
    }
    REQUIRE(te == plan.t_star);
}

TEST_CASE("step-count constant falls back when the cleanup bound degenerates", "[bicluster]") {
    // a strongly lopsided pair: feasible for message passing, but the
    // rescaled noise constant is past the point where the cleanup step
    // bound stops being positive
    double mu = std::sqrt(0.00458 * 3000.0 / 16.0);
    BiclusterInstance inst = gen_bicluster(3000, 3000, 4, 118, mu, 3, true);
    double c0 = subloc::c0_bicluster(3000, 3000, 4, 118, mu);
    REQUIRE(c0 > 5.0);
    REQUIRE_THROWS_AS(subloc::s_star_bicluster(1e-4, c0), subloc::InvalidRegime);

    subloc::Alg3Plan plan = subloc::plan_alg3(inst);
    CHECK(plan.s_star == 4.0);
    CHECK(plan.d >= 2);
    CHECK(plan.d <= 50);
    // the chosen degree is minimal for the pair
    CHECK(subloc::in_region_Gd(inst.lambda1(), inst.lambda2(), plan.d));
    CHECK_FALSE(subloc::in_region_Gd(inst.lambda1(), inst.lambda2(), plan.d - 1));
}

TEST_CASE("noiseless two-sided run recovers both supports exactly", "[bicluster]") {
    BiclusterInstance inst = gen_bicluster(400, 400, 40, 40, 1.0, 9, true);
    subloc::Alg3Plan plan = subloc::plan_alg3(inst);
    REQUIRE(plan.t_star == 6);

    subloc::Alg3Result res = subloc::run_alg3(inst, plan.d, plan.t_star, plan.s_star, 5);
    CHECK(res.d == plan.d);
    CHECK(res.t_star == 6);
    CHECK(res.row_beliefs.size() == 400);
    CHECK(res.col_beliefs.size() == 400);
    CHECK(res.c1_tilde == inst.row_support);
    CHECK(res.c2_tilde == inst.col_support);
    CHECK(res.c1_hat == inst.row_support);
    CHECK(res.c2_hat == inst.col_support);
    CHECK(res.report1.exact);
    CHECK(res.report2.exact);
}

TEST_CASE("noisy two-sided run cleans up to exact recovery", "[bicluster]") {
    BiclusterInstance inst = gen_bicluster(300, 300, 30, 30, std::sqrt(2.0), 1, false);
    subloc::Alg3Plan plan = subloc::plan_alg3(inst);
    subloc::Alg3Result res = subloc::run_alg3(inst, plan.d, plan.t_star, plan.s_star, 101);
    CHECK(res.c1_tilde.size() == 30);
    CHECK(res.c2_tilde.size() == 30);
    CHECK(res.report1.exact);
    CHECK(res.report2.exact);
    CHECK(res.report1.hamming == 0);
    CHECK(res.report2.hamming == 0);
}

TEST_CASE("two-sided run gates its inputs", "[bicluster]") {
    BiclusterInstance weak = gen_bicluster(40, 40, 4, 4, 0.5, 2, true);  // snr pair (0.1, 0.1)
    REQUIRE_THROWS_AS(subloc::run_alg3(weak, 1, 3, 4.0, 1), subloc::Error);
    REQUIRE_THROWS_AS(subloc::run_alg3(weak, 1, 0, 4.0, 1), subloc::Error);
    REQUIRE_THROWS_AS(subloc::run_alg3(weak, 1, 4, 4.0, 1), subloc::OutsideG);
    REQUIRE_THROWS_AS(subloc::choose_delta_bicluster(weak), subloc::NoFeasibleDelta);
}

TEST_CASE("equal multipliers reduce to the one-sided schedule", "[bicluster]") {
    // with lambda1 = lambda2 the alternating trace is the plain trace, so
    // the two-sided stop index is the one-sided index rounded up to even
    double M = 8.0 * std::log(1.0 / 1e-4);
    for (double lam : {1.5, 2.0, 3.0, 4.5, 6.0, 8.0}) {
        auto one = subloc::build_schedule(lam, 1, M, subloc::Variant::optimal);
        auto two = subloc::build_schedule_bicluster(lam, lam, 1, M);
        INFO("lambda = " << lam);
        REQUIRE(two.t_star % 2 == 0);
        REQUIRE((two.t_star == one.t_star || two.t_star == one.t_star + 1));
        std::size_t shared = std::min(one.mu_hat.size(), two.mu_hat.size());
        for (std::size_t t = 0; t < shared; ++t) {
            REQUIRE(two.mu_hat[t] == one.mu_hat[t]);
        }
    }
}

TEST_CASE("vote totals probe rows against a fixed column set", "[bicluster]") {
    Eigen::MatrixXd W(3, 4);
    W << 1.0, 2.0, 3.0, 4.0,
         5.0, 6.0, 7.0, 8.0,
         9.0, 10.0, 11.0, 12.0;
    auto r = subloc::bicluster_votes(W, std::vector<int>{0, 2}, std::vector<int>{1, 2});
    REQUIRE(r.size() == 2);
    CHECK(r[0] == 5.0 + 7.0);
    CHECK(r[1] == 9.0 + 11.0);

    // columns are scored through the transpose, so the fixed set now
    // indexes rows of the original matrix
    auto c = subloc::bicluster_votes(W.transpose(), std::vector<int>{1}, std::vector<int>{0, 3});
    REQUIRE(c.size() == 2);
    CHECK(c[0] == 5.0);
    CHECK(c[1] == 8.0);

    // the two index sets live on different axes and may collide freely
    auto d = subloc::bicluster_votes(W, std::vector<int>{1}, std::vector<int>{1});
    CHECK(d[0] == 6.0);
}

TEST_CASE("true column support ranks the planted rows first", "[bicluster][slow]") {
    int exact_count = 0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        BiclusterInstance inst = gen_bicluster(800, 800, 60, 60, 1.094, s, false);
        std::vector<int> all_rows(inst.n1);
        for (int i = 0; i < inst.n1; ++i) all_rows[i] = i;
        auto votes = subloc::bicluster_votes(inst.W, inst.col_support, all_rows);
        auto top = subloc::select_top_k(votes, inst.K1);
        if (subloc::error_report(top, inst.row_support, inst.K1).exact) ++exact_count;
    }
    CHECK(exact_count == 10);
}

TEST_CASE("largest feasible block fraction", "[bicluster]") {
    BiclusterInstance strong = gen_bicluster(300, 300, 30, 30, std::sqrt(2.0), 1, true);
    CHECK(subloc::choose_delta_bicluster(strong) == 0.5);  // snr pair (6, 6)

    BiclusterInstance marginal = gen_bicluster(3200, 3200, 40, 40, 1.0, 1, true);
    CHECK_THAT(subloc::choose_delta_bicluster(marginal), WithinRel(1.0 / 3.0, 1e-15));
}

TEST_CASE("data-splitting two-sided voting recovers both sides", "[bicluster][slow]") {
    BiclusterInstance inst = gen_bicluster(200, 160, 40, 30, 1.0, 21, false);
    double delta = subloc::choose_delta_bicluster(inst);
    REQUIRE(delta == 0.5);

    subloc::BiclusterVotingResult res = subloc::run_bicluster_voting(inst, delta, 1e-4, 521);
    CHECK(res.delta == 0.5);
    CHECK(res.c1_check == inst.row_support);
    CHECK(res.c2_check == inst.col_support);
    CHECK(res.report1.exact);
    CHECK(res.report2.exact);
    CHECK(res.row_margin > 0.0);
    CHECK(res.col_margin > 0.0);

    REQUIRE_THROWS_AS(subloc::run_bicluster_voting(inst, 0.3, 1e-4, 1), subloc::Error);
}
