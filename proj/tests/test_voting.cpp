#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "subloc/voting.hpp"

using Catch::Matchers::WithinAbs;

TEST_CASE("partition covers every index exactly once", "[voting]") {
    for (auto [n, delta] : std::vector<std::pair<int, double>>{
             {10, 1.0 / 3}, {100, 0.25}, {17, 0.5}, {40, 0.1}}) {
        auto p = subloc::partition(n, delta, 42);
        int m = static_cast<int>(std::llround(1.0 / delta));
        REQUIRE(static_cast<int>(p.blocks.size()) == m);

        std::set<int> seen;
        std::size_t lo = n, hi = 0;
        for (const auto& blk : p.blocks) {
            CHECK(std::is_sorted(blk.begin(), blk.end()));
            for (int i : blk) {
                CHECK(seen.insert(i).second);  // no index twice
            }
            lo = std::min(lo, blk.size());
            hi = std::max(hi, blk.size());
        }
        CHECK(static_cast<int>(seen.size()) == n);
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == n - 1);
        CHECK(hi - lo <= 1);
    }
}

TEST_CASE("partition remainder goes to the front blocks", "[voting]") {
    auto p = subloc::partition(10, 1.0 / 3, 7);
    REQUIRE(p.blocks.size() == 3u);
    CHECK(p.blocks[0].size() == 4u);
    CHECK(p.blocks[1].size() == 3u);
    CHECK(p.blocks[2].size() == 3u);
}

TEST_CASE("partition is seed-deterministic", "[voting]") {
    auto a = subloc::partition(50, 0.2, 9);
    auto b = subloc::partition(50, 0.2, 9);
    auto c = subloc::partition(50, 0.2, 10);
    CHECK(a.blocks == b.blocks);
    CHECK(a.blocks != c.blocks);
}

TEST_CASE("partition validation", "[voting]") {
    CHECK_THROWS_AS(subloc::partition(1, 0.5, 1), subloc::Error);
    CHECK_THROWS_AS(subloc::partition(10, 0.3, 1), subloc::Error);   // 1/0.3 not integral
    CHECK_THROWS_AS(subloc::partition(10, 0.6, 1), subloc::Error);
    CHECK_THROWS_AS(subloc::partition(10, 0.05, 1), subloc::Error);  // 20 blocks > n
    CHECK_THROWS_AS(subloc::partition(10, 1.0, 1), subloc::Error);
    CHECK_NOTHROW(subloc::partition(10, 0.1, 1));
}

TEST_CASE("votes read only estimate columns, never the held-out block", "[voting]") {
    // Access-recording stand-in for the matrix: every (i, j) the vote loop
    // touches is logged, which pins down the data-splitting discipline.
    struct Probe {
        mutable std::vector<std::pair<int, int>> log;
        double operator()(int i, int j) const {
            log.emplace_back(i, j);
            return 1.0;
        }
    } probe;

    std::vector<int> est = {2, 5, 7};
    std::vector<int> held = {0, 1, 3};
    auto r = subloc::block_votes(probe, est, held);
    REQUIRE(r.size() == held.size());
    for (double v : r) CHECK(v == 3.0);

    std::set<int> held_set(held.begin(), held.end());
    std::set<int> est_set(est.begin(), est.end());
    CHECK(probe.log.size() == est.size() * held.size());
    for (auto [i, j] : probe.log) {
        CHECK(held_set.count(i) == 1);  // rows scored are the held-out ones
        CHECK(est_set.count(j) == 1);   // columns come from the estimate only
        CHECK(held_set.count(j) == 0);
    }

    // an estimate leaking into the held-out block is refused outright
    CHECK_THROWS_AS(subloc::block_votes(probe, std::vector<int>{1, 5}, held), subloc::Error);
}

TEST_CASE("block votes on a concrete matrix", "[voting]") {
    Eigen::MatrixXd A(3, 3);
    A << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    auto r = subloc::block_votes(A, {2}, {0, 1});
    REQUIRE(r.size() == 2u);
    CHECK(r[0] == 3.0);
    CHECK(r[1] == 6.0);
}

TEST_CASE("top-K selection breaks ties toward smaller indices", "[voting]") {
    CHECK(subloc::select_top_k({3, 5, 5, 1}, 2) == std::vector<int>{1, 2});
    CHECK(subloc::select_top_k({2, 2, 2}, 2) == std::vector<int>{0, 1});
    CHECK(subloc::select_top_k({1, 4, 2}, 0).empty());
    CHECK_THROWS_AS(subloc::select_top_k({1, 2}, 3), subloc::Error);
    CHECK_THROWS_AS(subloc::select_top_k({1, 2}, -1), subloc::Error);
}

TEST_CASE("vote separation pinned values and monotonicity", "[voting]") {
    CHECK_THAT(subloc::vote_separation(1000, 200, 0.6, 1.0 / 9),
               WithinAbs(0.93975440427089979, 1e-12));
    CHECK_THAT(subloc::vote_separation(1000, 200, 0.6, 1.0 / 3),
               WithinAbs(0.39039844068032717, 1e-12));
    // shrinking delta always helps the margin
    CHECK(subloc::vote_separation(1000, 200, 0.6, 1.0 / 9) >
          subloc::vote_separation(1000, 200, 0.6, 1.0 / 8));
}

TEST_CASE("delta search returns the largest workable block fraction", "[voting]") {
    // weak mode only needs per-block supercriticality; at lambda = 2/e the
    // requirement 2(1 - delta) > 1 rules out 1/2 and admits 1/3
    double lam = 2.0 / std::exp(1.0);
    CHECK_THAT(subloc::choose_delta(1000, 100, 0.5, lam, true), WithinAbs(1.0 / 3, 1e-15));

    // exact mode also needs the vote margin; at 1.3x the boundary strength
    // the first grid value past it is 1/9
    double mu = 1.3 * 0.49300682978798310;
    double lam2 = mu * mu * 200.0 * 200.0 / 1000.0;
    CHECK_THAT(subloc::choose_delta(1000, 200, mu, lam2), WithinAbs(1.0 / 9, 1e-15));

    // barely supercritical lambda: even 1/40 misses lambda e (1-delta) > 1
    CHECK_THROWS_AS(subloc::choose_delta(1000, 100, 0.5, 1.01 / std::exp(1.0), true),
                    subloc::NoFeasibleDelta);
    CHECK_THROWS_AS(subloc::choose_delta(10, 10, 0.5, 2.0), subloc::Error);
}

TEST_CASE("data-splitting run refuses subcritical instances", "[voting]") {
    const int n = 100, K = 10;
    const double mu = std::sqrt(0.2 * n) / K;
    auto inst = subloc::gen_symmetric(n, K, mu, 5);
    CHECK_THROWS_AS(subloc::run_alg2(inst, 0.25, subloc::PipelineOptions{}, 1),
                    subloc::SubcriticalLambda);
}

TEST_CASE("data-splitting run recovers exactly above the vote margin", "[voting][slow]") {
    const int n = 300, K = 60;
    const double mu = 1.3 * 0.80546399230543412;  // 1.3x the exact boundary
    auto inst = subloc::gen_symmetric(n, K, mu, 19);

    double delta = subloc::choose_delta(n, K, mu, inst.lambda());
    CHECK_THAT(delta, WithinAbs(1.0 / 9, 1e-15));

    auto res = subloc::run_alg2(inst, delta, subloc::PipelineOptions{}, 77);
    CHECK(res.report.exact);
    CHECK(res.c_check == inst.support);
    CHECK(res.vote_margin > 0.0);
    CHECK(res.block_hat_fractions.size() == 9u);
    for (double f : res.block_hat_fractions) CHECK(f <= 0.2);
}
