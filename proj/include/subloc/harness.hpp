#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "subloc/baselines.hpp"
#include "subloc/bicluster.hpp"
#include "subloc/limits.hpp"
#include "subloc/serialize.hpp"
#include "subloc/voting.hpp"

namespace subloc {

// One flat record of everything an experiment needs. Validation resolves
// mu from lambda (or back) and rejects contradictory or missing values
// for the selected mode before any trial runs.
struct ExperimentConfig {
    std::string mode = "recover";
    int n = 500, K = 50;
    int n1 = 0, n2 = 0, K1 = 0, K2 = 0;  // rectangular model, 0 = unset
    double mu = 0.0;                     // one of mu/lambda may be given
    double lambda = 0.0;
    int d = 0;           // 0 = pick the degree from lambda
    double delta = 0.0;  // 0 = no voting stage
    double epsilon = 1e-4;
    std::string variant = "optimal";
    bool noiseless = false;
    int trials = 1;
    std::uint64_t seed = 1;
    std::string out;  // output directory, empty = stdout only
    int t = 3;        // fixed horizon for ks-check
    int grid = 50;    // plot grid resolution
    int workers = 0;  // 0 = hardware concurrency
    std::vector<double> lambda_list = {0.2, 0.5, 1.0, 2.0, 3.0};
};

inline const std::vector<std::string>& known_modes() {
    static const std::vector<std::string> m = {"recover",       "montecarlo", "se",
                                              "thresholds",    "boundary",   "phase-diagram",
                                              "bicluster",     "limits",     "ks-check"};
    return m;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["mode"] = c.mode;
    j["n"] = c.n;
    j["K"] = c.K;
    if (c.n1 > 0) {
        j["n1"] = c.n1;
        j["n2"] = c.n2;
        j["K1"] = c.K1;
        j["K2"] = c.K2;
    }
    j["mu"] = c.mu;
    j["lambda"] = c.lambda;
    j["d"] = c.d;
    j["delta"] = c.delta;
    j["epsilon"] = c.epsilon;
    j["variant"] = c.variant;
    j["noiseless"] = c.noiseless;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["t"] = c.t;
    j["grid"] = c.grid;
    j["lambda_list"] = c.lambda_list;
    return j;
}

// Fills in whichever of mu/lambda is missing and checks everything the
// selected mode will touch. Throws Error on any inconsistency.
inline void validate_config(ExperimentConfig& c) {
    if (std::find(known_modes().begin(), known_modes().end(), c.mode) == known_modes().end()) {
        throw Error("unknown mode: " + c.mode);
    }
    if (c.trials < 1) throw Error("trials must be >= 1");
    if (c.grid < 2) throw Error("grid must be >= 2");
    if (!(c.epsilon > 0.0) || !(c.epsilon < kEpsilonCap)) {
        throw Error("epsilon must lie in (0, 1e-3)");
    }
    variant_from_name(c.variant);  // throws on bad names
    if (c.mu < 0.0 || c.lambda < 0.0) throw Error("mu and lambda must be nonnegative");
    if (c.mu > 0.0 && c.lambda > 0.0) throw Error("give either mu or lambda, not both");

    bool needs_model = c.mode == "recover" || c.mode == "montecarlo" || c.mode == "ks-check" ||
                       c.mode == "limits";
    if (needs_model) {
        if (c.n < 2 || c.K < 1 || c.K > c.n) throw Error("need n >= 2 and 1 <= K <= n");
        if (c.mu == 0.0 && c.lambda == 0.0) {
            throw Error("mode " + c.mode + " needs mu or lambda");
        }
        if (c.mu == 0.0 && c.lambda > 0.0) {
            c.mu = std::sqrt(c.lambda * c.n) / c.K;
        } else if (c.lambda == 0.0) {
            c.lambda = c.mu * c.mu * c.K * static_cast<double>(c.K) / c.n;
        }
    }
    if (c.mode == "bicluster") {
        if (c.n1 < 2 || c.n2 < 2 || c.K1 < 1 || c.K2 < 1 || c.K1 > c.n1 || c.K2 > c.n2) {
            throw Error("bicluster mode needs n1, n2, K1, K2 with 1 <= Ki <= ni");
        }
        if (c.mu == 0.0) throw Error("bicluster mode needs mu");
    }
    if (c.mode == "se" && c.lambda == 0.0) {
        if (c.mu == 0.0) throw Error("se mode needs lambda (or mu with n, K)");
        c.lambda = c.mu * c.mu * c.K * static_cast<double>(c.K) / c.n;
    }
    if (c.mode == "ks-check" && c.t < 1) throw Error("ks-check needs t >= 1");
    if (c.delta > 0.0) {
        double inv = 1.0 / c.delta;
        if (std::abs(inv - std::llround(inv)) > 1e-9) throw Error("1/delta must be an integer");
    }
}

struct TrialRecord {
    int trial = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double lambda = 0.0, mu = 0.0;
    int d = 0, t_star = 0;
    double tilde_fraction = 0.0;  // after thresholding
    double hat_fraction = 0.0;    // after cleanup
    double vote_fraction = -1.0;  // after voting, -1 when voting did not run
    bool exact = false;
    double vote_margin = 0.0;
    // wall times, written to the timings sidecar only (nondeterministic)
    double generate_ms = 0.0, mp_ms = 0.0, cleanup_ms = 0.0, vote_ms = 0.0;
};

inline nlohmann::json record_to_json(const TrialRecord& r) {
    nlohmann::json j;
    j["trial"] = r.trial;
    j["seed"] = r.seed;
    if (r.failed) {
        j["failed"] = true;
        j["error"] = r.error;
        return j;
    }
    j["lambda"] = r.lambda;
    j["mu"] = r.mu;
    j["d"] = r.d;
    j["t_star"] = r.t_star;
    j["tilde_fraction"] = r.tilde_fraction;
    j["hat_fraction"] = r.hat_fraction;
    if (r.vote_fraction >= 0.0) {
        j["vote_fraction"] = r.vote_fraction;
        j["vote_margin"] = r.vote_margin;
    }
    j["exact"] = r.exact;
    return j;
}

struct SweepResult {
    std::vector<TrialRecord> records;
    double mean_fraction = 0.0;  // of the final stage (vote if run, else cleanup)
    double stderr_fraction = 0.0;
    int exact_count = 0;
    int failed_count = 0;
    bool budget_exceeded = false;  // more than 20% of trials failed
};

namespace detail {

inline void run_pool(int trials, int workers, const std::function<void(int)>& body) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, trials);
    if (workers == 1) {
        for (int i = 0; i < trials; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < trials; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline void aggregate(SweepResult& res) {
    std::vector<double> vals;
    for (const auto& r : res.records) {
        if (r.failed) {
            ++res.failed_count;
            continue;
        }
        vals.push_back(r.vote_fraction >= 0.0 ? r.vote_fraction : r.hat_fraction);
        if (r.exact) ++res.exact_count;
    }
    if (!vals.empty()) {
        double sum = 0.0;
        for (double v : vals) sum += v;
        res.mean_fraction = sum / static_cast<double>(vals.size());
        if (vals.size() > 1) {
            double ss = 0.0;
            for (double v : vals) ss += (v - res.mean_fraction) * (v - res.mean_fraction);
            res.stderr_fraction =
                std::sqrt(ss / (static_cast<double>(vals.size()) - 1.0) / vals.size());
        }
    }
    res.budget_exceeded =
        res.failed_count * 5 > static_cast<int>(res.records.size());
}

inline void write_sweep_files(const ExperimentConfig& cfg, const SweepResult& res) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out);

    std::ofstream rec(fs::path(cfg.out) / "results.jsonl");
    rec << nlohmann::json{{"config", config_to_json(cfg)}, {"version", kVersion}}.dump()
        << '\n';
    for (const auto& r : res.records) rec << record_to_json(r).dump() << '\n';

    std::ofstream man(fs::path(cfg.out) / "manifest.json");
    nlohmann::json j;
    j["version"] = kVersion;
    j["config"] = config_to_json(cfg);
    j["aggregate"] = {{"mean_fraction", res.mean_fraction},
                      {"stderr_fraction", res.stderr_fraction},
                      {"exact_count", res.exact_count},
                      {"failed_count", res.failed_count}};
    man << j.dump(2) << '\n';

    // Wall times are inherently nondeterministic, so they live in a
    // sidecar and never touch the reproducible records.
    std::ofstream tim(fs::path(cfg.out) / "timings.csv");
    tim << "trial,generate_ms,mp_ms,cleanup_ms,vote_ms\n";
    for (const auto& r : res.records) {
        tim << r.trial << ',' << r.generate_ms << ',' << r.mp_ms << ',' << r.cleanup_ms << ','
            << r.vote_ms << '\n';
    }
}

}  // namespace detail

// Seeded Monte Carlo sweep for the recover/montecarlo/bicluster modes.
// Trial i derives its seed as mix_seed(master, i); failures are recorded
// and the sweep continues, with the 20% budget reported on the result.
inline SweepResult run_sweep(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    validate_config(cfg);
    if (cfg.mode != "recover" && cfg.mode != "montecarlo" && cfg.mode != "bicluster") {
        throw Error("run_sweep: mode " + cfg.mode + " is not a sweep mode");
    }

    SweepResult res;
    res.records.assign(cfg.trials, {});
    PipelineOptions opt;
    opt.epsilon = cfg.epsilon;
    opt.d = cfg.d;
    opt.variant = variant_from_name(cfg.variant);
    opt.allow_subcritical = true;

    detail::run_pool(cfg.trials, cfg.workers, [&](int i) {
        TrialRecord& r = res.records[i];
        r.trial = i;
        r.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(i));
        try {
            if (cfg.mode == "bicluster") {
                BiclusterInstance inst = gen_bicluster(cfg.n1, cfg.n2, cfg.K1, cfg.K2, cfg.mu,
                                                       r.seed, cfg.noiseless);
                r.mu = cfg.mu;
                r.lambda = inst.lambda1();
                auto t0 = std::chrono::steady_clock::now();
                Alg3Plan plan = plan_alg3(inst, cfg.epsilon);
                Alg3Result a3 =
                    run_alg3(inst, plan.d, plan.t_star, plan.s_star, mix_seed(r.seed, 1));
                r.mp_ms = detail::ms_since(t0);
                r.d = a3.d;
                r.t_star = a3.t_star;
                r.hat_fraction = 0.5 * (a3.report1.fraction + a3.report2.fraction);
                r.exact = a3.report1.exact && a3.report2.exact;
                if (cfg.delta > 0.0) {
                    t0 = std::chrono::steady_clock::now();
                    BiclusterVotingResult vr = run_bicluster_voting(inst, cfg.delta, cfg.epsilon,
                                                                    mix_seed(r.seed, 2));
                    r.vote_ms = detail::ms_since(t0);
                    r.vote_fraction = 0.5 * (vr.report1.fraction + vr.report2.fraction);
                    r.vote_margin = std::min(vr.row_margin, vr.col_margin);
                    r.exact = vr.report1.exact && vr.report2.exact;
                }
                return;
            }
            PlantedInstance inst = gen_symmetric(cfg.n, cfg.K, cfg.mu, r.seed, cfg.noiseless);
            r.mu = cfg.mu;
            r.lambda = inst.lambda();
            RecoveryResult rr = run_alg1(inst, opt, mix_seed(r.seed, 1));
            r.d = rr.d;
            r.t_star = rr.t_star;
            r.tilde_fraction = rr.tilde_report.fraction;
            r.hat_fraction = rr.hat_report.fraction;
            r.exact = rr.hat_report.exact;
            r.generate_ms = rr.timings.generate_ms;
            r.mp_ms = rr.timings.mp_ms;
            r.cleanup_ms = rr.timings.cleanup_ms;
            if (cfg.delta > 0.0) {
                auto t0 = std::chrono::steady_clock::now();
                VotingResult vr = run_alg2(inst, cfg.delta, opt, mix_seed(r.seed, 2));
                r.vote_ms = detail::ms_since(t0);
                r.vote_fraction = vr.report.fraction;
                r.vote_margin = vr.vote_margin;
                r.exact = vr.report.exact;
            }
        } catch (const std::exception& e) {
            r.failed = true;
            r.error = e.what();
        }
    });

    detail::aggregate(res);
    if (!cfg.out.empty()) detail::write_sweep_files(cfg, res);
    return res;
}

// Two-sided Kolmogorov-Smirnov distance between a sample and N(mean, 1).
inline double ks_distance(std::vector<double> sample, double mean) {
    if (sample.empty()) throw Error("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = phi_cdf(sample[i] - mean);
        dist = std::max(dist, std::abs((i + 1.0) / m - f));
        dist = std::max(dist, std::abs(static_cast<double>(i) / m - f));
    }
    return dist;
}

struct KsRow {
    int t = 0;
    double mu_hat = 0.0;
    double avg_on = 0.0, avg_off = 0.0;
    std::vector<double> on, off;  // per-seed distances
};

struct KsReport {
    std::vector<KsRow> rows;  // one per iteration 1..t
};

// Compares empirical belief distributions against the predicted
// Gaussians: off the planted set against N(0,1) and on it against
// N(mu_hat_t, 1), at every iteration up to the configured horizon,
// averaged over trials. Subcritical lambdas are rejected because the
// prediction only makes sense on a diverging trace.
inline KsReport ks_check(const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    validate_config(cfg);
    Variant variant = variant_from_name(cfg.variant);
    int d = cfg.d;
    if (d == 0) {
        d = (cfg.lambda > kInvE) ? d_star(cfg.lambda) : 0;
        if (d == 0) throw SubcriticalLambda("ks_check: lambda <= 1/e");
    } else if (d >= 2 && cfg.lambda <= lambda_star(d)) {
        throw SubcriticalLambda("ks_check: lambda at or below the degree-d threshold");
    } else if (d == 1 && variant != Variant::linear && cfg.lambda <= 1.0) {
        throw SubcriticalLambda("ks_check: degree 1 needs lambda > 1");
    }
    NonlinearitySchedule sched = build_schedule_horizon(cfg.lambda, d, cfg.t, variant);

    KsReport rep;
    rep.rows.resize(cfg.t);
    for (int t = 1; t <= cfg.t; ++t) {
        rep.rows[t - 1].t = t;
        rep.rows[t - 1].mu_hat = sched.mu_hat.at(t);
        rep.rows[t - 1].on.resize(cfg.trials);
        rep.rows[t - 1].off.resize(cfg.trials);
    }

    detail::run_pool(cfg.trials, cfg.workers, [&](int s) {
        std::uint64_t seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(s));
        PlantedInstance inst = gen_symmetric(cfg.n, cfg.K, cfg.mu, seed, cfg.noiseless);
        Eigen::MatrixXd A = scale(inst.W, inst.n);
        std::vector<char> planted(inst.n, 0);
        for (int i : inst.support) planted[i] = 1;
        run_mp(A, sched, [&](int t, const Eigen::VectorXd& beliefs) {
            std::vector<double> on, off;
            on.reserve(inst.K);
            off.reserve(inst.n - inst.K);
            for (int i = 0; i < inst.n; ++i) {
                (planted[i] ? on : off).push_back(beliefs(i));
            }
            rep.rows[t - 1].on[s] = ks_distance(std::move(on), sched.mu_hat.at(t));
            rep.rows[t - 1].off[s] = ks_distance(std::move(off), 0.0);
        });
    });

    for (auto& row : rep.rows) {
        double son = 0.0, soff = 0.0;
        for (double v : row.on) son += v;
        for (double v : row.off) soff += v;
        row.avg_on = son / cfg.trials;
        row.avg_off = soff / cfg.trials;
    }

    if (!cfg.out.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out);
        std::ofstream out(fs::path(cfg.out) / "ks.csv");
        out << "# version=" << kVersion << '\n';
        out << "# config=" << config_to_json(cfg).dump() << '\n';
        out << "t,mu_hat,avg_off,avg_on\n";
        for (const auto& row : rep.rows) {
            out << row.t << ',' << row.mu_hat << ',' << row.avg_off << ',' << row.avg_on
                << '\n';
        }
    }
    return rep;
}

namespace detail {

inline std::ofstream open_plot_file(const ExperimentConfig& cfg, const std::string& name) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out.empty() ? "." : cfg.out);
    std::ofstream out(fs::path(cfg.out.empty() ? "." : cfg.out) / name);
    out << "# version=" << kVersion << '\n';
    out << "# config=" << config_to_json(cfg).dump() << '\n';
    return out;
}

// Boundary of the degree-d divergence region at fixed lambda1, found by
// bisecting the membership verdict in lambda2.
inline double gd_boundary_lambda2(double lambda1, int d) {
    auto inside = [&](double l2) {
        return in_region_Gd(lambda1, l2, d);
    };
    double lo = 1e-4, hi = std::max(4.0, 2.0 / lambda1);
    while (!inside(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw Error("gd_boundary_lambda2: no inside point found");
    }
    if (inside(lo)) return lo;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (inside(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Deterministic CSV emitters for the standard figures: the scaling-regime
// phase curves, the divergence-region boundary, the nested degree-d
// boundaries, and Monte Carlo error curves across a lambda list.
inline void emit_plot_data(const std::string& kind, const ExperimentConfig& cfg_in) {
    ExperimentConfig cfg = cfg_in;
    if (cfg.grid < 2) throw Error("emit_plot_data: grid must be >= 2");

    if (kind == "fig1") {
        std::vector<double> mu0s;
        const double lo = 0.5, hi = 40.0;
        for (int i = 0; i < cfg.grid; ++i) {
            mu0s.push_back(lo + (hi - lo) * i / (cfg.grid - 1));
        }
        mu0s.push_back(8.0 * std::sqrt(std::exp(1.0)));  // the curve crossing
        std::sort(mu0s.begin(), mu0s.end());
        auto out = detail::open_plot_file(cfg, "fig1.csv");
        out << "mu0,rho_mp,rho_exact\n";
        out.precision(17);
        for (double m : mu0s) {
            out << m << ',' << phase_curve_mp(m) << ',' << phase_curve_exact(m) << '\n';
        }
        return;
    }
    if (kind == "regionG") {
        std::vector<double> ys;
        const double lo = std::log(0.05), hi = std::log(20.0);
        for (int i = 0; i < cfg.grid; ++i) {
            ys.push_back(std::exp(lo + (hi - lo) * i / (cfg.grid - 1)));
        }
        ys.push_back(1.0);  // the symmetric corner (1/e, 1/e)
        std::sort(ys.begin(), ys.end());
        auto out = detail::open_plot_file(cfg, "region_g.csv");
        out << "y,lambda1,lambda2\n";
        out.precision(17);
        for (double y : ys) {
            auto [l1, l2] = boundary_point(y);
            out << y << ',' << l1 << ',' << l2 << '\n';
        }
        return;
    }
    if (kind == "Gd-boundaries") {
        auto out = detail::open_plot_file(cfg, "gd_boundaries.csv");
        out << "d,lambda1,lambda2\n";
        out.precision(17);
        const double lo = 0.4, hi = 2.5;
        for (int d = 1; d <= 3; ++d) {
            for (int i = 0; i < cfg.grid; ++i) {
                double l1 = lo + (hi - lo) * i / (cfg.grid - 1);
                out << d << ',' << l1 << ',' << detail::gd_boundary_lambda2(l1, d) << '\n';
            }
        }
        return;
    }
    if (kind == "error-curves") {
        auto out = detail::open_plot_file(cfg, "error_curves.csv");
        out << "lambda,mean_fraction,stderr,exact_count\n";
        out.precision(17);
        for (double lambda : cfg.lambda_list) {
            ExperimentConfig sub = cfg;
            sub.mode = "montecarlo";
            sub.lambda = lambda;
            sub.mu = 0.0;
            sub.out.clear();
            SweepResult r = run_sweep(sub);
            out << lambda << ',' << r.mean_fraction << ',' << r.stderr_fraction << ','
                << r.exact_count << '\n';
        }
        return;
    }
    throw Error("emit_plot_data: unknown kind " + kind);
}

}  // namespace subloc
