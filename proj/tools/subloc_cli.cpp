// Command-line front end for the submatrix localization library. The mode
// is picked by subcommand; shared knobs live on the top-level app so they
// can appear before or after it, or come from a --config file (flags win
// over file values).
//
// Exit codes: 0 on success, 2 on bad arguments or configuration, 3 when a
// sweep finishes but more than a fifth of the trials failed.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subloc/subloc.hpp"

namespace {

const char* verdict_name(subloc::RegionVerdict v) {
    switch (v) {
        case subloc::RegionVerdict::inside: return "inside";
        case subloc::RegionVerdict::outside: return "outside";
        default: return "boundary";
    }
}

nlohmann::json sweep_summary(const subloc::ExperimentConfig& cfg, const subloc::SweepResult& r) {
    nlohmann::json j;
    j["version"] = subloc::kVersion;
    j["mode"] = cfg.mode;
    j["trials"] = static_cast<int>(r.records.size());
    j["mean_fraction"] = r.mean_fraction;
    j["stderr_fraction"] = r.stderr_fraction;
    j["exact_count"] = r.exact_count;
    j["failed_count"] = r.failed_count;
    j["budget_exceeded"] = r.budget_exceeded;
    return j;
}

int run_sweep_mode(const subloc::ExperimentConfig& cfg) {
    subloc::SweepResult r = subloc::run_sweep(cfg);
    std::cout << sweep_summary(cfg, r).dump(2) << '\n';
    return r.budget_exceeded ? 3 : 0;
}

// Per-iteration predicted scale under the configured variant, as a plain
// t,mu_hat table. A subcritical input is fine here: the trace simply
// stalls and the table shows where.
int run_se_mode(subloc::ExperimentConfig cfg) {
    subloc::validate_config(cfg);
    int d = cfg.d;
    if (d == 0) d = cfg.lambda > subloc::kInvE ? subloc::d_star(cfg.lambda) : 1;
    subloc::NonlinearitySchedule sched = subloc::build_schedule_horizon(
        cfg.lambda, d, cfg.t, subloc::variant_from_name(cfg.variant));

    std::ostringstream body;
    body.precision(17);
    body << "t,mu_hat\n";
    for (std::size_t t = 0; t < sched.mu_hat.size(); ++t) {
        body << t << ',' << sched.mu_hat[t] << '\n';
    }
    std::cout << body.str();
    if (!cfg.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        std::ofstream f(std::filesystem::path(cfg.out) / "se.csv");
        f << "# version=" << subloc::kVersion << '\n';
        f << "# config=" << subloc::config_to_json(cfg).dump() << '\n';
        f << body.str();
    }
    return 0;
}

// Transition constants by degree. --d caps the table (default 20, the
// precomputed table stops at 50).
int run_thresholds_mode(const subloc::ExperimentConfig& cfg) {
    int dmax = cfg.d > 0 ? std::min(cfg.d, 50) : 20;
    std::ostringstream body;
    body.precision(17);
    body << "d,a_star,lambda_star,a_excess,lambda_excess\n";
    for (const auto& row : subloc::threshold_table()) {
        if (row.d > dmax) break;
        body << row.d << ',' << row.a_star << ',' << row.lambda_star << ',' << row.a_excess
             << ',' << row.lambda_excess << '\n';
    }
    std::cout << body.str();
    if (!cfg.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        std::ofstream f(std::filesystem::path(cfg.out) / "thresholds.csv");
        f << "# version=" << subloc::kVersion << '\n';
        f << "# config=" << subloc::config_to_json(cfg).dump() << '\n';
        f << body.str();
    }
    return 0;
}

// Classifies a mu0 x rho grid of scaling regimes alongside the two
// boundary curves that fig1.csv tabulates.
void emit_phase_regions(const subloc::ExperimentConfig& cfg) {
    auto out = subloc::detail::open_plot_file(cfg, "phase_regions.csv");
    out << "mu0,rho,region\n";
    out.precision(17);
    const double mlo = 0.5, mhi = 40.0;
    const double rlo = std::log(1e-3), rhi = std::log(50.0);
    for (int i = 0; i < cfg.grid; ++i) {
        double mu0 = mlo + (mhi - mlo) * i / (cfg.grid - 1);
        for (int j = 0; j < cfg.grid; ++j) {
            double rho = std::exp(rlo + (rhi - rlo) * j / (cfg.grid - 1));
            out << mu0 << ',' << rho << ','
                << subloc::phase_region_name(subloc::phase_region(mu0, rho)) << '\n';
        }
    }
}

int run_limits_mode(subloc::ExperimentConfig cfg) {
    subloc::ThresholdReport rep;
    if (cfg.n1 > 0) {
        if (cfg.n2 <= 0 || cfg.K1 <= 0 || cfg.K2 <= 0) {
            throw subloc::Error("limits with --n1 needs --n2, --k1 and --k2");
        }
        if (cfg.mu <= 0.0) throw subloc::Error("rectangular limits need --mu");
        rep = subloc::bicluster_margins(cfg.n1, cfg.n2, cfg.K1, cfg.K2, cfg.mu);
    } else {
        subloc::validate_config(cfg);  // resolves lambda into mu
        rep = subloc::threshold_report(cfg.n, cfg.K, cfg.mu);
    }

    nlohmann::json j;
    j["version"] = subloc::kVersion;
    j["margins"] = nlohmann::json::array();
    for (const auto& [name, margin, ok] : rep.entries()) {
        j["margins"].push_back({{"name", name}, {"margin", margin}, {"ok", ok}});
    }
    if (rep.has_region) j["region"] = verdict_name(rep.region);
    std::cout << j.dump(2) << '\n';
    if (!cfg.out.empty()) {
        std::filesystem::create_directories(cfg.out);
        std::ofstream f(std::filesystem::path(cfg.out) / "limits.json");
        f << j.dump(2) << '\n';
    }
    return 0;
}

int run_ks_mode(const subloc::ExperimentConfig& cfg) {
    subloc::KsReport rep = subloc::ks_check(cfg);
    std::ostringstream body;
    body.precision(17);
    body << "t,mu_hat,avg_off,avg_on\n";
    for (const auto& row : rep.rows) {
        body << row.t << ',' << row.mu_hat << ',' << row.avg_off << ',' << row.avg_on << '\n';
    }
    std::cout << body.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    subloc::ExperimentConfig cfg;
    bool lambda_list_given = false;

    CLI::App app{"Submatrix localization experiments"};
    app.set_config("--config", "", "Read options from a key=value file");
    app.require_subcommand(1);

    app.add_option("--n", cfg.n, "Matrix size (principal model)");
    app.add_option("--k", cfg.K, "Planted support size");
    app.add_option("--n1", cfg.n1, "Row count (rectangular model)");
    app.add_option("--n2", cfg.n2, "Column count (rectangular model)");
    app.add_option("--k1", cfg.K1, "Planted row count");
    app.add_option("--k2", cfg.K2, "Planted column count");
    app.add_option("--mu", cfg.mu, "Signal strength");
    app.add_option("--lambda", cfg.lambda, "Effective signal-to-noise, alternative to --mu");
    app.add_option("--d", cfg.d, "Polynomial degree, 0 = automatic");
    app.add_option("--delta", cfg.delta, "Holdout fraction for the voting stage, 0 = off");
    app.add_option("--eps", cfg.epsilon, "Cleanup failure budget");
    app.add_option("--variant", cfg.variant, "Nonlinearity family: optimal, linear or affine");
    app.add_flag("--noiseless", cfg.noiseless, "Generate instances without noise");
    app.add_option("--trials", cfg.trials, "Number of Monte Carlo trials");
    app.add_option("--seed", cfg.seed, "Master seed");
    app.add_option("--out", cfg.out, "Output directory (default: stdout only)");
    app.add_option("--t", cfg.t, "Iteration horizon for se and ks-check");
    app.add_option("--grid", cfg.grid, "Grid resolution for plot data");
    app.add_option("--workers", cfg.workers, "Worker threads, 0 = hardware");
    app.add_option("--lambda-list", cfg.lambda_list, "Lambdas for Monte Carlo error curves")
        ->expected(-1);

    for (const std::string& mode : subloc::known_modes()) {
        auto* sub = app.add_subcommand(mode);
        sub->fallthrough();
    }
    app.get_subcommand("recover")->description("Generate, localize, report");
    app.get_subcommand("montecarlo")->description("Repeated recovery, aggregate error");
    app.get_subcommand("se")->description("Predicted belief scale per iteration");
    app.get_subcommand("thresholds")->description("Degree-by-degree transition constants");
    app.get_subcommand("boundary")->description("Divergence-region boundary tables");
    app.get_subcommand("phase-diagram")->description("Scaling-regime curves and region grid");
    app.get_subcommand("bicluster")->description("Rectangular-model recovery sweep");
    app.get_subcommand("limits")->description("Threshold margins for one parameter point");
    app.get_subcommand("ks-check")->description("Belief distribution vs Gaussian prediction");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    lambda_list_given = app.count("--lambda-list") > 0;
    cfg.mode = app.get_subcommands().front()->get_name();

    try {
        if (cfg.mode == "recover" || cfg.mode == "bicluster") {
            return run_sweep_mode(cfg);
        }
        if (cfg.mode == "montecarlo") {
            if (lambda_list_given) {
                subloc::emit_plot_data("error-curves", cfg);
                return 0;
            }
            return run_sweep_mode(cfg);
        }
        if (cfg.mode == "se") return run_se_mode(cfg);
        if (cfg.mode == "thresholds") return run_thresholds_mode(cfg);
        if (cfg.mode == "boundary") {
            subloc::emit_plot_data("regionG", cfg);
            subloc::emit_plot_data("Gd-boundaries", cfg);
            return 0;
        }
        if (cfg.mode == "phase-diagram") {
            subloc::emit_plot_data("fig1", cfg);
            emit_phase_regions(cfg);
            return 0;
        }
        if (cfg.mode == "limits") return run_limits_mode(cfg);
        return run_ks_mode(cfg);
    } catch (const subloc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
