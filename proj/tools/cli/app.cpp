#include "app.hpp"

#include <cstdlib>
#include <utility>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ksol/errors.hpp"

namespace ksol::cli {

namespace {

int default_jobs() {
    const char* env = std::getenv("KSOL_JOBS");
    if (!env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    return (end != env && *end == '\0' && v >= 1 && v <= 1024) ? static_cast<int>(v) : 1;
}

void add_common(CLI::App& app, RunConfig& cfg) {
    app.add_option("--n", cfg.n, "Dimension")->required()->check(CLI::Range(3, 64));
    app.add_option("--k", cfg.k, "Order of sigma_k")->required()->check(CLI::PositiveNumber);
    app.add_option("--rho", cfg.rho, "Soliton constant rho");
    app.add_option("--theta", cfg.theta, "Soliton constant theta")->required();
    app.add_option("--alpha", cfg.alpha, "Center value u(0)")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--rtol", cfg.rtol, "Integrator relative tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--atol", cfg.atol, "Integrator absolute tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--s-max", cfg.s_max, "End of the integration in s")->check(CLI::PositiveNumber);
    app.add_option("--out", cfg.out, "Output file (standard output when omitted)");
    app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    cfg.jobs = default_jobs();

    CLI::App app{"Rotationally symmetric k-Yamabe gradient soliton lab", "ksol"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value file; flags override it")->check(CLI::ExistingFile);
    add_common(app, cfg);
    app.fallthrough();

    auto* classify = app.add_subcommand("classify", "Classify the origin orbit and report rates, residuals and monitors");
    auto* portrait = app.add_subcommand("portrait", "Vector field, nullclines, critical points and sample orbits as CSV");
    portrait->add_option("--grid", cfg.grid, "Field samples per axis")->capture_default_str();
    portrait->add_option("--orbits", cfg.orbits, "Number of orbits, the first from the origin")->capture_default_str();
    portrait->add_option("--z-max", cfg.z_max, "Top of the plotted rectangle");
    auto* profile = app.add_subcommand("profile", "Radial profile u(r) as CSV with a JSON residual sidecar");
    auto* verify = app.add_subcommand("verify", "Run every check on one parameter set; exit 1 on failure");
    verify->add_flag("--inject-perturbation", cfg.inject_perturbation)->group("");
    auto* sweep = app.add_subcommand("sweep", "Classify over a grid of rho and alpha");
    sweep->add_option("--rhos", cfg.rhos, "Comma-separated rho values")->delimiter(',');
    sweep->add_option("--rho-range", cfg.rho_range, "lo:hi:count");
    sweep->add_option("--alphas", cfg.alphas, "Comma-separated center values")->delimiter(',')->check(CLI::PositiveNumber);
    sweep->add_option("--jobs", cfg.jobs, "Worker threads (default from KSOL_JOBS)")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }
    if (auto* opt = app.get_option("--config"); opt->count() > 0) cfg.config_file = opt->as<std::string>();

    using Command = int (*)(const RunConfig&, std::ostream&, std::ostream&);
    const std::pair<CLI::App*, Command> commands[] = {
        {classify, cmd_classify}, {portrait, cmd_portrait}, {profile, cmd_profile}, {verify, cmd_verify}, {sweep, cmd_sweep}};
    try {
        for (const auto& [sub, command] : commands) {
            if (!sub->parsed()) continue;
            cfg.command = sub->get_name();
            return command(cfg, out, err);
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ParameterError& e) {
        err << "parameter error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"ksol"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ksol::cli
