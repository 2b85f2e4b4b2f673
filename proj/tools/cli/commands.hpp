#pragma once

#include <optional>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

#include "report.hpp"

namespace ksol::cli {

struct RunConfig {
    std::string command;
    int n = 0;
    int k = 0;
    std::optional<double> rho;
    double theta = 0.0;
    double alpha = 1.0;  // u(0)
    double rtol = 1e-10;
    double atol = 1e-12;
    std::optional<double> s_max;
    std::string out;     // empty: standard output
    std::string format;  // empty: the command's default
    std::string config_file;

    // portrait
    int grid = 25;
    int orbits = 5;
    std::optional<double> z_max;

    // sweep
    std::vector<double> rhos;
    std::string rho_range;  // lo:hi:count
    std::vector<double> alphas;
    int jobs = 1;

    // verify
    bool inject_perturbation = false;
};

// Raised for bad combinations the parser cannot see; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json config_json(const RunConfig& cfg);
SolveOptions solve_options(const RunConfig& cfg, double default_s_max);

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_portrait(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_profile(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace ksol::cli
