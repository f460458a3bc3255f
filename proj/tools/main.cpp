#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fhinf/manifest.hpp"
#include "fhinf/model_json.hpp"
#include "fhinf/sdpa_io.hpp"
#include "fhinf/simulation.hpp"
#include "fhinf/synthesis.hpp"
#include "fhinf/verification.hpp"
#include "fhinf/version.hpp"

namespace {

using namespace fhinf;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

int verbosity() {
    const char* v = std::getenv("FHINF_VERBOSE");
    return v ? std::atoi(v) : 0;
}

double elapsed(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) {
    return json(v).dump();
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string piece;
    while (std::getline(stream, piece, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(piece, &used));
            if (used != piece.size()) {
                throw std::invalid_argument(piece);
            }
        } catch (const std::exception&) {
            throw std::runtime_error(flag + ": expected comma-separated numbers, got '" + text +
                                     "'");
        }
    }
    if (values.empty()) {
        throw std::runtime_error(flag + ": empty list");
    }
    return values;
}

DelayRateTerm parse_delay_rate(const std::string& name) {
    return name == "plain" ? DelayRateTerm::Plain : DelayRateTerm::Rho;
}

SlackStructure parse_slack(const std::string& name) {
    return name == "block" ? SlackStructure::BlockDiagonal : SlackStructure::Full;
}

std::string settings_json(const SynthesisSettings& s) {
    json j = {{"h", s.h},
              {"rho", s.rho},
              {"omega", s.omega},
              {"gamma", s.gamma},
              {"theorem", s.theorem},
              {"delay_rate_term", to_string(s.delay_rate)},
              {"slack", to_string(s.slack)}};
    return j.dump();
}

void write_filter_atomic(const std::string& path, const FilterFile& file) {
    const std::string temp = path + ".tmp";
    save_filter(temp, file);
    std::filesystem::rename(temp, path);
}

struct SynthFlags {
    std::string model_path;
    std::string output = "filter.json";
    std::string manifest_path;
    double h = 0.0;
    double rho = 0.0;
    double omega = 2.0;
    double gamma = 1.0;
    int theorem = 2;
    std::string delay_rate = "rho";
    std::string slack = "full";
    std::string bounds_domain;
    bool h_given = false;
    bool rho_given = false;
};

// Shared flag block for commands that assemble a synthesis problem.  The
// subcommands use "--help" only, freeing "--h" for the delay bound.
void add_synth_flags(CLI::App* cmd, SynthFlags& f, bool with_gamma) {
    cmd->set_help_flag("--help", "print help");
    cmd->add_option("--model", f.model_path, "model JSON file")->required();
    cmd->add_option("--h", f.h, "delay bound (default: model file)");
    cmd->add_option("--rho", f.rho, "delay rate bound (default: model file)");
    cmd->add_option("--omega", f.omega, "tuning scalar in the kernel completion block");
    if (with_gamma) {
        cmd->add_option("--gamma", f.gamma, "attenuation level to test");
    }
    cmd->add_option("--theorem", f.theorem, "synthesis condition variant")
        ->check(CLI::IsMember({1, 2}));
    cmd->add_option("--delay-rate-term", f.delay_rate,
                    "delayed-block weight: plain (-Y) or rho (-(1-rho)Y)")
        ->check(CLI::IsMember({"plain", "rho"}));
    cmd->add_option("--slack", f.slack, "slack matrix structure for the membership-aware variant")
        ->check(CLI::IsMember({"full", "block"}));
    cmd->add_option("--bounds-domain", f.bounds_domain,
                    "premise range lo,hi for the derived membership product bounds");
}

SynthesisSettings to_settings(const SynthFlags& f, const TsDelayModel& model) {
    SynthesisSettings s;
    s.h = f.h_given ? f.h : model.delay.h;
    s.rho = f.rho_given ? f.rho : model.delay.rho;
    s.omega = f.omega;
    s.gamma = f.gamma;
    s.theorem = f.theorem;
    s.delay_rate = parse_delay_rate(f.delay_rate);
    s.slack = parse_slack(f.slack);
    s.solver.verbose = verbosity() > 1;
    if (!f.bounds_domain.empty()) {
        const std::vector<double> d = parse_list(f.bounds_domain, "--bounds-domain");
        if (d.size() != 2 || !(d[0] < d[1])) {
            throw std::runtime_error("--bounds-domain: expected lo,hi with lo < hi");
        }
        s.bounds = membership_product_bounds(model, d[0], d[1], 10001);
        s.have_bounds = true;
    }
    return s;
}

void record_settings(RunManifest& man, const SynthFlags& f, const SynthesisSettings& s) {
    man.parameters["h"] = num(s.h);
    man.parameters["rho"] = num(s.rho);
    man.parameters["omega"] = num(s.omega);
    man.parameters["theorem"] = std::to_string(s.theorem);
    man.parameters["delay_rate_term"] = to_string(s.delay_rate);
    man.parameters["slack"] = to_string(s.slack);
    man.parameters["bounds_domain"] = f.bounds_domain.empty() ? "default" : f.bounds_domain;
}

std::string manifest_target(const std::string& explicit_path, const std::string& primary) {
    return explicit_path.empty() ? primary + ".manifest.json" : explicit_path;
}

int run_synth(const SynthFlags& f) {
    const auto start = Clock::now();
    RunManifest man;
    man.command = "synth";
    man.version = kVersion;
    const TsDelayModel model = load_model(f.model_path);
    man.add_input(f.model_path);
    const SynthesisSettings settings = to_settings(f, model);
    record_settings(man, f, settings);
    man.parameters["gamma"] = num(settings.gamma);

    const SynthesisResult result = synthesize(model, settings);
    if (result.status == SolveStatus::Feasible) {
        FilterFile file;
        file.gamma = result.gamma;
        file.filter = result.filter;
        file.certificate = "feasible";
        file.settings_json = settings_json(settings);
        write_filter_atomic(f.output, file);
        man.add_output(f.output);
        man.wall_time = elapsed(start);
        write_manifest(man, manifest_target(f.manifest_path, f.output));
        std::cout << "status: feasible\n"
                  << "gamma: " << result.gamma << "\n"
                  << "worst_margin: " << result.worst_margin << "\n"
                  << "filter: " << f.output << "\n";
        return 0;
    }
    man.wall_time = elapsed(start);
    write_manifest(man, manifest_target(f.manifest_path, f.output));
    std::cout << "status: " << to_string(result.status) << "\n"
              << "gamma: " << settings.gamma << "\n"
              << "detail: " << result.report.message << "\n";
    return result.status == SolveStatus::Infeasible ? 2 : 3;
}

struct GammaMinFlags {
    SynthFlags synth;
    std::string h_list;
    std::string omega_list;
    std::string output = "gamma_min.json";
    std::string emit_prefix;
    double lo = 1e-3;
    double hi = 10.0;
    double tol = 5e-3;
    bool grid = false;
};

int run_gamma_min(const GammaMinFlags& f) {
    const auto start = Clock::now();
    RunManifest man;
    man.command = "gamma-min";
    man.version = kVersion;
    const TsDelayModel model = load_model(f.synth.model_path);
    man.add_input(f.synth.model_path);

    SynthesisSettings base = to_settings(f.synth, model);
    const std::vector<double> hs =
        f.h_list.empty() ? std::vector<double>{base.h} : parse_list(f.h_list, "--h");
    const std::vector<double> omegas =
        f.omega_list.empty() ? std::vector<double>{base.omega} : parse_list(f.omega_list, "--omega");
    record_settings(man, f.synth, base);
    man.parameters["h"] = f.h_list.empty() ? num(base.h) : f.h_list;
    man.parameters["omega"] = f.omega_list.empty() ? num(base.omega) : f.omega_list;
    man.parameters["lo"] = num(f.lo);
    man.parameters["hi"] = num(f.hi);
    man.parameters["tol"] = num(f.tol);

    // The membership product bounds depend only on the model; share them.
    if (!base.have_bounds) {
        base.bounds = default_product_bounds(model);
        base.have_bounds = true;
    }

    json cells = json::array();
    bool all_found = true;
    std::printf("gamma_star, theorem %d, rho = %g, delay-rate term %s\n", base.theorem, base.rho,
                to_string(base.delay_rate));
    std::printf("%-10s", "omega \\ h");
    for (double h : hs) {
        std::printf(" %8g", h);
    }
    std::printf("\n");
    for (double omega : omegas) {
        std::printf("%-10g", omega);
        for (double h : hs) {
            SynthesisSettings s = base;
            s.h = h;
            s.omega = omega;
            if (verbosity() > 0) {
                std::cerr << "[gamma-min] cell omega=" << omega << " h=" << h << "\n";
            }
            const GammaMinResult cell = gamma_min(model, s, f.lo, f.hi, f.tol);
            json probes = json::array();
            for (const GammaProbe& p : cell.log.probes) {
                probes.push_back({{"gamma", p.gamma},
                                  {"status", to_string(p.status)},
                                  {"wall_time_seconds", p.wall_time}});
            }
            cells.push_back({{"omega", omega},
                             {"h", h},
                             {"found", cell.found},
                             {"gamma_star", cell.gamma_star},
                             {"probes", probes}});
            if (cell.found) {
                std::printf(" %8.3f", cell.gamma_star);
                if (!f.emit_prefix.empty()) {
                    char name[128];
                    std::snprintf(name, sizeof(name), "%s_w%g_h%g.json", f.emit_prefix.c_str(),
                                  omega, h);
                    FilterFile file;
                    file.gamma = cell.gamma_star;
                    file.filter = cell.at_star.filter;
                    file.certificate = "feasible";
                    SynthesisSettings emitted = s;
                    emitted.gamma = cell.gamma_star;
                    file.settings_json = settings_json(emitted);
                    write_filter_atomic(name, file);
                    man.add_output(name);
                }
            } else {
                std::printf(" %8s", "-");
                all_found = false;
            }
            std::fflush(stdout);
        }
        std::printf("\n");
    }

    json table = {{"theorem", base.theorem},
                  {"rho", base.rho},
                  {"delay_rate_term", to_string(base.delay_rate)},
                  {"slack", to_string(base.slack)},
                  {"tolerance", f.tol},
                  {"cells", cells}};
    write_text_atomic(f.output, table.dump(2) + "\n");
    man.add_output(f.output);
    man.wall_time = elapsed(start);
    write_manifest(man, manifest_target(f.synth.manifest_path, f.output));
    return all_found ? 0 : 2;
}

struct SimulateFlags {
    std::string model_path;
    std::string filter_path;
    std::string disturbance = "decaying_sine";
    std::string phi = "zero";
    std::uint64_t seed = 0;
    double t_final = 30.0;
    double dt = 0.0;
    double h = 0.0;
    double rho = 0.0;
    bool h_given = false;
    bool rho_given = false;
    bool gain = false;
    std::string csv_path = "trajectory.csv";
    std::string summary_path = "summary.json";
    std::string manifest_path;
};

int run_simulate(const SimulateFlags& f) {
    const auto start = Clock::now();
    RunManifest man;
    man.command = "simulate";
    man.version = kVersion;
    const TsDelayModel model = load_model(f.model_path);
    man.add_input(f.model_path);
    const FilterFile filter_file = load_filter(f.filter_path);
    man.add_input(f.filter_path);

    double h = model.delay.h;
    double rho = model.delay.rho;
    if (!filter_file.settings_json.empty()) {
        const json s = json::parse(filter_file.settings_json);
        h = s.value("h", h);
        rho = s.value("rho", rho);
    }
    if (f.h_given) {
        h = f.h;
    }
    if (f.rho_given) {
        rho = f.rho;
    }

    SimConfig config;
    config.t_final = f.t_final;
    config.dt = f.dt;
    config.delay = make_delay_sine(h, rho, 0.1 * h);
    config.disturbance = make_disturbance(f.disturbance, f.seed);
    if (f.phi == "random") {
        Rng rng(f.seed);
        Vector phi = rng.uniform_vector(model.n, -1.0, 1.0);
        config.phi = phi / phi.norm();
    } else {
        config.phi = Vector::Zero(model.n);
    }

    man.parameters["disturbance"] = f.disturbance;
    man.parameters["phi"] = f.phi;
    man.parameters["seed"] = std::to_string(f.seed);
    man.parameters["t_final"] = num(config.t_final);
    man.parameters["h"] = num(h);
    man.parameters["rho"] = num(rho);

    const SimResult result = simulate_filtering(model, filter_file.filter, config);

    const std::string temp_csv = f.csv_path + ".tmp";
    write_csv(result, temp_csv);
    std::filesystem::rename(temp_csv, f.csv_path);
    man.add_output(f.csv_path);

    json summary;
    summary["certified_gamma"] = filter_file.gamma;
    summary["t_final"] = result.time[result.time.size() - 1];
    summary["dt"] = result.config.dt;
    summary["divergent"] = result.divergent;
    summary["terminal_norm"] = result.states.col(result.states.cols() - 1).norm();
    summary["error_energy"] = result.int_e2[result.int_e2.size() - 1];
    summary["disturbance_energy"] = result.int_w2[result.int_w2.size() - 1];
    const bool has_energy = result.int_w2[result.int_w2.size() - 1] > 0.0;
    if (f.gain && !has_energy) {
        throw std::runtime_error("--gain requires a disturbance with nonzero energy");
    }
    if (has_energy) {
        summary["empirical_ratio"] = l2_gain_estimate(result);
    }
    write_text_atomic(f.summary_path, summary.dump(2) + "\n");
    man.add_output(f.summary_path);
    man.wall_time = elapsed(start);
    write_manifest(man, manifest_target(f.manifest_path, f.summary_path));

    std::cout << summary.dump(2) << "\n";
    return result.divergent ? 2 : 0;
}

struct VerifyFlags {
    int trials = 1000;
    std::uint64_t seed = 1;
    double corrupt_lambda = 0.0;
    std::string output;
    std::string manifest_path;
};

int run_verify(const VerifyFlags& f) {
    const auto start = Clock::now();
    const VerificationReport report = run_verification(f.trials, f.seed, f.corrupt_lambda);
    std::cout << "trials: " << report.trials << "\n"
              << "min_margin: " << report.min_margin << "\n"
              << "quadrature_max_dev: " << report.quadrature_max_dev << "\n"
              << "max_lambda_diff: " << report.max_lambda_diff << "\n"
              << "integral_inequality: " << (report.lemma_ok ? "ok" : "FAIL") << "\n"
              << "kernel_identity: " << (report.lambda_ok ? "ok" : "FAIL") << "\n";
    if (!report.lemma_ok) {
        std::cout << "worst_instance_seed: " << report.worst_instance_seed << "\n";
    }
    if (!f.output.empty()) {
        RunManifest man;
        man.command = "verify";
        man.version = kVersion;
        man.parameters["trials"] = std::to_string(f.trials);
        man.parameters["seed"] = std::to_string(f.seed);
        json j = {{"trials", report.trials},
                  {"min_margin", report.min_margin},
                  {"worst_instance_seed", report.worst_instance_seed},
                  {"quadrature_max_dev", report.quadrature_max_dev},
                  {"max_lambda_diff", report.max_lambda_diff},
                  {"tight_margin", report.tight_margin},
                  {"random_margin", report.random_margin},
                  {"ok", report.ok}};
        write_text_atomic(f.output, j.dump(2) + "\n");
        man.add_output(f.output);
        man.wall_time = elapsed(start);
        write_manifest(man, manifest_target(f.manifest_path, f.output));
    }
    return report.ok ? 0 : 2;
}

struct ExportFlags {
    SynthFlags synth;
    std::string output = "problem.dat-s";
};

int run_export(const ExportFlags& f) {
    const auto start = Clock::now();
    RunManifest man;
    man.command = "export-sdpa";
    man.version = kVersion;
    const TsDelayModel model = load_model(f.synth.model_path);
    man.add_input(f.synth.model_path);
    const SynthesisSettings s = to_settings(f.synth, model);
    record_settings(man, f.synth, s);
    man.parameters["gamma"] = num(s.gamma);

    SynthesisLmiOptions options;
    options.h = s.h;
    options.rho = s.rho;
    options.omega = s.omega;
    options.gamma = s.gamma;
    options.delay_rate = s.delay_rate;
    LmiProblem problem;
    if (s.theorem == 1) {
        problem = build_theorem1(model, options);
    } else {
        problem = build_theorem2(model, options,
                                 s.have_bounds ? s.bounds : default_product_bounds(model), s.slack);
    }
    const SdpFeasibilityProblem sdp = canonicalize(problem);
    write_text_atomic(f.output, export_sdpa(sdp));
    man.add_output(f.output);
    man.wall_time = elapsed(start);
    write_manifest(man, manifest_target(f.synth.manifest_path, f.output));

    int total_dim = 0;
    for (const SdpBlock& b : sdp.blocks) {
        total_dim += b.dim;
    }
    std::cout << "scalars: " << sdp.d << "\n"
              << "blocks: " << sdp.blocks.size() << "\n"
              << "total_block_dim: " << total_dim << "\n"
              << "file: " << f.output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fuzzy H-infinity filter synthesis for Takagi-Sugeno systems with "
                 "time-varying delay"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(fhinf::kVersion));

    SynthFlags synth_flags;
    CLI::App* synth = app.add_subcommand("synth", "solve the synthesis condition at a fixed gamma");
    add_synth_flags(synth, synth_flags, true);
    synth->add_option("--output", synth_flags.output, "filter JSON output path");
    synth->add_option("--manifest", synth_flags.manifest_path, "manifest output path");

    GammaMinFlags gm_flags;
    CLI::App* gm = app.add_subcommand("gamma-min", "bisect for the minimum attenuation level");
    gm->set_help_flag("--help", "print help");
    gm->add_option("--model", gm_flags.synth.model_path, "model JSON file")->required();
    auto* gm_h = gm->add_option("--h", gm_flags.h_list, "delay bound, or comma-separated list");
    gm->add_option("--rho", gm_flags.synth.rho, "delay rate bound (default: model file)");
    auto* gm_w =
        gm->add_option("--omega", gm_flags.omega_list, "tuning scalar, or comma-separated list");
    gm->add_option("--theorem", gm_flags.synth.theorem, "synthesis condition variant")
        ->check(CLI::IsMember({1, 2}));
    gm->add_option("--delay-rate-term", gm_flags.synth.delay_rate,
                   "delayed-block weight: plain (-Y) or rho (-(1-rho)Y)")
        ->check(CLI::IsMember({"plain", "rho"}));
    gm->add_option("--slack", gm_flags.synth.slack, "slack matrix structure")
        ->check(CLI::IsMember({"full", "block"}));
    gm->add_option("--bounds-domain", gm_flags.synth.bounds_domain,
                   "premise range lo,hi for the derived membership product bounds");
    gm->add_flag("--grid", gm_flags.grid, "treat --h/--omega lists as a full grid (implied)");
    gm->add_option("--lo", gm_flags.lo, "bisection lower bracket");
    gm->add_option("--hi", gm_flags.hi, "bisection upper bracket");
    gm->add_option("--tol", gm_flags.tol, "bisection tolerance");
    gm->add_option("--output", gm_flags.output, "search log / table JSON path");
    gm->add_option("--emit-filters", gm_flags.emit_prefix,
                   "also write one filter JSON per grid cell with this path prefix");
    gm->add_option("--manifest", gm_flags.synth.manifest_path, "manifest output path");

    SimulateFlags sim_flags;
    CLI::App* sim = app.add_subcommand("simulate", "integrate the coupled filtering system");
    sim->set_help_flag("--help", "print help");
    sim->add_option("--model", sim_flags.model_path, "model JSON file")->required();
    sim->add_option("--filter", sim_flags.filter_path, "filter JSON file")->required();
    sim->add_option("--disturbance", sim_flags.disturbance, "disturbance family")
        ->check(CLI::IsMember({"zero", "pulse", "decaying_sine", "seeded_noise"}));
    sim->add_option("--phi", sim_flags.phi, "initial plant history: zero or random unit vector")
        ->check(CLI::IsMember({"zero", "random"}));
    sim->add_option("--seed", sim_flags.seed, "seed for random phi / seeded noise");
    sim->add_option("--t-final", sim_flags.t_final, "simulation horizon");
    sim->add_option("--dt", sim_flags.dt, "integration step (default h/100)");
    auto* sim_h = sim->add_option("--h", sim_flags.h, "delay bound override");
    auto* sim_rho = sim->add_option("--rho", sim_flags.rho, "delay rate override");
    sim->add_flag("--gain", sim_flags.gain, "require and report the empirical gain ratio");
    sim->add_option("--output", sim_flags.csv_path, "trajectory CSV path");
    sim->add_option("--summary", sim_flags.summary_path, "summary JSON path");
    sim->add_option("--manifest", sim_flags.manifest_path, "manifest output path");

    VerifyFlags verify_flags;
    CLI::App* verify = app.add_subcommand("verify", "run the numerical verification suites");
    verify->add_option("--trials", verify_flags.trials, "Monte-Carlo trial count")
        ->check(CLI::PositiveNumber);
    verify->add_option("--seed", verify_flags.seed, "Monte-Carlo seed");
    verify->add_option("--corrupt-lambda", verify_flags.corrupt_lambda,
                       "perturb the kernel grid (negative-control hook)")
        ->group("");
    verify->add_option("--output", verify_flags.output, "report JSON path");
    verify->add_option("--manifest", verify_flags.manifest_path, "manifest output path");

    ExportFlags export_flags;
    CLI::App* exp = app.add_subcommand("export-sdpa", "dump the assembled problem as .dat-s");
    add_synth_flags(exp, export_flags.synth, true);
    exp->add_option("--output", export_flags.output, ".dat-s output path");
    exp->add_option("--manifest", export_flags.synth.manifest_path, "manifest output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(synth)) {
            synth_flags.h_given = synth->count("--h") > 0;
            synth_flags.rho_given = synth->count("--rho") > 0;
            return run_synth(synth_flags);
        }
        if (app.got_subcommand(gm)) {
            gm_flags.synth.h_given = false;
            gm_flags.synth.rho_given = gm->count("--rho") > 0;
            (void)gm_h;
            (void)gm_w;
            return run_gamma_min(gm_flags);
        }
        if (app.got_subcommand(sim)) {
            sim_flags.h_given = sim_h->count() > 0;
            sim_flags.rho_given = sim_rho->count() > 0;
            return run_simulate(sim_flags);
        }
        if (app.got_subcommand(verify)) {
            return run_verify(verify_flags);
        }
        if (app.got_subcommand(exp)) {
            export_flags.synth.h_given = exp->count("--h") > 0;
            export_flags.synth.rho_given = exp->count("--rho") > 0;
            return run_export(export_flags);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
