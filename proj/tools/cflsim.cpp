// cflsim: coded federated learning simulator.
//   simulate    — run one experiment from a config file, emit CSV + summary
//   verify-code — exhaustively/sampled check of the gradient-code identity
//   sweep-alpha — run the same experiment across alpha values (common seed)
//
// Exit codes: 0 success, 1 verification failure, 2 config/usage error
// (message names the field), 3 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfl/errors.hpp"
#include "cfl/gradcode.hpp"
#include "cfl/protocol.hpp"
#include "cfl/runconfig.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cfl::ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cfl::Error("cannot write '" + path + "'");
    out << text;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

struct SimulateArgs {
    std::string config_path;
    std::string scheme;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool latency_only = false;
    int workers = 0;
    int epochs = 0;
    int alpha = 0;
    std::string out_csv;
    std::string out_summary;
    std::string baseline_path;
    bool dump_config = false;
};

cfl::ConfigFile assemble(const SimulateArgs& a) {
    cfl::ConfigFile file;
    if (!a.config_path.empty()) file = cfl::load_config(a.config_path);
    cfl::RunConfig& cfg = file.run;
    if (!a.scheme.empty()) cfg.scheme = cfl::scheme_from_name(a.scheme);
    if (a.seed_set) cfg.seed = a.seed;
    if (a.latency_only) cfg.latency_only = true;
    if (a.workers > 0) cfg.workers = a.workers;
    if (a.epochs > 0) cfg.epochs = a.epochs;
    if (a.alpha > 0) cfg.alpha = a.alpha;
    if (!a.out_csv.empty()) file.out_csv = a.out_csv;
    if (!a.out_summary.empty()) file.out_summary = a.out_summary;
    if (!a.baseline_path.empty()) file.baseline_path = a.baseline_path;
    if (!file.baseline_path.empty()) cfg.baseline_csv = read_file(file.baseline_path);
    cfg.validate();
    return file;
}

int cmd_simulate(const SimulateArgs& a) {
    cfl::ConfigFile file = assemble(a);
    if (a.dump_config) {
        std::cout << cfl::config_to_json(file.run);
        return 0;
    }
    cfl::ExperimentResult res = cfl::run_experiment(file.run);
    if (!file.out_csv.empty()) {
        write_file(file.out_csv, res.csv);
        std::cout << res.summary;
    } else {
        std::cout << res.csv;
        std::cerr << res.summary;
    }
    if (!file.out_summary.empty()) write_file(file.out_summary, res.summary);
    return 0;
}

struct VerifyArgs {
    int D = 25;
    int alpha = 23;
    std::vector<int> spec{48, 24};
    double tol = 1e-3;
    bool exhaustive = false;
    long samples = 10000;
    std::string view = "quantized";
    std::uint64_t seed = 1;
};

int cmd_verify_code(const VerifyArgs& a) {
    cfl::FixedSpec spec{a.spec.at(0), a.spec.at(1)};
    spec.validate();
    cfl::Stream rng = cfl::substream(a.seed, "code");
    cfl::GradientCode code = cfl::build_code(a.D, a.alpha, rng, spec);
    cfl::BView view;
    if (a.view == "real")
        view = cfl::BView::Real;
    else if (a.view == "quantized")
        view = cfl::BView::Quantized;
    else
        throw cfl::ConfigError("--view: expected real or quantized");
    cfl::Stream vrng = cfl::substream(a.seed, "verify");
    const long exhaustive_limit = a.exhaustive ? std::numeric_limits<long>::max() : 100000;
    cfl::VerifyReport rep = cfl::verify_code(code, a.tol, view, vrng, exhaustive_limit, a.samples);
    std::cout << "D=" << a.D << " alpha=" << a.alpha << " view=" << a.view
              << " sets=" << rep.sets_tested << (rep.exhaustive ? " (exhaustive)" : " (sampled)")
              << "\nmax residual: " << fmt(rep.max_residual) << "  tol: " << fmt(a.tol)
              << "  failures: " << rep.failures << "\n";
    return rep.failures == 0 ? 0 : 1;
}

struct SweepArgs {
    std::string config_path;
    std::vector<int> alphas;
    std::vector<double> targets;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool latency_only = false;
    int workers = 0;
    int epochs = 0;
    std::string out_csv;
};

int cmd_sweep_alpha(const SweepArgs& a) {
    cfl::ConfigFile file;
    if (!a.config_path.empty()) file = cfl::load_config(a.config_path);
    cfl::RunConfig base = file.run;
    if (a.seed_set) base.seed = a.seed;
    if (a.latency_only) base.latency_only = true;
    if (a.workers > 0) base.workers = a.workers;
    if (a.epochs > 0) base.epochs = a.epochs;
    if (!a.targets.empty()) base.targets = a.targets;

    std::string csv = "alpha,target_acc,time_s\n";
    for (int alpha : a.alphas) {
        cfl::RunConfig cfg = base; // same seed for every alpha: common random numbers
        cfg.alpha = alpha;
        cfg.validate();
        cfl::ExperimentResult res = cfl::run_experiment(cfg);
        double epoch_mean = 0.0;
        if (!res.trajectory.empty())
            epoch_mean = (res.total_time_s - res.sharing_offset_s) /
                         static_cast<double>(res.trajectory.size());
        std::cout << "alpha=" << alpha << " offset_s=" << fmt(res.sharing_offset_s)
                  << " epoch_mean_s=" << fmt(epoch_mean) << " total_s=" << fmt(res.total_time_s)
                  << "\n";
        for (const auto& [target, secs] : res.time_to_target) {
            csv += std::to_string(alpha);
            csv += ',';
            csv += fmt(target);
            csv += ',';
            csv += (secs < 0.0) ? "DNF" : fmt(secs);
            csv += '\n';
        }
    }
    const std::string out = a.out_csv.empty() ? file.out_csv : a.out_csv;
    if (!out.empty())
        write_file(out, csv);
    else
        std::cout << csv;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coded federated learning simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "run one experiment");
    simulate->add_option("config", sim.config_path, "config file (JSON); defaults when omitted");
    simulate->add_option("--scheme", sim.scheme, "coded | conventional | conventional-drop");
    simulate->add_option("--seed", sim.seed, "root seed")->each([&](const std::string&) {
        sim.seed_set = true;
    });
    simulate->add_flag("--latency-only", sim.latency_only, "skip numerics, timing only");
    simulate->add_option("--workers", sim.workers, "worker threads for device math");
    simulate->add_option("--epochs", sim.epochs, "override epoch count");
    simulate->add_option("--alpha", sim.alpha, "override code parameter alpha");
    simulate->add_option("--out", sim.out_csv, "trajectory CSV path (default: stdout)");
    simulate->add_option("--summary-out", sim.out_summary, "summary path");
    simulate->add_option("--baseline", sim.baseline_path, "baseline trajectory CSV for speed-up");
    simulate->add_flag("--dump-config", sim.dump_config, "print the canonical config and exit");

    VerifyArgs ver;
    CLI::App* verify = app.add_subcommand("verify-code", "check the decode identity");
    verify->add_option("--D", ver.D, "number of devices")->check(CLI::PositiveNumber);
    verify->add_option("--alpha", ver.alpha, "code parameter")->check(CLI::PositiveNumber);
    verify->add_option("--spec", ver.spec, "fixed-point k f")->expected(2);
    verify->add_option("--tol", ver.tol, "max residual tolerance");
    verify->add_flag("--exhaustive", ver.exhaustive, "test every received set");
    verify->add_option("--samples", ver.samples, "sampled sets when not exhaustive");
    verify->add_option("--view", ver.view, "real | quantized");
    verify->add_option("--seed", ver.seed, "construction seed");

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep-alpha", "time-to-target across alphas");
    sweep_cmd->add_option("config", sweep.config_path, "config file (JSON); defaults when omitted");
    sweep_cmd->add_option("--alphas", sweep.alphas, "alpha values")->required()->delimiter(',');
    sweep_cmd->add_option("--target-acc", sweep.targets, "target accuracies")->delimiter(',');
    sweep_cmd->add_option("--seed", sweep.seed, "root seed")->each([&](const std::string&) {
        sweep.seed_set = true;
    });
    sweep_cmd->add_flag("--latency-only", sweep.latency_only, "skip numerics, timing only");
    sweep_cmd->add_option("--workers", sweep.workers, "worker threads");
    sweep_cmd->add_option("--epochs", sweep.epochs, "override epoch count");
    sweep_cmd->add_option("--out", sweep.out_csv, "sweep CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (verify->parsed()) return cmd_verify_code(ver);
        if (sweep_cmd->parsed()) return cmd_sweep_alpha(sweep);
        return 2;
    } catch (const cfl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const cfl::DimensionError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
