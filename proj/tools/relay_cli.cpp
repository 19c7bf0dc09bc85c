#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relay/relay.hpp"

namespace {

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw relay::parse_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw relay::parse_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw relay::parse_error("failed writing '" + path + "'");
}

relay::JointDensity load_density(const std::string& path) {
    return relay::density_from_json_text(read_file(path));
}

relay::JointDensity load_valid_density(const std::string& path) {
    auto density = load_density(path);
    if (auto violations = relay::validate(density); !violations.empty())
        throw relay::contract_error("invalid density: " + violations.front());
    return density;
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw relay::parse_error(std::string("cannot parse ") + what +
                                     " value '" + item + "'");
        }
    }
    if (values.empty())
        throw relay::parse_error(std::string("empty ") + what + " list");
    return values;
}

// Accepts "lo:hi:step" or a comma-separated list of switch times.
std::vector<double> parse_tau_grid(const std::string& text) {
    if (text.find(':') == std::string::npos)
        return parse_number_list(text, "--tau-grid");
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3)
        throw relay::parse_error("--tau-grid range form is lo:hi:step");
    const double lo = parse_number_list(parts[0], "--tau-grid")[0];
    const double hi = parse_number_list(parts[1], "--tau-grid")[0];
    const double step = parse_number_list(parts[2], "--tau-grid")[0];
    if (!(step > 0.0) || !(hi >= lo))
        throw relay::parse_error("--tau-grid range needs lo <= hi and step > 0");
    std::vector<double> values;
    for (double t = lo; t <= hi + 0.5 * step; t += step)
        values.push_back(std::min(t, hi));
    return values;
}

relay::PartitionSpec parse_partition(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw relay::parse_error(
            "--partition must look like uniform:NX,NY or quantile:NX,NY");
    const std::string kind = text.substr(0, colon);
    relay::PartitionSpec spec;
    if (kind == "uniform")
        spec.kind = relay::PartitionSpec::Kind::uniform;
    else if (kind == "quantile")
        spec.kind = relay::PartitionSpec::Kind::quantile;
    else
        throw relay::parse_error("unknown partition strategy '" + kind + "'");
    const auto counts = parse_number_list(text.substr(colon + 1), "--partition");
    if (counts.size() != 2)
        throw relay::parse_error("--partition needs exactly NX,NY");
    spec.nx = int(counts[0]);
    spec.ny = int(counts[1]);
    if (spec.nx < 1 || spec.ny < 1 || counts[0] != spec.nx || counts[1] != spec.ny)
        throw relay::parse_error("--partition cell counts must be positive integers");
    return spec;
}

relay::ExecutorConfig executor_config_from_manifest(const std::string& text) {
    relay::ExecutorConfig cfg;
    const auto j = nlohmann::json::parse(text);
    if (j.contains("profile_cap_seconds"))
        cfg.profile_cap = j.at("profile_cap_seconds").get<double>();
    return cfg;
}

void warn_on_dominance(const relay::TimingSamples& samples) {
    if (const auto dominant = relay::dominance_check(samples))
        std::cerr << "note: algorithm " << *dominant
                  << " is at least as fast on every sample; switching cannot "
                     "improve on running it alone\n";
}

int cmd_validate(const std::string& density_path, const std::string& output) {
    const auto density = load_density(density_path);
    const auto violations = relay::validate(density);
    std::string report;
    for (const auto& v : violations) report += v + "\n";
    if (violations.empty()) report = "valid\n";
    write_output(output, report);
    return violations.empty() ? 0 : 1;
}

int cmd_curve(const std::string& density_path, const std::string& grid_text,
              double tolerance, std::optional<std::uint64_t> seed,
              std::optional<std::size_t> samples, const std::string& output) {
    const auto density = load_valid_density(density_path);
    const auto taus = parse_tau_grid(grid_text);
    relay::EtConfig cfg;
    cfg.abs_tol = tolerance;
    std::vector<relay::CurvePoint> points;
    points.reserve(taus.size());
    if (samples) {
        if (!seed)
            throw relay::contract_error(
                "--seed is required when sampling a curve");
        for (double tau : taus)
            points.push_back(
                {tau, relay::et_monte_carlo(density, relay::Schedule{{tau}},
                                            *samples, *seed)});
    } else {
        for (double tau : taus) points.push_back({tau, relay::et(density, tau, cfg)});
    }
    std::ostringstream out;
    relay::curve_to_csv(out, points);
    write_output(output, out.str());
    return 0;
}

int cmd_optimize(const std::string& density_path,
                 const std::string& timings_path, double tolerance,
                 bool tolerance_given, const std::string& output) {
    const auto density = load_valid_density(density_path);
    if (!timings_path.empty()) {
        std::istringstream in(read_file(timings_path));
        warn_on_dominance(relay::timings_from_csv(in));
    }
    relay::OptimizationReport report;
    if (const auto* box = std::get_if<relay::BoxDensity>(&density)) {
        report = relay::optimize_box(*box);
    } else {
        relay::ScanConfig cfg;
        cfg.et.abs_tol = tolerance;
        if (tolerance_given) cfg.refine_tol = tolerance;
        report = relay::optimize_scan(density, std::nullopt, cfg);
    }
    write_output(output, relay::report_to_json(report) + "\n");
    std::cerr << relay::report_to_text(report);
    return 0;
}

int cmd_fit(const std::string& timings_path, const std::string& partition_text,
            const std::string& output) {
    std::istringstream in(read_file(timings_path));
    const auto samples = relay::timings_from_csv(in);
    if (samples.pairs.empty())
        throw relay::degenerate_data_error("no timing samples to fit");
    relay::validate(samples);
    warn_on_dominance(samples);
    const auto spec = parse_partition(partition_text);
    const auto partition = relay::auto_partition(samples, spec);
    const auto density = relay::fit_k(partition, samples);
    const auto counts = relay::count_membership(partition, samples);
    write_output(output, relay::density_to_json(relay::JointDensity{density}) + "\n");
    std::cerr << "samples        : " << samples.pairs.size() << "\n"
              << "partition cells: " << partition.boxes.size() << "\n"
              << "occupied cells : " << density.boxes.size() << "\n"
              << "log-likelihood : "
              << relay::fmt12(relay::log_likelihood(density, samples)) << "\n";
    return 0;
}

int cmd_simulate(const std::string& density_path, const std::string& tau_text,
                 std::size_t samples, std::uint64_t seed,
                 const std::string& output) {
    const auto density = load_valid_density(density_path);
    relay::Schedule schedule{parse_number_list(tau_text, "--tau")};
    const auto result = relay::et_monte_carlo(density, schedule, samples, seed);
    write_output(output, relay::et_result_to_json(result) + "\n");
    return 0;
}

int cmd_profile(const std::string& manifest_path, const std::string& output) {
    const std::string text = read_file(manifest_path);
    const auto manifest = relay::manifest_from_json_text(text);
    if (manifest.tasks.empty())
        throw relay::degenerate_data_error("manifest lists no tasks");
    const auto portfolio = relay::portfolio_from_manifest(manifest);
    const auto result =
        relay::profile(portfolio, manifest.tasks, executor_config_from_manifest(text));
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::ostringstream out;
    if (portfolio.size() == 2) {
        relay::timings_to_csv(out, result.task_ids, result.samples);
    } else {
        out << "task_id";
        for (std::size_t i = 1; i <= portfolio.size(); ++i) out << ",t" << i;
        out << "\n";
        for (std::size_t r = 0; r < result.task_ids.size(); ++r) {
            out << result.task_ids[r];
            for (double t : result.times[r]) out << "," << relay::fmt12(t);
            out << "\n";
        }
    }
    write_output(output, out.str());
    return 0;
}

int cmd_run(const std::string& manifest_path, const std::string& tau_text,
            const std::string& output) {
    const std::string text = read_file(manifest_path);
    const auto manifest = relay::manifest_from_json_text(text);
    if (manifest.tasks.empty())
        throw relay::degenerate_data_error("manifest lists no tasks");
    const auto portfolio = relay::portfolio_from_manifest(manifest);
    relay::Schedule schedule;
    if (!tau_text.empty()) schedule.budgets = parse_number_list(tau_text, "--tau");
    std::ostringstream out;
    out << "[\n";
    for (std::size_t i = 0; i < manifest.tasks.size(); ++i) {
        const auto record = relay::run_derived(portfolio, schedule, manifest.tasks[i]);
        out << relay::run_record_to_json(record, 2)
            << (i + 1 < manifest.tasks.size() ? ",\n" : "\n");
    }
    out << "]\n";
    write_output(output, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Builds, analyzes, and runs derived algorithms: run the first "
        "candidate up to a switch time, abandon it, move to the next."};
    app.require_subcommand(1);

    std::string density_path, timings_path, manifest_path;
    std::string tau_text, tau_grid_text, partition_text = "uniform:4,4";
    std::string output = "-";
    double tolerance = 1e-6;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;

    auto* validate_cmd = app.add_subcommand("validate", "Check a density spec");
    validate_cmd->add_option("--density", density_path, "density spec JSON")
        ->required();
    validate_cmd->add_option("--output", output, "report destination");

    auto* curve_cmd =
        app.add_subcommand("curve", "Expected time over a grid of switch times");
    curve_cmd->add_option("--density", density_path)->required();
    curve_cmd->add_option("--tau-grid", tau_grid_text,
                          "lo:hi:step or comma-separated switch times")
        ->required();
    curve_cmd->add_option("--tolerance", tolerance);
    auto* curve_samples = curve_cmd->add_option(
        "--samples", samples, "sample the curve instead of integrating");
    auto* curve_seed = curve_cmd->add_option("--seed", seed);
    curve_samples->needs(curve_seed);
    curve_cmd->add_option("--output", output);

    auto* optimize_cmd =
        app.add_subcommand("optimize", "Best switch time for a density");
    optimize_cmd->add_option("--density", density_path)->required();
    optimize_cmd->add_option("--timings", timings_path,
                             "timing CSV for a dominance warning");
    auto* opt_tol = optimize_cmd->add_option("--tolerance", tolerance);
    optimize_cmd->add_option("--output", output);

    auto* fit_cmd = app.add_subcommand("fit", "Fit a step density to timings");
    fit_cmd->add_option("--timings", timings_path, "CSV task_id,t1,t2")
        ->required();
    fit_cmd->add_option("--partition", partition_text,
                        "uniform:NX,NY or quantile:NX,NY");
    fit_cmd->add_option("--output", output);

    auto* simulate_cmd =
        app.add_subcommand("simulate", "Monte Carlo expected time");
    simulate_cmd->add_option("--density", density_path)->required();
    simulate_cmd->add_option("--tau", tau_text, "comma-separated switch times")
        ->required();
    simulate_cmd->add_option("--samples", samples);
    simulate_cmd->add_option("--seed", seed)->required();
    simulate_cmd->add_option("--output", output);

    auto* profile_cmd =
        app.add_subcommand("profile", "Time every candidate on every task");
    profile_cmd->add_option("manifest", manifest_path, "portfolio manifest JSON")
        ->required();
    profile_cmd->add_option("--output", output);

    auto* run_cmd =
        app.add_subcommand("run", "Run the derived algorithm on manifest tasks");
    run_cmd->add_option("manifest", manifest_path, "portfolio manifest JSON")
        ->required();
    run_cmd->add_option("--tau", tau_text, "comma-separated switch times");
    run_cmd->add_option("--output", output);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(validate_cmd))
            return cmd_validate(density_path, output);
        if (app.got_subcommand(curve_cmd))
            return cmd_curve(density_path, tau_grid_text, tolerance,
                             curve_seed->count() ? std::optional(seed) : std::nullopt,
                             curve_samples->count() ? std::optional(samples)
                                                    : std::nullopt,
                             output);
        if (app.got_subcommand(optimize_cmd))
            return cmd_optimize(density_path, timings_path, tolerance,
                                opt_tol->count() > 0, output);
        if (app.got_subcommand(fit_cmd))
            return cmd_fit(timings_path, partition_text, output);
        if (app.got_subcommand(simulate_cmd))
            return cmd_simulate(density_path, tau_text, samples, seed, output);
        if (app.got_subcommand(profile_cmd))
            return cmd_profile(manifest_path, output);
        if (app.got_subcommand(run_cmd))
            return cmd_run(manifest_path, tau_text, output);
    } catch (const relay::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const relay::stage_failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
