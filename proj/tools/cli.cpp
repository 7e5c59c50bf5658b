#include "cli.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <ostream>

#include "fastop/bench.hpp"
#include "fastop/errors.hpp"
#include "fastop/verify.hpp"

namespace fastop::cli {

namespace {

int usage(std::ostream& err, const std::string& flag, const std::string& what) {
    err << "error: " << flag << ": " << what << '\n';
    return kExitUsage;
}

int run_bench(const bench::Scenario& s, const std::string& out_path, std::ostream& out, std::ostream& err) {
    try {
        bench::validate(s);
    } catch (const UnknownScenario& e) {
        return usage(err, "--scenario", e.what());
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        return usage(err, msg.find("repetitions") != std::string::npos ? "--reps" : "--sizes", msg);
    }
    std::vector<bench::BenchRecord> records;
    try {
        records = bench::run_scenario(s);
    } catch (const VerificationFailure& e) {
        err << "verification failed: " << e.what() << '\n';
        return kExitVerificationFailed;
    }
    try {
        bench::emit_csv(records, std::filesystem::path(out_path));
    } catch (const IoError& e) {
        return usage(err, "--out", e.what());
    }
    for (const auto& r : records) {
        out << s.name << " n=" << r.size << " structured_min=" << r.structured_min_s << "s";
        if (r.dense_min_s) {
            out << " dense_min=" << *r.dense_min_s << "s speedup=" << *r.dense_min_s / r.structured_min_s;
        } else {
            out << " dense=skipped";
        }
        out << '\n';
    }
    return kExitOk;
}

int run_verify(index_t max_size, std::ostream& out, std::ostream& err) {
    if (max_size < 4) return usage(err, "--max-size", "must be at least 4");
    const auto results = verify::run_verification(max_size);
    index_t failed = 0;
    for (const auto& r : results) {
        out << (r.passed ? "ok   " : "FAIL ") << std::left << std::setw(20) << r.label << ' ' << std::setw(18)
            << r.check << " error=" << r.error << " bound=" << r.bound << '\n';
        if (!r.passed) ++failed;
    }
    out << results.size() - failed << '/' << results.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structured linear operators: benchmarks and verification", "fastop"};
    app.require_subcommand(1);

    bench::Scenario scenario;
    std::string out_path;
    auto* bench_cmd = app.add_subcommand("bench", "Time a scenario against its dense baseline and write CSV");
    bench_cmd->add_option("--scenario", scenario.name, "Scenario name (see list-scenarios)")->required();
    bench_cmd->add_option("--sizes", scenario.sizes, "Comma-separated ascending sizes")
        ->required()
        ->delimiter(',');
    bench_cmd->add_option("--reps", scenario.repetitions, "Repetitions per size (>= 3)")->required();
    bench_cmd->add_option("--seed", scenario.seed, "Random seed")->required();
    bench_cmd->add_option("--out", out_path, "Output CSV path")->required();
    bench_cmd->add_option("--mem-cap-bytes", scenario.mem_cap_bytes, "Skip dense baselines above this size");

    app.add_subcommand("list-scenarios", "Print the scenario names");

    index_t max_size = 0;
    auto* verify_cmd = app.add_subcommand("verify", "Run the oracle and adjoint property suite");
    verify_cmd->add_option("--max-size", max_size, "Largest operator dimension")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (*bench_cmd) return run_bench(scenario, out_path, out, err);
    if (*verify_cmd) return run_verify(max_size, out, err);
    for (const auto& name : bench::scenario_names()) out << name << '\n';
    return kExitOk;
}

}  // namespace fastop::cli
