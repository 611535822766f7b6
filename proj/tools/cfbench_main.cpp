#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "cfbench/experiment.hpp"
#include "cfbench/report.hpp"

namespace fs = std::filesystem;
using namespace cfbench;

namespace {

std::string data_dir_or_env(const std::string& cli_value) {
    if (!cli_value.empty()) return cli_value;
    if (const char* env = std::getenv("CFBENCH_DATA_DIR")) return env;
    return "data";
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int threads) {
    ExperimentConfig cfg = load_config_file(config_path);
    if (threads > 0) cfg.threads = threads;
    EvalReport report = run_experiment(cfg);

    fs::create_directories(out_dir);
    const std::string base =
        (fs::path(out_dir) / (report.method + "_" + report.dataset)).string();
    emit_report_file(report, OutputFormat::Csv, base + ".csv");
    emit_report_file(report, OutputFormat::JsonLines, base + ".jsonl");
    std::ofstream dump(base + "_users.txt");
    if (!dump) throw IoError("cannot write " + base + "_users.txt");
    write_per_user_dump(report, dump);

    emit_report(report, OutputFormat::PrettyTable, std::cout);
    std::cout << "wrote " << base << ".{csv,jsonl,_users.txt}\n";
    return 0;
}

int cmd_scenario(const std::string& name, const std::string& data_dir,
                 const std::string& out_dir, std::uint64_t seed, bool large, int threads) {
    ComparisonTable table = run_scenario(name, data_dir, out_dir, seed, large, threads);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        const std::string base = (fs::path(out_dir) / ("table_" + name)).string();
        emit_table_file(table, OutputFormat::Csv, base + ".csv");
        emit_table_file(table, OutputFormat::JsonLines, base + ".jsonl");
        emit_table_file(table, OutputFormat::PrettyTable, base + ".txt");
    }
    emit_table(table, OutputFormat::PrettyTable, std::cout);
    return 0;
}

// Key -> metric columns of a long-format table CSV.
std::map<std::string, std::vector<std::pair<std::string, double>>> read_table_csv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty file");
    std::vector<std::string> header;
    {
        std::istringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) header.push_back(col);
    }
    if (header.size() < 3 || header[0] != "method" || header[1] != "dataset")
        throw ParseError(path, 1, "expected header method,dataset,<metrics...>");

    std::map<std::string, std::vector<std::pair<std::string, double>>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size())
            throw ParseError(path, line_no, "row width does not match header");
        std::vector<std::pair<std::string, double>> metrics;
        for (std::size_t c = 2; c < cells.size(); ++c) {
            if (cells[c] == "NA") continue;
            metrics.emplace_back(header[c], std::stod(cells[c]));
        }
        rows[cells[0] + "," + cells[1]] = std::move(metrics);
    }
    return rows;
}

int cmd_verify(const std::string& table_path, const std::string& against_path, double tol) {
    auto got = read_table_csv(table_path);
    auto want = read_table_csv(against_path);

    double max_diff = 0.0;
    std::size_t compared = 0, failures = 0;
    for (const auto& [key, metrics] : want) {
        auto it = got.find(key);
        if (it == got.end()) {
            std::cout << "MISSING " << key << "\n";
            ++failures;
            continue;
        }
        std::map<std::string, double> have(it->second.begin(), it->second.end());
        for (const auto& [metric, value] : metrics) {
            auto hv = have.find(metric);
            if (hv == have.end()) continue;
            const double diff = std::abs(hv->second - value);
            max_diff = std::max(max_diff, diff);
            ++compared;
            if (diff > tol) {
                std::cout << "FAIL " << key << " " << metric << ": " << hv->second
                          << " vs " << value << " (diff " << diff << " > " << tol << ")\n";
                ++failures;
            }
        }
    }
    std::cout << "compared " << compared << " cells, max diff " << max_diff << ", tolerance "
              << tol << "\n";
    if (failures) {
        std::cout << failures << " mismatches\n";
        return 1;
    }
    std::cout << "OK\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collaborative-filtering benchmark: matrix factorization vs random walk"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run one experiment from a config file");
    std::string config_path, run_out = "out";
    int run_threads = 0;
    run->add_option("--config", config_path, "experiment config (json)")->required();
    run->add_option("--out", run_out, "output directory");
    run->add_option("--threads", run_threads, "worker threads (0 = all cores)");

    auto* scen = app.add_subcommand("scenario", "run a comparison scenario");
    std::string scen_name, scen_data, scen_out = "out";
    std::uint64_t scen_seed = 42;
    bool large = false;
    int scen_threads = 0;
    scen->add_option("--name", scen_name, "one of: explicit, implicit, bias, side, cold_start")
        ->required();
    scen->add_option("--data", scen_data, "data directory (default $CFBENCH_DATA_DIR or ./data)");
    scen->add_option("--out", scen_out, "output directory");
    scen->add_option("--seed", scen_seed, "master seed");
    scen->add_flag("--large", large, "include the large epinions runs");
    scen->add_option("--threads", scen_threads, "worker threads (0 = all cores)");

    auto* verify = app.add_subcommand("verify", "compare two table CSVs within a tolerance");
    std::string table_path, against_path;
    double tol = 0.05;
    verify->add_option("--table", table_path, "produced table csv")->required();
    verify->add_option("--against", against_path, "reference table csv")->required();
    verify->add_option("--tol", tol, "absolute tolerance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, run_out, run_threads);
        if (scen->parsed())
            return cmd_scenario(scen_name, data_dir_or_env(scen_data), scen_out, scen_seed,
                                large, scen_threads);
        if (verify->parsed()) return cmd_verify(table_path, against_path, tol);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
