#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfbench/dataset.hpp"

namespace cfbench {

enum class OutputFormat { Csv, JsonLines, PrettyTable };

OutputFormat output_format_from_string(const std::string& s);

struct FoldMetrics {
    double rho = 0.0;
    std::map<int, double> precision;
    std::size_t rho_eligible = 0;
    std::size_t rho_excluded = 0;
    std::map<int, std::size_t> precision_eligible;
    std::map<int, std::size_t> precision_excluded;
};

// One audit row per (fold, user). Missing optionals mean the user was
// excluded from that aggregate.
struct PerUserRow {
    int fold = 0;
    EntityId user = 0;
    std::optional<double> rho;
    std::map<int, std::optional<double>> precision;
};

struct EvalReport {
    std::string method;
    std::string dataset;
    std::string protocol;
    std::uint64_t seed = 0;
    std::vector<int> ks;
    double spearman_rho = 0.0;               // mean of per-fold values
    std::map<int, double> precision_at;
    std::vector<FoldMetrics> per_fold;
    std::vector<PerUserRow> per_user;
    nlohmann::json config_echo;
};

// Scenario output: methods x datasets grid of metric cells, plus improvement
// rows computed from the cells at emission time.
struct ComparisonTable {
    struct Cell {
        double rho = 0.0;
        std::map<int, double> precision;
    };
    struct Improvement {
        std::string label;
        std::string baseline_method;
        std::string improved_method;
    };

    std::string scenario;
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    std::vector<int> ks;
    std::map<std::string, std::map<std::string, Cell>> cells;  // method -> dataset -> cell
    std::vector<Improvement> improvements;
    std::vector<std::string> notes;  // skipped rows and other remarks

    const Cell* cell(const std::string& method, const std::string& dataset) const;

    // (new - old) / old as a percentage rounded to one decimal, when both
    // cells exist.
    std::optional<double> improvement_percent(const Improvement& imp,
                                              const std::string& dataset,
                                              int metric_k /* 0 = rho */) const;
};

void emit_report(const EvalReport& report, OutputFormat format, std::ostream& out);
void emit_table(const ComparisonTable& table, OutputFormat format, std::ostream& out);

// `fold user rho p@k... flags` rows backing every aggregate value.
void write_per_user_dump(const EvalReport& report, std::ostream& out);

// Convenience: emit to a file path, throwing IoError on failure.
void emit_report_file(const EvalReport& report, OutputFormat format, const std::string& path);
void emit_table_file(const ComparisonTable& table, OutputFormat format, const std::string& path);

}  // namespace cfbench
