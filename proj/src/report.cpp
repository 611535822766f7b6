#include "cfbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace cfbench {

namespace {

// Metrics are printed with three decimals, matching the reference tables.
std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// Improvement percentages carry one decimal, the rounding they were
// computed with.
std::string fmt1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string csv_header(const std::vector<int>& ks) {
    std::string h = "method,dataset,rho";
    for (int k : ks) h += ",p@" + std::to_string(k);
    return h;
}

}  // namespace

OutputFormat output_format_from_string(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "jsonl" || s == "json-lines") return OutputFormat::JsonLines;
    if (s == "pretty" || s == "pretty-table") return OutputFormat::PrettyTable;
    throw ConfigError("unknown output format '" + s + "'");
}

const ComparisonTable::Cell* ComparisonTable::cell(const std::string& method,
                                                   const std::string& dataset) const {
    auto mi = cells.find(method);
    if (mi == cells.end()) return nullptr;
    auto di = mi->second.find(dataset);
    if (di == mi->second.end()) return nullptr;
    return &di->second;
}

std::optional<double> ComparisonTable::improvement_percent(const Improvement& imp,
                                                           const std::string& dataset,
                                                           int metric_k) const {
    const Cell* oldc = cell(imp.baseline_method, dataset);
    const Cell* newc = cell(imp.improved_method, dataset);
    if (!oldc || !newc) return std::nullopt;
    double ov, nv;
    if (metric_k == 0) {
        ov = oldc->rho;
        nv = newc->rho;
    } else {
        auto oi = oldc->precision.find(metric_k);
        auto ni = newc->precision.find(metric_k);
        if (oi == oldc->precision.end() || ni == newc->precision.end()) return std::nullopt;
        ov = oi->second;
        nv = ni->second;
    }
    if (ov == 0.0) return std::nullopt;
    return std::round((nv - ov) / ov * 1000.0) / 10.0;
}

void emit_report(const EvalReport& report, OutputFormat format, std::ostream& out) {
    switch (format) {
        case OutputFormat::Csv: {
            out << csv_header(report.ks) << "\n";
            out << report.method << ',' << report.dataset << ',' << fmt3(report.spearman_rho);
            for (int k : report.ks) out << ',' << fmt3(report.precision_at.at(k));
            out << "\n";
            for (std::size_t f = 0; f < report.per_fold.size(); ++f) {
                const FoldMetrics& fm = report.per_fold[f];
                out << report.method << ',' << report.dataset << "/fold" << f << ','
                    << fmt3(fm.rho);
                for (int k : report.ks) out << ',' << fmt3(fm.precision.at(k));
                out << "\n";
            }
            break;
        }
        case OutputFormat::JsonLines: {
            nlohmann::json j;
            j["method"] = report.method;
            j["dataset"] = report.dataset;
            j["protocol"] = report.protocol;
            j["seed"] = report.seed;
            j["spearman_rho"] = report.spearman_rho;
            for (int k : report.ks)
                j["precision_at"][std::to_string(k)] = report.precision_at.at(k);
            j["config"] = report.config_echo;
            out << j.dump() << "\n";
            for (std::size_t f = 0; f < report.per_fold.size(); ++f) {
                const FoldMetrics& fm = report.per_fold[f];
                nlohmann::json jf;
                jf["method"] = report.method;
                jf["dataset"] = report.dataset;
                jf["fold"] = f;
                jf["spearman_rho"] = fm.rho;
                jf["rho_eligible"] = fm.rho_eligible;
                jf["rho_excluded"] = fm.rho_excluded;
                for (int k : report.ks) {
                    const std::string ks = std::to_string(k);
                    jf["precision_at"][ks] = fm.precision.at(k);
                    jf["precision_eligible"][ks] = fm.precision_eligible.at(k);
                    jf["precision_excluded"][ks] = fm.precision_excluded.at(k);
                }
                out << jf.dump() << "\n";
            }
            break;
        }
        case OutputFormat::PrettyTable: {
            out << report.method << " on " << report.dataset << " (" << report.protocol
                << ", seed " << report.seed << ")\n";
            out << "  fold        rho";
            for (int k : report.ks) out << "      p@" << k;
            out << "\n";
            for (std::size_t f = 0; f < report.per_fold.size(); ++f) {
                const FoldMetrics& fm = report.per_fold[f];
                out << "  " << std::left << std::setw(8) << f << std::right << fmt3(fm.rho);
                for (int k : report.ks) out << "    " << fmt3(fm.precision.at(k));
                out << "\n";
            }
            out << "  " << std::left << std::setw(8) << "mean" << std::right
                << fmt3(report.spearman_rho);
            for (int k : report.ks) out << "    " << fmt3(report.precision_at.at(k));
            out << "\n";
            break;
        }
    }
}

void emit_table(const ComparisonTable& table, OutputFormat format, std::ostream& out) {
    switch (format) {
        case OutputFormat::Csv: {
            out << csv_header(table.ks) << "\n";
            for (const std::string& m : table.methods) {
                for (const std::string& d : table.datasets) {
                    const ComparisonTable::Cell* c = table.cell(m, d);
                    if (!c) continue;
                    out << m << ',' << d << ',' << fmt3(c->rho);
                    for (int k : table.ks) out << ',' << fmt3(c->precision.at(k));
                    out << "\n";
                }
            }
            for (const auto& imp : table.improvements) {
                for (const std::string& d : table.datasets) {
                    auto rho = table.improvement_percent(imp, d, 0);
                    if (!rho) continue;
                    out << imp.label << ',' << d << ',' << fmt1(*rho);
                    for (int k : table.ks) {
                        auto p = table.improvement_percent(imp, d, k);
                        out << ',' << (p ? fmt1(*p) : std::string("NA"));
                    }
                    out << "\n";
                }
            }
            break;
        }
        case OutputFormat::JsonLines: {
            for (const std::string& m : table.methods) {
                for (const std::string& d : table.datasets) {
                    const ComparisonTable::Cell* c = table.cell(m, d);
                    if (!c) continue;
                    nlohmann::json j;
                    j["scenario"] = table.scenario;
                    j["method"] = m;
                    j["dataset"] = d;
                    j["spearman_rho"] = c->rho;
                    for (int k : table.ks)
                        j["precision_at"][std::to_string(k)] = c->precision.at(k);
                    out << j.dump() << "\n";
                }
            }
            for (const auto& imp : table.improvements) {
                for (const std::string& d : table.datasets) {
                    auto rho = table.improvement_percent(imp, d, 0);
                    if (!rho) continue;
                    nlohmann::json j;
                    j["scenario"] = table.scenario;
                    j["improvement"] = imp.label;
                    j["baseline"] = imp.baseline_method;
                    j["improved"] = imp.improved_method;
                    j["dataset"] = d;
                    j["rho_percent"] = *rho;
                    for (int k : table.ks) {
                        auto p = table.improvement_percent(imp, d, k);
                        if (p) j["precision_percent"][std::to_string(k)] = *p;
                    }
                    out << j.dump() << "\n";
                }
            }
            for (const std::string& note : table.notes) {
                nlohmann::json j;
                j["scenario"] = table.scenario;
                j["note"] = note;
                out << j.dump() << "\n";
            }
            break;
        }
        case OutputFormat::PrettyTable: {
            out << "scenario: " << table.scenario << "\n";
            std::ostringstream header;
            header << std::left << std::setw(28) << "method" << std::setw(16) << "dataset"
                   << std::right << std::setw(8) << "rho";
            for (int k : table.ks) header << std::setw(8) << ("p@" + std::to_string(k));
            out << header.str() << "\n";
            for (const std::string& m : table.methods) {
                for (const std::string& d : table.datasets) {
                    const ComparisonTable::Cell* c = table.cell(m, d);
                    if (!c) continue;
                    out << std::left << std::setw(28) << m << std::setw(16) << d << std::right
                        << std::setw(8) << fmt3(c->rho);
                    for (int k : table.ks) out << std::setw(8) << fmt3(c->precision.at(k));
                    out << "\n";
                }
            }
            for (const auto& imp : table.improvements) {
                for (const std::string& d : table.datasets) {
                    auto rho = table.improvement_percent(imp, d, 0);
                    if (!rho) continue;
                    out << std::left << std::setw(28) << imp.label << std::setw(16) << d
                        << std::right << std::setw(7) << fmt1(*rho) << "%";
                    for (int k : table.ks) {
                        auto p = table.improvement_percent(imp, d, k);
                        if (p)
                            out << std::setw(7) << fmt1(*p) << "%";
                        else
                            out << std::setw(8) << "NA";
                    }
                    out << "\n";
                }
            }
            for (const std::string& note : table.notes) out << "note: " << note << "\n";
            break;
        }
    }
}

void write_per_user_dump(const EvalReport& report, std::ostream& out) {
    out << "fold user rho";
    for (int k : report.ks) out << " p@" << k;
    out << " flags\n";
    for (const PerUserRow& row : report.per_user) {
        out << row.fold << ' ' << row.user << ' ';
        char buf[40];
        if (row.rho) {
            std::snprintf(buf, sizeof buf, "%.17g", *row.rho);
            out << buf;
        } else {
            out << "NA";
        }
        std::string flags;
        if (!row.rho) flags += "rho_excluded";
        for (int k : report.ks) {
            auto it = row.precision.find(k);
            out << ' ';
            if (it != row.precision.end() && it->second) {
                std::snprintf(buf, sizeof buf, "%.17g", *it->second);
                out << buf;
            } else {
                out << "NA";
                if (!flags.empty()) flags += ",";
                flags += "p@" + std::to_string(k) + "_excluded";
            }
        }
        out << ' ' << (flags.empty() ? "-" : flags) << "\n";
    }
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

}  // namespace

void emit_report_file(const EvalReport& report, OutputFormat format, const std::string& path) {
    auto out = open_out(path);
    emit_report(report, format, out);
}

void emit_table_file(const ComparisonTable& table, OutputFormat format, const std::string& path) {
    auto out = open_out(path);
    emit_table(table, format, out);
}

}  // namespace cfbench
