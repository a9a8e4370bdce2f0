#pragma once

/**
 * @file table_io.hpp
 * @brief CSV + JSON sidecar serialization of convergence tables.
 *
 * CSV columns: resolution,error_L2,order_L2,error_H1,order_H1. Errors are
 * printed as 3.995E-03, orders with three decimals, and a missing order as
 * "--". The sidecar keeps full-precision values, the effective configuration
 * and the theoretical orders.
 */

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fnrd/io.hpp"
#include "fnrd/study.hpp"

namespace fnrd {

inline std::string format_error(std::optional<double> e)
{
    if (!e) {
        return "failed";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3E", *e);
    return buf;
}

inline std::string format_order(std::optional<double> q)
{
    if (!q) {
        return "--";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *q);
    return buf;
}

inline constexpr const char* kTableHeader = "resolution,error_L2,order_L2,error_H1,order_H1";

inline void write_csv(std::ostream& os, const ConvergenceTable& table)
{
    os << kTableHeader << '\n';
    for (const auto& row : table.rows) {
        os << row.label << ',' << format_error(row.error_l2) << ',' << format_order(row.order_l2) << ','
           << format_error(row.error_h1) << ',' << format_order(row.order_h1) << '\n';
    }
}

inline json rates_to_json(const RateRecord& r)
{
    return json{{"spatial_L2", r.spatial_l2},
                {"spatial_H1", r.spatial_h1},
                {"temporal", r.temporal},
                {"first_step_L2", r.first_step_l2},
                {"first_step_H1", r.first_step_h1}};
}

inline json table_to_json(const ConvergenceTable& table)
{
    auto opt = [](std::optional<double> v) { return v ? json(*v) : json(nullptr); };
    json rows = json::array();
    for (const auto& row : table.rows) {
        rows.push_back({{"label", row.label},
                        {"resolution", row.resolution},
                        {"error_L2", opt(row.error_l2)},
                        {"order_L2", opt(row.order_l2)},
                        {"error_H1", opt(row.error_h1)},
                        {"order_H1", opt(row.order_h1)},
                        {"failed", row.failed},
                        {"failure", row.failure}});
    }
    return json{{"protocol", table.protocol},
                {"datum", table.datum},
                {"config", table.config},
                {"config_hash", table.config_hash},
                {"theoretical_orders", table.theory ? rates_to_json(*table.theory) : json(nullptr)},
                {"monotone", table.monotone},
                {"build", kBuildDescribe},
                {"rows", rows}};
}

inline ConvergenceTable table_from_json(const json& j)
{
    auto opt = [](const json& v) { return v.is_null() ? std::optional<double>{} : std::optional<double>{v.get<double>()}; };
    ConvergenceTable t;
    try {
        t.protocol = j.at("protocol").get<std::string>();
        t.datum = j.at("datum").get<std::string>();
        t.config = j.at("config");
        t.config_hash = j.at("config_hash").get<std::string>();
        t.monotone = j.at("monotone").get<bool>();
        if (const json& th = j.at("theoretical_orders"); !th.is_null()) {
            t.theory = RateRecord{th.at("spatial_L2").get<double>(), th.at("spatial_H1").get<double>(),
                                  th.at("temporal").get<double>(), th.at("first_step_L2").get<double>(),
                                  th.at("first_step_H1").get<double>()};
        }
        for (const json& r : j.at("rows")) {
            ConvergenceRow row;
            row.label = r.at("label").get<std::string>();
            row.resolution = r.at("resolution").get<double>();
            row.error_l2 = opt(r.at("error_L2"));
            row.order_l2 = opt(r.at("order_L2"));
            row.error_h1 = opt(r.at("error_H1"));
            row.order_h1 = opt(r.at("order_H1"));
            row.failed = r.at("failed").get<bool>();
            row.failure = r.at("failure").get<std::string>();
            t.rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed table sidecar: ") + e.what());
    }
    return t;
}

struct TableFiles {
    fs::path csv;
    fs::path sidecar;
};

/// Writes <dir>/<stem>.csv and <dir>/<stem>.json; stem defaults to
/// "<protocol>_<datum>".
inline TableFiles write_table(const ConvergenceTable& table, const fs::path& dir, std::string stem = {})
{
    if (stem.empty()) {
        stem = table.protocol + "_" + table.datum;
    }
    try {
        fs::create_directories(dir);
    } catch (const fs::filesystem_error& e) {
        throw ConfigError("cannot create output directory '" + dir.string() + "': " + e.what());
    }
    TableFiles files{dir / (stem + ".csv"), dir / (stem + ".json")};
    atomic_write(files.csv, [&](std::ostream& os) { write_csv(os, table); });
    write_json_file(files.sidecar, table_to_json(table));
    return files;
}

inline std::optional<double> parse_cell(const std::string& cell)
{
    if (cell == "--" || cell == "failed") {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) {
            throw ConfigError("bad numeric cell '" + cell + "'");
        }
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("bad numeric cell '" + cell + "'");
    }
}

/// Rows of a CSV written by write_csv, at the printed precision.
inline std::vector<ConvergenceRow> parse_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != kTableHeader) {
        throw ConfigError("table CSV: unexpected header '" + line + "'");
    }
    std::vector<ConvergenceRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 5) {
            throw ConfigError("table CSV: expected 5 columns in '" + line + "'");
        }
        ConvergenceRow row;
        row.label = cells[0];
        row.error_l2 = parse_cell(cells[1]);
        row.order_l2 = parse_cell(cells[2]);
        row.error_h1 = parse_cell(cells[3]);
        row.order_h1 = parse_cell(cells[4]);
        row.failed = cells[1] == "failed";
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<ConvergenceRow> read_csv_file(const fs::path& path)
{
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    return parse_csv(is);
}

inline ConvergenceTable read_table(const fs::path& sidecar) { return table_from_json(read_json_file(sidecar)); }

}  // namespace fnrd
