#include "spinsim/output.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace spinsim {

namespace fs = std::filesystem;

void Table::add_column(std::string col_name, std::vector<double> values,
                       bool is_probability) {
    if (!columns.empty() && values.size() != columns.front().size())
        throw std::invalid_argument("table '" + name + "': ragged column '" +
                                    col_name + "'");
    if (is_probability) probability_columns.push_back(col_name);
    column_names.push_back(std::move(col_name));
    columns.push_back(std::move(values));
}

std::size_t Table::n_rows() const {
    return columns.empty() ? 0 : columns.front().size();
}

void ResultRecord::add_scalar(const std::string& name, double value) {
    scalars.push_back({name, value, std::nullopt});
}

void ResultRecord::add_scalar(const std::string& name, double value,
                              double std_err) {
    scalars.push_back({name, value, std_err});
}

void ResultRecord::add_note(const std::string& key, const std::string& text) {
    metadata.emplace_back(key, text);
}

void atomic_write(const std::string& path, const std::string& content) {
    const fs::path target(path);
    fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void validate_probability_columns(const Table& t) {
    for (const auto& pc : t.probability_columns) {
        for (std::size_t i = 0; i < t.column_names.size(); ++i) {
            if (t.column_names[i] != pc) continue;
            double sum = 0.0;
            for (double v : t.columns[i]) sum += v;
            if (std::abs(sum - 1.0) > 1e-10)
                throw std::runtime_error("table '" + t.name + "': probability column '" +
                                         pc + "' sums to " + format_double(sum));
        }
    }
}

}  // namespace

std::string render_csv(const Table& table) {
    validate_probability_columns(table);
    std::ostringstream out;
    for (std::size_t i = 0; i < table.column_names.size(); ++i) {
        if (i) out << ',';
        out << table.column_names[i];
    }
    out << '\n';
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) out << ',';
            out << format_double(table.columns[c][r]);
        }
        out << '\n';
    }
    return out.str();
}

void write_result(const std::string& dir, const ResultRecord& record,
                  const Config& config) {
    fs::create_directories(dir);
    for (const auto& t : record.tables)
        atomic_write((fs::path(dir) / (t.name + ".csv")).string(), render_csv(t));

    nlohmann::ordered_json j;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.entries()) cfg[k] = v;
    j["config"] = cfg;
    nlohmann::ordered_json scalars = nlohmann::ordered_json::object();
    for (const auto& s : record.scalars) {
        nlohmann::ordered_json entry;
        entry["value"] = s.value;
        if (s.std_err) entry["std_err"] = *s.std_err;
        scalars[s.name] = entry;
    }
    j["scalars"] = scalars;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : record.metadata) meta[k] = v;
    j["metadata"] = meta;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& t : record.tables) files.push_back(t.name + ".csv");
    j["tables"] = files;
    atomic_write((fs::path(dir) / "result.json").string(), j.dump(2) + "\n");

    nlohmann::ordered_json meta_file;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    meta_file["unix_time_ns"] =
        std::chrono::duration_cast<std::chrono::nanoseconds>(now).count();
    atomic_write((fs::path(dir) / "run_meta.json").string(),
                 meta_file.dump(2) + "\n");
}

}  // namespace spinsim
