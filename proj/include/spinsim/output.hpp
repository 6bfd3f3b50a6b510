#pragma once

#include "spinsim/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spinsim {

/// Named column set, written as one CSV file.  Columns flagged as
/// probabilities are re-validated (sum 1 within 1e-10) at write time.
struct Table {
    std::string name;
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> columns;
    std::vector<std::string> probability_columns;

    void add_column(std::string col_name, std::vector<double> values,
                    bool is_probability = false);
    std::size_t n_rows() const;
};

struct Scalar {
    std::string name;
    double value = 0.0;
    std::optional<double> std_err;  // present for every stochastic scalar
};

/// One experiment's results: scalars plus tables, with free-form metadata
/// notes.  Timestamps never enter this record; they go to run_meta.json.
struct ResultRecord {
    std::vector<Scalar> scalars;
    std::vector<Table> tables;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_scalar(const std::string& name, double value);
    void add_scalar(const std::string& name, double value, double std_err);
    void add_note(const std::string& key, const std::string& text);
};

/// Writes `content` to path atomically (temp file in the same directory,
/// then rename).
void atomic_write(const std::string& path, const std::string& content);

/// CSV with a header row, LF endings, doubles at 17 significant digits.
std::string render_csv(const Table& table);

/// Serializes tables to <dir>/<name>.csv, scalars + config echo to
/// <dir>/result.json and wall-clock info to <dir>/run_meta.json.  All writes
/// are atomic; payload files are byte-deterministic for a fixed config.
void write_result(const std::string& dir, const ResultRecord& record,
                  const Config& config);

}  // namespace spinsim
