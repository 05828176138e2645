#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace qrm {

/// Sampled observables on a common axis plus free-form provenance.
///
/// NaN entries mark masked points and are written as empty CSV fields.
struct TimeSeries {
    std::string axis = "t";
    std::vector<double> time;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    nlohmann::json metadata = nlohmann::json::object();

    std::size_t size() const { return time.size(); }

    /// Adds an empty column and returns its index.
    std::size_t add_column(const std::string& name);
    std::size_t column_index(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
    std::vector<double>& column(const std::string& name);
    bool has_column(const std::string& name) const;

    /// Header row, then one row per sample. Provenance goes in leading
    /// '#' comment lines.
    void write_csv(const std::string& path) const;
    nlohmann::json to_json() const;
};

TimeSeries read_csv(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);

} // namespace qrm
