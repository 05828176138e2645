#include "qrm/timeseries.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qrm/errors.hpp"

namespace qrm {

namespace {

std::string format_double(double v)
{
    if (std::isnan(v))
        return {};
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

} // namespace

std::size_t TimeSeries::add_column(const std::string& name)
{
    names.push_back(name);
    columns.emplace_back();
    columns.back().reserve(time.capacity());
    return names.size() - 1;
}

std::size_t TimeSeries::column_index(const std::string& name) const
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name)
            return i;
    fail(ErrorKind::InvalidArgument, "no column named '" + name + "'");
}

bool TimeSeries::has_column(const std::string& name) const
{
    for (const auto& n : names)
        if (n == name)
            return true;
    return false;
}

const std::vector<double>& TimeSeries::column(const std::string& name) const
{
    return columns[column_index(name)];
}

std::vector<double>& TimeSeries::column(const std::string& name)
{
    return columns[column_index(name)];
}

void TimeSeries::write_csv(const std::string& path) const
{
    std::ofstream out(path);
    if (!out)
        fail(ErrorKind::IoError, "cannot open " + path + " for writing");
    if (!metadata.empty())
        out << "# " << metadata.dump() << '\n';
    out << axis;
    for (const auto& n : names)
        out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < time.size(); ++i) {
        out << format_double(time[i]);
        for (const auto& col : columns)
            out << ',' << (i < col.size() ? format_double(col[i]) : std::string{});
        out << '\n';
    }
    if (!out)
        fail(ErrorKind::IoError, "write failed for " + path);
}

nlohmann::json TimeSeries::to_json() const
{
    nlohmann::json j;
    j["axis"] = axis;
    j["time"] = time;
    nlohmann::json cols = nlohmann::json::object();
    for (std::size_t i = 0; i < names.size(); ++i) {
        nlohmann::json c = nlohmann::json::array();
        for (double v : columns[i])
            c.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
        cols[names[i]] = std::move(c);
    }
    j["columns"] = std::move(cols);
    j["metadata"] = metadata;
    return j;
}

TimeSeries read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::IoError, "cannot open " + path);
    TimeSeries ts;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line[0] == '#') {
            if (!header)
                ts.metadata = nlohmann::json::parse(line.substr(1), nullptr, false);
            continue;
        }
        auto cells = split_row(line);
        if (!header) {
            ts.axis = cells.at(0);
            for (std::size_t i = 1; i < cells.size(); ++i)
                ts.add_column(cells[i]);
            header = true;
            continue;
        }
        ts.time.push_back(std::stod(cells.at(0)));
        for (std::size_t i = 0; i < ts.columns.size(); ++i) {
            const std::string& c = i + 1 < cells.size() ? cells[i + 1] : std::string{};
            ts.columns[i].push_back(c.empty() ? std::nan("") : std::stod(c));
        }
    }
    return ts;
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    std::ofstream out(path);
    if (!out)
        fail(ErrorKind::IoError, "cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

} // namespace qrm
