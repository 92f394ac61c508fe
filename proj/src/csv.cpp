#include "kto/csv.hpp"

#include <charconv>
#include <sstream>

#include "kto/error.hpp"

namespace kto::csv {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first < last && *first == ' ') ++first;
    if (first < last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        throw Error(ErrorKind::Validation, "csv: cannot parse number '" + cell + "'");
    }
    return value;
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), path_(path), columns_(header.size()) {
    if (!out_) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    row(header);
}

void Writer::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw Error(ErrorKind::Contract, "csv: row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw Error(ErrorKind::Io, "write failed for " + path_.string());
}

void Writer::row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    row(cells);
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    if (first) throw Error(ErrorKind::Validation, "csv: " + path.string() + " is empty");
    return table;
}

void write_trajectory(const std::filesystem::path& path, const sim::Trajectory& traj) {
    Writer w(path, {"time", "u", "y_e", "y"});
    for (std::size_t k = 0; k < traj.size(); ++k) w.row({traj.times[k], traj.u[k], traj.y_e[k], traj.y[k]});
}

}  // namespace kto::csv
