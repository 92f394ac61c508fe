#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kto/sim.hpp"

namespace kto::csv {

// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

class Writer {
public:
    Writer(const std::filesystem::path& path, const std::vector<std::string>& header);

    void row(const std::vector<double>& values);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t columns_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read(const std::filesystem::path& path);

double parse_double(const std::string& cell);

// time, u, y_e, y
void write_trajectory(const std::filesystem::path& path, const sim::Trajectory& traj);

}  // namespace kto::csv
