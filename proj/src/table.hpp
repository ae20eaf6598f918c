#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relaxometer/experiment.hpp"

namespace relaxometer::detail {

/// A comma-separated file with a header row; fields are never quoted.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
    std::optional<double> maybe_number(std::size_t row, const std::string& name) const;
    const std::string& text(std::size_t row, const std::string& name) const;
};

Table read_table(const std::filesystem::path& path);
std::vector<std::string> split(const std::string& line, char sep = ',');
std::string join(const std::vector<std::string>& fields, char sep = ',');
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

/// Header row for each CSV the runner writes.
const std::map<std::string, std::string>& csv_headers();

/// Files the runner computes from other CSVs in `dir` (name -> lines).
std::map<std::string, std::vector<std::string>> derived_files(const std::filesystem::path& dir,
                                                              const ExperimentConfig& config);

} // namespace relaxometer::detail
