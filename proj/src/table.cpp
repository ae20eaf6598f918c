#include "table.hpp"

#include <charconv>
#include <fstream>

#include "relaxometer/error.hpp"
#include "relaxometer/experiment.hpp"

namespace relaxometer {

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, res.ptr};
}

namespace detail {

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw Error("missing column '" + name + "'");
}

const std::string& Table::text(std::size_t row, const std::string& name) const { return rows.at(row).at(column(name)); }

std::optional<double> Table::maybe_number(std::size_t row, const std::string& name) const {
    const auto& t = text(row, name);
    if (t.empty()) {
        return std::nullopt;
    }
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw Error("column '" + name + "' holds a non-numeric value '" + t + "'");
    }
    return v;
}

double Table::number(std::size_t row, const std::string& name) const {
    auto v = maybe_number(row, name);
    if (!v) {
        throw Error("column '" + name + "' is empty in row " + std::to_string(row + 1));
    }
    return *v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) {
            return out;
        }
        start = pos + 1;
    }
}

std::string join(const std::vector<std::string>& fields, char sep) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += sep;
        out += fields[i];
    }
    return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (const auto& l : lines) {
        out << l << '\n';
    }
}

Table read_table(const std::filesystem::path& path) {
    auto lines = read_lines(path);
    if (lines.empty()) {
        throw Error(path.string() + " is empty");
    }
    Table t;
    t.header = split(lines.front());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto fields = split(lines[i]);
        if (fields.size() != t.header.size()) {
            throw Error(path.string() + ":" + std::to_string(i + 1) + ": expected " + std::to_string(t.header.size()) +
                        " fields");
        }
        t.rows.push_back(std::move(fields));
    }
    return t;
}

const std::map<std::string, std::string>& csv_headers() {
    static const std::map<std::string, std::string> headers{
        {"rmt.csv", "D,c_avg_mean,c_avg_se,sigma2_mean,sigma2_se,realizations"},
        {"rmt_fractions.csv", "f,D,c_avg_mean,c_avg_se,sigma2_mean,sigma2_se,realizations"},
        {"baker_scaling.csv", "scheme,D,parity_resolved,c_avg,sigma2"},
        {"baker_spacings.csv", "sector,s"},
        {"baker_timeseries.csv", "t,c_t"},
        {"ising_scaling.csv", "model,N,D,sector,D_s,c_avg,sigma2"},
        {"ising_timeseries.csv", "model,t,c_t"},
        {"rp_sweep.csv", "gamma,D,c_avg_mean,c_avg_se,sigma2_mean,sigma2_se,ipr_mean,ipr_se,realizations"},
        {"rp_collapse.csv", "gamma,D,x,c_avg_mean"},
        {"rp_timeseries.csv", "gamma,t,c_t_mean,c_t_se"},
        {"oracle.csv", "system,kind,c_avg_formula,c_avg_oracle,sigma2_formula,sigma2_oracle,samples"},
        {"moments.csv", "field,D,moment,empirical,se,analytic,samples"},
    };
    return headers;
}

} // namespace detail
} // namespace relaxometer
