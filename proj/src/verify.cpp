#include <cmath>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "relaxometer/experiment.hpp"
#include "table.hpp"

namespace relaxometer {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using detail::Table;

constexpr double kBoundSlack = 1e-9;

struct Checker {
    VerifyReport report;

    void check(bool ok, const std::string& what) {
        report.checked.push_back(what);
        if (!ok) report.failures.push_back(what);
    }
};

bool is_finite_number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        return used == s.size() && std::isfinite(v);
    } catch (const std::exception&) {
        return false;
    }
}

void check_numeric(Checker& c, const std::string& file, const Table& t, const std::vector<std::string>& columns,
                   bool allow_empty) {
    for (const auto& col : columns) {
        bool ok = true;
        for (std::size_t i = 0; i < t.rows.size() && ok; ++i) {
            const auto& v = t.text(i, col);
            ok = (allow_empty && v.empty()) || is_finite_number(v);
        }
        c.check(ok, file + ": column " + col + " is numeric" + (allow_empty ? " or empty" : ""));
    }
}

void check_bounds(Checker& c, const std::string& file, const Table& t, const std::string& col, double lo, double hi) {
    bool ok = true;
    for (std::size_t i = 0; i < t.rows.size() && ok; ++i) {
        const double v = t.number(i, col);
        ok = v >= lo - kBoundSlack && v <= hi + kBoundSlack;
    }
    c.check(ok, file + ": " + col + " within [" + format_number(lo) + ", " + format_number(hi) + "]");
}

// Standard errors must be present whenever more than one realization was averaged.
void check_se(Checker& c, const std::string& file, const Table& t, const std::vector<std::string>& se_columns) {
    bool ok = true;
    for (std::size_t i = 0; i < t.rows.size() && ok; ++i) {
        const bool many = t.number(i, "realizations") > 1;
        for (const auto& col : se_columns) {
            if (t.text(i, col).empty() == many) ok = false;
        }
    }
    c.check(ok, file + ": standard errors present exactly when realizations > 1");
}

void check_origin(Checker& c, const std::string& file, const Table& t, const std::string& col) {
    bool ok = true;
    for (std::size_t i = 0; i < t.rows.size() && ok; ++i) {
        if (t.number(i, "t") == 0.0) ok = t.number(i, col) == 0.0;
    }
    c.check(ok, file + ": " + col + " is exactly 0 at t = 0");
}

void check_file(Checker& c, const fs::path& dir, const std::string& file) {
    const auto t = detail::read_table(dir / file);
    if (file == "rmt.csv" || file == "rmt_fractions.csv") {
        check_numeric(c, file, t, {"D", "c_avg_mean", "sigma2_mean", "realizations"}, false);
        check_numeric(c, file, t, {"c_avg_se", "sigma2_se"}, true);
        check_bounds(c, file, t, "c_avg_mean", 0.0, 1.0);
        check_bounds(c, file, t, "sigma2_mean", 0.0, 1.0);
        check_se(c, file, t, {"c_avg_se", "sigma2_se"});
    } else if (file == "baker_scaling.csv") {
        check_numeric(c, file, t, {"D", "c_avg", "sigma2"}, false);
        check_bounds(c, file, t, "c_avg", 0.0, 1.0);
        check_bounds(c, file, t, "sigma2", 0.0, 1.0);
    } else if (file == "baker_spacings.csv") {
        check_numeric(c, file, t, {"s"}, false);
        check_bounds(c, file, t, "s", 0.0, HUGE_VAL);
    } else if (file == "baker_timeseries.csv") {
        check_numeric(c, file, t, {"t", "c_t"}, false);
        check_origin(c, file, t, "c_t");
        check_bounds(c, file, t, "c_t", 0.0, HUGE_VAL);
    } else if (file == "ising_scaling.csv") {
        check_numeric(c, file, t, {"N", "D", "D_s", "c_avg", "sigma2"}, false);
        check_bounds(c, file, t, "c_avg", 0.0, 1.0);
        std::map<std::pair<std::string, std::string>, double> sums, dims;
        bool powers = true;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto k = std::make_pair(t.text(i, "model"), t.text(i, "N"));
            sums[k] += t.number(i, "D_s");
            dims[k] = t.number(i, "D");
            powers = powers && t.number(i, "D") == std::exp2(t.number(i, "N"));
        }
        c.check(powers, file + ": D = 2^N");
        bool ok = true;
        for (const auto& [k, s] : sums) ok = ok && s == dims[k];
        c.check(ok, file + ": sector dimensions sum to D");
    } else if (file == "ising_timeseries.csv") {
        check_numeric(c, file, t, {"t", "c_t"}, false);
        check_origin(c, file, t, "c_t");
    } else if (file == "rp_sweep.csv") {
        check_numeric(c, file, t, {"gamma", "D", "c_avg_mean", "sigma2_mean", "realizations"}, false);
        check_numeric(c, file, t, {"c_avg_se", "sigma2_se", "ipr_mean", "ipr_se"}, true);
        check_bounds(c, file, t, "c_avg_mean", 0.0, 1.0);
        check_se(c, file, t, {"c_avg_se", "sigma2_se"});
    } else if (file == "rp_collapse.csv") {
        check_numeric(c, file, t, {"gamma", "D", "x", "c_avg_mean"}, false);
    } else if (file == "rp_timeseries.csv") {
        check_numeric(c, file, t, {"gamma", "t", "c_t_mean"}, false);
        check_origin(c, file, t, "c_t_mean");
    } else if (file == "oracle.csv") {
        check_numeric(c, file, t, {"c_avg_formula", "c_avg_oracle", "sigma2_formula", "sigma2_oracle", "samples"},
                      false);
        check_bounds(c, file, t, "c_avg_formula", 0.0, 1.0);
    } else if (file == "moments.csv") {
        check_numeric(c, file, t, {"D", "empirical", "se", "analytic", "samples"}, false);
        bool ok = true;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            if (t.text(i, "moment") == "normalization") ok = ok && t.number(i, "analytic") == 1.0;
        }
        c.check(ok, file + ": normalization rows have analytic value 1");
    }
}

} // namespace

VerifyReport verify_results(const fs::path& dir, const std::optional<std::string>& rerun_cell, unsigned threads) {
    Checker c;
    std::ifstream in(dir / "manifest.json");
    if (!in) {
        c.check(false, "manifest.json exists in " + dir.string());
        return c.report;
    }
    const auto manifest = json::parse(in, nullptr, false);
    c.check(!manifest.is_discarded(), "manifest.json parses");
    if (manifest.is_discarded()) return c.report;
    for (const char* key : {"version", "kind", "seed", "config", "cells", "files", "wall_clock_seconds", "threads"}) {
        c.check(manifest.contains(key), std::string("manifest.json has '") + key + "'");
    }
    if (!c.report.ok()) return c.report;

    const auto config = parse_config(manifest["config"].dump(), (dir / "manifest.json").string());
    std::map<std::string, std::vector<std::string>> contents;
    for (const auto& f : manifest["files"]) {
        const auto name = f.get<std::string>();
        const bool present = fs::exists(dir / name);
        c.check(present, name + " exists");
        if (!present) continue;
        contents[name] = detail::read_lines(dir / name);
        const auto& header = detail::csv_headers();
        c.check(header.contains(name) && !contents[name].empty() && contents[name].front() == header.at(name),
                name + ": header matches its schema");
        try {
            check_file(c, dir, name);
        } catch (const std::exception& e) {
            c.check(false, name + ": " + e.what());
        }
    }

    for (const auto& cell : manifest["cells"]) {
        const auto file = cell["file"].get<std::string>();
        const auto first = cell["first_row"].get<std::size_t>();
        const auto count = cell["row_count"].get<std::size_t>();
        const auto key = cell["key"].get<std::string>();
        c.check(contents.contains(file) && first + count <= contents[file].size(), key + ": row range inside " + file);
    }

    for (const auto& [name, lines] : detail::derived_files(dir, config)) {
        c.check(contents.contains(name) && contents[name] == lines, name + " agrees with its source file");
    }

    if (rerun_cell) {
        const json* entry = nullptr;
        for (const auto& cell : manifest["cells"]) {
            if (cell["key"] == *rerun_cell) entry = &cell;
        }
        if (entry == nullptr) {
            c.check(false, "cell '" + *rerun_cell + "' is listed in the manifest");
            return c.report;
        }
        const auto recomputed = compute_cells(config, {*rerun_cell}, threads).front();
        const auto& stored = contents[(*entry)["file"].get<std::string>()];
        const auto first = (*entry)["first_row"].get<std::size_t>();
        const auto count = (*entry)["row_count"].get<std::size_t>();
        const bool same = recomputed.rows.size() == count && first + count <= stored.size() &&
                          std::equal(recomputed.rows.begin(), recomputed.rows.end(),
                                     stored.begin() + static_cast<std::ptrdiff_t>(first));
        c.check(same, *rerun_cell + ": recomputed rows match the stored rows byte for byte");
    }
    return c.report;
}

} // namespace relaxometer
