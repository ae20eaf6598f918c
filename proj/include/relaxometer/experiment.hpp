#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relaxometer/error.hpp"
#include "relaxometer/fraction.hpp"
#include "relaxometer/models.hpp"
#include "relaxometer/rng.hpp"
#include "relaxometer/scaling.hpp"

namespace relaxometer {

inline constexpr const char* kVersion = "0.3.0";

/// A configuration problem tied to a line of the source file.
class ConfigFileError : public ConfigurationError {
  public:
    ConfigFileError(const std::string& source, int line, const std::string& what)
        : ConfigurationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

  private:
    int line_;
};

/// Figure emission could not find its inputs.
class MissingInputs : public Error {
  public:
    MissingInputs(const std::string& what, std::vector<std::string> files)
        : Error(what), files_(std::move(files)) {}
    const std::vector<std::string>& files() const { return files_; }

  private:
    std::vector<std::string> files_;
};

struct RmtExperiment {
    EnsembleKind ensemble = EnsembleKind::GOE;
    std::vector<Index> sizes;
    std::vector<std::int64_t> realizations;
    /// The first entry feeds rmt.csv; all of them feed rmt_fractions.csv.
    std::vector<Fraction> fractions{Fraction(1, 2)};
};

struct BakerSpectrum {
    Index dimension = 2000;
    Fraction scheme{1, 2};
    int degree = 10;
    double edge_trim = 0.05;
};

struct BakerTimeseries {
    Index dimension = 64;
    Fraction scheme{1, 2};
    std::int64_t steps = 500;
};

struct BakerExperiment {
    std::vector<Fraction> schemes;
    std::vector<Index> sizes;
    FourierPhases phases;
    Fraction f{1, 2};
    /// Resolve the parity for schemes where -G^2 commutes with the map.
    bool parity_resolve = true;
    std::optional<BakerSpectrum> spectrum;
    std::optional<BakerTimeseries> timeseries;
};

struct NamedIsing {
    std::string name;
    double hx = 0.0;
    double hz = 0.0;
};

/// Where the f-partition lives for a symmetry sector: the computational
/// basis of the full chain, or the sector's own symmetry-adapted basis.
enum class PartitionBasis { Full, Sector };

struct IsingTimeseries {
    int sites = 12;
    double t_max = 50.0;
    std::int64_t points = 501;
    int sector = 1;
};

struct IsingExperiment {
    std::vector<NamedIsing> models;
    std::vector<int> sites;
    Fraction f{1, 2};
    PartitionBasis partition_basis = PartitionBasis::Full;
    int max_sites = 14;
    std::optional<IsingTimeseries> timeseries;
};

struct RpTimeseries {
    Index dimension = 512;
    std::vector<double> gammas;
    std::int64_t realizations = 256;
    double t_max = 100.0;
    std::int64_t points = 201;
};

struct RpExperiment {
    EnsembleKind ensemble = EnsembleKind::RP_GOE;
    std::vector<double> gammas;
    std::vector<Index> sizes;
    std::vector<std::int64_t> realizations;
    Fraction f{1, 2};
    bool ipr = false;
    std::optional<RpTimeseries> timeseries;
};

struct OracleExperiment {
    Index dimension = 64;
    int unitaries = 20;
    int hamiltonians = 20;
    double horizon = 1e6;
    std::int64_t samples = 1'000'000;
    Fraction f{1, 2};
};

struct MomentsExperiment {
    std::vector<Index> dimensions;
    std::vector<Field> fields{Field::Real, Field::Complex};
    std::int64_t samples = 1'000'000;
};

using ExperimentBody = std::variant<RmtExperiment, BakerExperiment, IsingExperiment, RpExperiment, OracleExperiment,
                                    MomentsExperiment>;

struct ExperimentConfig {
    std::string kind;
    std::uint64_t seed = 0;
    std::filesystem::path output;
    /// Upper bound on any dense dimension; exceeding it is a resource error.
    Index max_dimension = 8192;
    /// The configuration as parsed, re-serialized for the manifest.
    std::string echo;
    ExperimentBody body;
};

/// Parses and validates a JSON configuration. Errors carry `source:line`.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
    /// 0 = machine parallelism.
    unsigned threads = 0;
    /// Overrides the configured output directory.
    std::optional<std::filesystem::path> output;
    /// Restrict the run to the cells whose key is listed (used by verify).
    std::vector<std::string> only_cells;
};

struct CellRecord {
    std::string key;
    std::uint64_t seed = 0;
    std::string file;
    std::vector<std::string> rows;
    std::vector<std::string> warnings;
};

struct RunSummary {
    std::filesystem::path directory;
    std::vector<std::string> files;
    std::vector<CellRecord> cells;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

/// Computes every cell, writes one CSV per observable plus manifest.json.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Recomputes the listed cells in memory without touching the output directory.
std::vector<CellRecord> compute_cells(const ExperimentConfig& config, const std::vector<std::string>& keys,
                                      unsigned threads = 0);

/// Writes plot data for fig1..fig12 under <dir>/figures; returns the files written.
std::vector<std::filesystem::path> emit_figure(const std::filesystem::path& dir, const std::string& figure);

struct VerifyReport {
    std::vector<std::string> checked;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/// Re-checks stored results against their invariants; with `rerun_cell`
/// the cell is recomputed from the manifest and compared byte for byte.
VerifyReport verify_results(const std::filesystem::path& dir, const std::optional<std::string>& rerun_cell = std::nullopt,
                            unsigned threads = 0);

/// Shortest round-trip decimal for a binary64 value.
std::string format_number(double value);

} // namespace relaxometer
