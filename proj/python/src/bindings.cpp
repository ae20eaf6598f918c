#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "relaxometer/experiment.hpp"
#include "relaxometer/localization.hpp"
#include "relaxometer/models.hpp"
#include "relaxometer/relaxation.hpp"
#include "relaxometer/scaling.hpp"
#include "relaxometer/spectral_stats.hpp"

namespace py = pybind11;
using namespace relaxometer;

namespace {

// Fractions arrive as "p/q" strings, ints or floats.
Fraction to_fraction(const py::object& f) {
    if (py::isinstance<py::str>(f)) return Fraction::parse(f.cast<std::string>());
    if (py::isinstance<py::tuple>(f)) {
        const auto t = f.cast<std::pair<std::int64_t, std::int64_t>>();
        return {t.first, t.second};
    }
    return Fraction::from_double(f.cast<double>());
}

PartitionSpec to_partition(Index dimension, const py::object& part) {
    if (py::isinstance<PartitionSpec>(part)) return part.cast<PartitionSpec>();
    if (py::isinstance<py::list>(part)) return PartitionSpec::from_indices(dimension, part.cast<std::vector<Index>>());
    return PartitionSpec::leading(dimension, to_fraction(part));
}

py::dict summary_dict(const std::optional<SampleSummary>& s) {
    py::dict d;
    if (!s) return d;
    d["mean"] = s->mean;
    d["variance"] = s->variance;
    d["se"] = s->standard_error;
    d["count"] = s->count;
    return d;
}

SectorPair<cplx> baker_sector_pair(Index d, const py::object& scheme, double alpha, double beta) {
    const FourierPhases phases{alpha, beta};
    const Eigen::SparseMatrix<cplx> parity = baker_parity(d, phases).sparseView();
    return symmetry_sectors(baker_unitary(d, BernoulliScheme{to_fraction(scheme)}, phases), parity);
}

} // namespace

PYBIND11_MODULE(_relaxometer, m) {
    m.doc() = "Relaxation fluctuations of quantum and random-matrix systems";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "RelaxometerError");
    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<PartitionError>(m, "PartitionError", PyExc_ValueError);
    py::register_exception<InvalidDimension>(m, "InvalidDimension", PyExc_ValueError);
    py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_ValueError);
    py::register_exception<ResourceLimit>(m, "ResourceLimit");
    py::register_exception<MissingInputs>(m, "MissingInputs");

    py::enum_<SpectrumKind>(m, "SpectrumKind")
        .value("HERMITIAN", SpectrumKind::Hermitian)
        .value("UNITARY", SpectrumKind::Unitary);

    py::class_<SpectralDecomposition>(m, "SpectralDecomposition")
        .def_readonly("kind", &SpectralDecomposition::kind)
        .def_readonly("levels", &SpectralDecomposition::levels)
        .def_readonly("vectors", &SpectralDecomposition::vectors)
        .def_property_readonly("basis_dimension", &SpectralDecomposition::basis_dimension)
        .def("__len__", &SpectralDecomposition::size)
        .def("__repr__", [](const SpectralDecomposition& s) {
            return "<SpectralDecomposition " + std::string(s.kind == SpectrumKind::Unitary ? "unitary" : "hermitian") +
                   " states=" + std::to_string(s.size()) + " D=" + std::to_string(s.basis_dimension()) + ">";
        });

    m.def("eigh", py::overload_cast<const RealMatrix&>(&eigh), py::arg("h"));
    m.def("eigh", py::overload_cast<const ComplexMatrix&>(&eigh), py::arg("h"));
    m.def("eig_unitary", &eig_unitary, py::arg("u"), "Eigen-decomposition of a unitary (eigenangles in [0, 2pi)).");
    m.def("pool", &pool, py::arg("a"), py::arg("b"));

    // ---- ensembles and models
    m.def(
        "sample",
        [](const std::string& kind, Index dimension, std::uint64_t seed, std::uint64_t realization,
           std::optional<double> gamma) {
            EnsembleSpec spec{parse_ensemble_kind(kind), dimension, gamma, 1, seed};
            spec.validate();
            Stream rng = derive_substream(seed, realization);
            return sample_ensemble(spec, rng);
        },
        py::arg("kind"), py::arg("dimension"), py::arg("seed") = 0, py::arg("realization") = 0,
        py::arg("gamma") = py::none(),
        "One realization of GOE, GUE, RP-GOE or RP-GUE; identical to realization `realization` of an ensemble run.");
    m.def(
        "sample_cue",
        [](Index dimension, std::uint64_t seed) {
            Stream rng = derive_substream(seed, 0);
            return sample_cue(dimension, rng);
        },
        py::arg("dimension"), py::arg("seed") = 0);

    m.def(
        "baker_unitary",
        [](Index d, const py::object& scheme, double alpha, double beta) {
            return baker_unitary(d, BernoulliScheme{to_fraction(scheme)}, {alpha, beta});
        },
        py::arg("dimension"), py::arg("scheme") = "1/2", py::arg("alpha") = 0.5, py::arg("beta") = 0.5);
    m.def(
        "baker_sectors",
        [](Index d, const py::object& scheme, double alpha, double beta) {
            const auto s = baker_sector_pair(d, scheme, alpha, beta);
            return py::make_tuple(decompose_sector(s.plus, SpectrumKind::Unitary),
                                  decompose_sector(s.minus, SpectrumKind::Unitary));
        },
        py::arg("dimension"), py::arg("scheme") = "1/2", py::arg("alpha") = 0.5, py::arg("beta") = 0.5,
        "Parity-resolved (+, -) decompositions of the baker map, eigenvectors in the full basis.");
    m.def(
        "ising_hamiltonian",
        [](int sites, double hx, double hz, int max_sites) { return ising_hamiltonian({sites, hx, hz}, max_sites); },
        py::arg("sites"), py::arg("hx"), py::arg("hz"), py::arg("max_sites") = 14);
    m.def(
        "ising_sectors",
        [](int sites, double hx, double hz) {
            const auto s = symmetry_sectors(ising_hamiltonian({sites, hx, hz}), reflection_operator(sites));
            return py::make_tuple(decompose_sector(s.plus, SpectrumKind::Hermitian),
                                  decompose_sector(s.minus, SpectrumKind::Hermitian));
        },
        py::arg("sites"), py::arg("hx"), py::arg("hz"));
    m.def(
        "ising_preset",
        [](const std::string& name) {
            IsingParams p;
            if (name == "bch") p = ising_presets::bch(2);
            else if (name == "integrable") p = ising_presets::integrable(2);
            else if (name == "kim-huse") p = ising_presets::kim_huse(2);
            else throw ConfigurationError("unknown Ising preset '" + name + "'");
            return py::make_tuple(p.hx, p.hz);
        },
        py::arg("name"), "(hx, hz) of a named parameter point.");

    // ---- relaxation
    py::class_<PartitionSpec>(m, "Partition")
        .def_static("leading", [](Index d, const py::object& f) { return PartitionSpec::leading(d, to_fraction(f)); },
                    py::arg("dimension"), py::arg("f"))
        .def_static("from_indices", &PartitionSpec::from_indices, py::arg("dimension"), py::arg("indices"))
        .def_property_readonly("dimension", &PartitionSpec::dimension)
        .def_property_readonly("f", [](const PartitionSpec& p) { return p.fraction().value(); })
        .def_property_readonly("indices", &PartitionSpec::indices_a)
        .def("complement", &PartitionSpec::complement);

    m.def(
        "c_avg",
        [](const SpectralDecomposition& s, const py::object& part) {
            return c_avg(s, to_partition(s.basis_dimension(), part)).value;
        },
        py::arg("decomposition"), py::arg("partition") = "1/2");
    m.def(
        "sigma2",
        [](const SpectralDecomposition& s, const py::object& part) {
            return sigma2(s, to_partition(s.basis_dimension(), part)).value;
        },
        py::arg("decomposition"), py::arg("partition") = "1/2");
    m.def(
        "fluctuations",
        [](const SpectralDecomposition& s, const py::object& part) {
            const auto r = fluctuations(s, to_partition(s.basis_dimension(), part));
            py::dict d;
            d["c_avg"] = r.c_avg;
            d["sigma2"] = r.sigma2;
            d["degenerate_levels"] = r.degenerate_levels;
            d["degenerate_gaps"] = r.degenerate_gaps;
            return d;
        },
        py::arg("decomposition"), py::arg("partition") = "1/2");
    m.def(
        "correlation_series",
        [](const SpectralDecomposition& s, const std::vector<double>& times, const py::object& part) {
            return correlation_series(s, to_partition(s.basis_dimension(), part), times);
        },
        py::arg("decomposition"), py::arg("times"), py::arg("partition") = "1/2");
    m.def(
        "time_average_oracle",
        [](const SpectralDecomposition& s, double horizon, std::int64_t samples, const py::object& part) {
            py::gil_scoped_release release;
            const auto r = time_average_oracle(s, to_partition(s.basis_dimension(), part), horizon, samples);
            return std::make_tuple(r.mean, r.variance, r.samples);
        },
        py::arg("decomposition"), py::arg("horizon"), py::arg("samples"), py::arg("partition") = "1/2",
        "(mean, variance, samples) of c(t) over sampled times.");
    m.def(
        "rmt_prediction",
        [](const std::string& ensemble, Index d) {
            if (ensemble != "GUE" && ensemble != "GOE") throw ConfigurationError("ensemble must be GOE or GUE");
            const auto p = ensemble == "GUE" ? gue_prediction(d) : goe_prediction(d);
            return std::make_pair(p.c_avg, p.sigma2);
        },
        py::arg("ensemble"), py::arg("dimension"));
    m.def(
        "ensemble_average",
        [](const std::string& kind, Index dimension, std::int64_t realizations, std::uint64_t seed,
           const py::object& f, std::optional<double> gamma, bool ipr, unsigned threads) {
            EnsembleSpec spec{parse_ensemble_kind(kind), dimension, gamma, realizations, seed};
            ObservableSet obs;
            obs.ipr = ipr;
            FluctuationResult r;
            {
                py::gil_scoped_release release;
                r = ensemble_average(spec, to_fraction(f), obs, threads);
            }
            py::dict d;
            d["c_avg"] = summary_dict(r.c_avg);
            d["sigma2"] = summary_dict(r.sigma2);
            if (ipr) d["ipr"] = summary_dict(r.ipr);
            d["c_avg_samples"] = r.c_avg_samples;
            d["sigma2_samples"] = r.sigma2_samples;
            d["degenerate_level_flags"] = r.degenerate_level_flags;
            d["degenerate_gap_flags"] = r.degenerate_gap_flags;
            return d;
        },
        py::arg("kind"), py::arg("dimension"), py::arg("realizations"), py::arg("seed") = 0, py::arg("f") = "1/2",
        py::arg("gamma") = py::none(), py::arg("ipr") = false, py::arg("threads") = 1);

    // ---- spectral statistics and localization
    m.def(
        "unfold",
        [](const std::vector<double>& levels, bool angles, int degree, double edge_trim) {
            RealVector v = Eigen::Map<const RealVector>(levels.data(), static_cast<Index>(levels.size()));
            const auto seq = angles ? LevelSequence::angles(v) : LevelSequence::energies(v);
            auto opts = default_unfolding(seq.kind);
            opts.degree = degree;
            opts.edge_trim = edge_trim;
            return unfold(seq, opts);
        },
        py::arg("levels"), py::arg("angles") = false, py::arg("degree") = 10, py::arg("edge_trim") = 0.05,
        "Unfolded nearest-neighbour spacings with mean 1.");
    m.def(
        "mean_gap_ratio",
        [](const std::vector<double>& levels, bool angles) {
            RealVector v = Eigen::Map<const RealVector>(levels.data(), static_cast<Index>(levels.size()));
            return mean_gap_ratio(angles ? LevelSequence::angles(v) : LevelSequence::energies(v));
        },
        py::arg("levels"), py::arg("angles") = false);
    m.def("wigner_surmise", &wigner_surmise_goe, py::arg("s"));
    m.def(
        "ks_distance",
        [](const std::vector<double>& s, const std::string& reference) {
            if (reference == "wigner") return ks_distance(s, wigner_cdf_goe);
            if (reference == "poisson") return ks_distance(s, poisson_cdf);
            throw ConfigurationError("reference must be 'wigner' or 'poisson'");
        },
        py::arg("spacings"), py::arg("reference") = "wigner");
    m.def(
        "eigenstate_ipr",
        [](const SpectralDecomposition& s, bool d_scaled) {
            return eigenstate_ipr(s.vectors, d_scaled ? IprConvention::DScaled : IprConvention::Bare).values;
        },
        py::arg("decomposition"), py::arg("d_scaled") = false);
    m.def(
        "fractal_dimension",
        [](const std::vector<std::pair<double, double>>& points, double confidence) {
            const auto r = fractal_dimension(points, confidence);
            py::dict d;
            d["value"] = r.value;
            d["se"] = r.standard_error;
            d["ci"] = std::make_pair(r.ci_low, r.ci_high);
            return d;
        },
        py::arg("points"), py::arg("confidence") = 0.95, "points: [(D, mean IPR), ...]");

    // ---- scaling analysis
    m.def(
        "power_law_fit",
        [](const std::vector<double>& dims, const std::vector<double>& values, bool deviation, double d_min,
           std::optional<std::vector<double>> se) {
            if (dims.size() != values.size() || (se && se->size() != dims.size())) {
                throw ConfigurationError("dimensions, values and se must have equal length");
            }
            std::vector<ScalingPoint> pts;
            for (std::size_t i = 0; i < dims.size(); ++i) {
                pts.push_back({dims[i], values[i], se ? std::optional((*se)[i]) : std::nullopt});
            }
            const auto fit =
                power_law_fit(pts, deviation ? FitMode::DeviationFromUnity : FitMode::PlainPower, d_min, se.has_value());
            py::dict d;
            d["a"] = fit.a;
            d["b"] = fit.b;
            d["a_se"] = fit.a_se;
            d["b_se"] = fit.b_se;
            d["warnings"] = fit.warnings;
            return d;
        },
        py::arg("dimensions"), py::arg("values"), py::arg("deviation") = true, py::arg("d_min") = 200.0,
        py::arg("se") = py::none(), "Fit 1 - v = a D^-b (deviation) or v = a D^-b.");
    m.def(
        "crossing",
        [](const std::vector<std::tuple<double, Index, double>>& cells) {
            SweepTable t;
            for (const auto& [g, d, v] : cells) t.cells.push_back({g, d, v, std::nullopt, 1, 0});
            const auto r = crossing_detect(t);
            return r.found ? py::object(py::make_tuple(r.gamma_star, r.low, r.high)) : py::object(py::none());
        },
        py::arg("cells"), "cells: [(gamma, D, c_avg), ...]; returns (gamma*, low, high) or None.");
    m.def(
        "collapse_quality",
        [](const std::vector<std::tuple<double, Index, double>>& cells, double gamma0) {
            SweepTable t;
            for (const auto& [g, d, v] : cells) t.cells.push_back({g, d, v, std::nullopt, 1, 0});
            return data_collapse(t, gamma0).quality;
        },
        py::arg("cells"), py::arg("gamma0") = 2.0);
    m.def("beta_moment", &beta_moment, py::arg("p"), py::arg("q"), py::arg("k"));
    m.def(
        "gue_cavg_identity",
        [](Index d, const py::object& f) {
            const auto r = gue_cavg_identity(d, to_fraction(f));
            return std::make_pair(r.num(), r.den());
        },
        py::arg("dimension"), py::arg("f") = "1/2", "Exact (numerator, denominator) of the averaged c_avg sum.");

    // ---- runner
    m.def(
        "run",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> output, unsigned threads) {
            const auto cfg = load_config(config);
            RunOptions opts;
            opts.threads = threads;
            opts.output = output;
            RunSummary s;
            {
                py::gil_scoped_release release;
                s = run_experiment(cfg, opts);
            }
            py::dict d;
            d["directory"] = s.directory;
            d["files"] = s.files;
            d["warnings"] = s.warnings;
            d["wall_seconds"] = s.wall_seconds;
            return d;
        },
        py::arg("config"), py::arg("output") = py::none(), py::arg("threads") = 0);
    m.def(
        "verify",
        [](const std::filesystem::path& dir, std::optional<std::string> rerun_cell) {
            const auto r = verify_results(dir, rerun_cell);
            return std::make_pair(r.checked.size(), r.failures);
        },
        py::arg("directory"), py::arg("rerun_cell") = py::none(), "(checks run, failures).");
    m.def("figures", &emit_figure, py::arg("directory"), py::arg("figure"));
}
