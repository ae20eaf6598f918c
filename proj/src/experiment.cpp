#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "relaxometer/experiment.hpp"
#include "relaxometer/localization.hpp"
#include "relaxometer/parallel.hpp"
#include "relaxometer/relaxation.hpp"
#include "relaxometer/spectral_stats.hpp"
#include "table.hpp"

namespace relaxometer {

namespace {

using nlohmann::json;
using detail::join;

std::string num(double v) { return format_number(v); }
std::string num(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

struct CellPlan {
    std::string key;
    std::uint64_t seed = 0;
    std::string file;
    /// Ensemble cells parallelize over realizations; the others run one per worker.
    bool ensemble = false;
    std::function<CellRecord(unsigned threads)> compute;
};

CellRecord record(const CellPlan& plan) {
    CellRecord r;
    r.key = plan.key;
    r.seed = plan.seed;
    r.file = plan.file;
    return r;
}

void note_degeneracy(CellRecord& r, const FluctuationResult& res) {
    if (res.degenerate_level_flags > 0) {
        r.warnings.push_back(r.key + ": " + std::to_string(res.degenerate_level_flags) +
                             " realization(s) with near-degenerate levels");
    }
    if (res.degenerate_gap_flags > 0) {
        r.warnings.push_back(r.key + ": " + std::to_string(res.degenerate_gap_flags) +
                             " realization(s) with near-degenerate level gaps");
    }
}

void note_degeneracy(CellRecord& r, const Fluctuations& fl, const std::string& what) {
    if (fl.degenerate_levels) r.warnings.push_back(r.key + ": near-degenerate levels" + what);
    if (fl.degenerate_gaps) r.warnings.push_back(r.key + ": near-degenerate level gaps" + what);
}

std::vector<double> linspace(double lo, double hi, std::int64_t n) {
    std::vector<double> t(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        t[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return t;
}

// ---- rmt -------------------------------------------------------------------

void plan_rmt(const ExperimentConfig& cfg, const RmtExperiment& e, std::vector<CellPlan>& plans) {
    const bool multi = e.fractions.size() > 1;
    for (const auto& f : e.fractions) {
        for (std::size_t i = 0; i < e.sizes.size(); ++i) {
            CellPlan p;
            p.key = "rmt/" + to_string(e.ensemble) + "/f=" + f.str() + "/D=" + std::to_string(e.sizes[i]);
            p.seed = derive_cell_seed(cfg.seed, p.key);
            p.file = multi ? "rmt_fractions.csv" : "rmt.csv";
            p.ensemble = true;
            EnsembleSpec spec{e.ensemble, e.sizes[i], std::nullopt, e.realizations[i], p.seed};
            p.compute = [p, spec, f, multi](unsigned threads) {
                CellRecord r = record(p);
                const auto res = ensemble_average(spec, f, {}, threads);
                std::vector<std::string> row;
                if (multi) row.push_back(f.str());
                row.insert(row.end(), {std::to_string(spec.dimension), num(res.c_avg->mean), num(res.c_avg->standard_error),
                                       num(res.sigma2->mean), num(res.sigma2->standard_error),
                                       std::to_string(spec.realizations)});
                r.rows.push_back(join(row));
                note_degeneracy(r, res);
                return r;
            };
            plans.push_back(std::move(p));
        }
    }
}

// ---- baker -----------------------------------------------------------------

bool parity_applies(const BakerExperiment& e, Fraction scheme) {
    return e.parity_resolve && scheme == Fraction(1, 2) && e.phases.alpha == 0.5 && e.phases.beta == 0.5;
}

SectorPair<cplx> baker_sectors(Index d, Fraction scheme, const FourierPhases& phases) {
    const auto u = baker_unitary(d, BernoulliScheme{scheme}, phases);
    const Eigen::SparseMatrix<cplx> parity = baker_parity(d, phases).sparseView();
    return symmetry_sectors(u, parity);
}

void plan_baker(const ExperimentConfig&, const BakerExperiment& e, std::vector<CellPlan>& plans) {
    for (const auto& scheme : e.schemes) {
        for (Index d : e.sizes) {
            CellPlan p;
            p.key = "baker/scheme=" + scheme.str() + "/D=" + std::to_string(d);
            p.file = "baker_scaling.csv";
            const bool resolve = parity_applies(e, scheme);
            p.compute = [p, e, scheme, d, resolve](unsigned) {
                CellRecord r = record(p);
                SpectralDecomposition decomp;
                if (resolve) {
                    const auto sec = baker_sectors(d, scheme, e.phases);
                    decomp = pool(decompose_sector(sec.plus, SpectrumKind::Unitary),
                                  decompose_sector(sec.minus, SpectrumKind::Unitary));
                } else {
                    decomp = eig_unitary(baker_unitary(d, BernoulliScheme{scheme}, e.phases));
                }
                const auto fl = fluctuations(decomp, projector(d, e.f));
                r.rows.push_back(join({scheme.str(), std::to_string(d), resolve ? "1" : "0",
                                       num(fl.c_avg), num(fl.sigma2)}));
                note_degeneracy(r, fl, "");
                return r;
            };
            plans.push_back(std::move(p));
        }
    }
    if (e.spectrum) {
        const auto sp = *e.spectrum;
        CellPlan p;
        p.key = "baker/spectrum/scheme=" + sp.scheme.str() + "/D=" + std::to_string(sp.dimension);
        p.file = "baker_spacings.csv";
        const bool resolve = parity_applies(e, sp.scheme);
        p.compute = [p, e, sp, resolve](unsigned) {
            CellRecord r = record(p);
            UnfoldOptions opts;
            opts.method = UnfoldMethod::CircularUniform;
            opts.degree = sp.degree;
            opts.edge_trim = sp.edge_trim;
            auto emit = [&](const std::string& label, const RealVector& thetas) {
                for (double s : unfold(LevelSequence::angles(thetas), opts)) {
                    r.rows.push_back(label + "," + num(s));
                }
            };
            if (resolve) {
                const auto sec = baker_sectors(sp.dimension, sp.scheme, e.phases);
                emit("+", eig_unitary(sec.plus.block).levels);
                emit("-", eig_unitary(sec.minus.block).levels);
            } else {
                emit("all", eig_unitary(baker_unitary(sp.dimension, BernoulliScheme{sp.scheme}, e.phases)).levels);
            }
            return r;
        };
        plans.push_back(std::move(p));
    }
    if (e.timeseries) {
        const auto ts = *e.timeseries;
        CellPlan p;
        p.key = "baker/timeseries/scheme=" + ts.scheme.str() + "/D=" + std::to_string(ts.dimension);
        p.file = "baker_timeseries.csv";
        p.compute = [p, e, ts](unsigned) {
            CellRecord r = record(p);
            const auto decomp = eig_unitary(baker_unitary(ts.dimension, BernoulliScheme{ts.scheme}, e.phases));
            std::vector<double> times(static_cast<std::size_t>(ts.steps + 1));
            for (std::int64_t t = 0; t <= ts.steps; ++t) times[static_cast<std::size_t>(t)] = static_cast<double>(t);
            const auto c = correlation_series(decomp, projector(ts.dimension, e.f), times);
            for (std::size_t t = 0; t < c.size(); ++t) {
                r.rows.push_back(std::to_string(t) + "," + num(c[t]));
            }
            return r;
        };
        plans.push_back(std::move(p));
    }
}

// ---- ising -----------------------------------------------------------------

// Sector decomposition and the partition it is measured against.
std::pair<SpectralDecomposition, PartitionSpec> ising_sector(const SymmetrySector<double>& sec, Index d, Fraction f,
                                                             PartitionBasis basis) {
    if (basis == PartitionBasis::Full) {
        return {decompose_sector(sec, SpectrumKind::Hermitian), projector(d, f)};
    }
    const RealMatrix h = 0.5 * (sec.block + sec.block.transpose());
    const Index ds = sec.dimension();
    if (!f.divides(ds)) {
        throw ConfigurationError("f*D_s is not an integer for sector dimension " + std::to_string(ds));
    }
    return {eigh(h), projector(ds, f)};
}

void plan_ising(const ExperimentConfig&, const IsingExperiment& e, std::vector<CellPlan>& plans) {
    for (const auto& model : e.models) {
        for (int n : e.sites) {
            CellPlan p;
            p.key = "ising/" + model.name + "/N=" + std::to_string(n);
            p.file = "ising_scaling.csv";
            p.compute = [p, e, model, n](unsigned) {
                CellRecord r = record(p);
                const auto h = ising_hamiltonian({n, model.hx, model.hz}, e.max_sites);
                const auto sectors = symmetry_sectors(h, reflection_operator(n));
                const Index d = h.rows();
                for (const auto* sec : {&sectors.plus, &sectors.minus}) {
                    const auto [decomp, part] = ising_sector(*sec, d, e.f, e.partition_basis);
                    const auto fl = fluctuations(decomp, part);
                    r.rows.push_back(join({model.name, std::to_string(n), std::to_string(d), sec->sign > 0 ? "+" : "-",
                                           std::to_string(sec->dimension()), num(fl.c_avg), num(fl.sigma2)}));
                    note_degeneracy(r, fl, sec->sign > 0 ? " (+ sector)" : " (- sector)");
                }
                return r;
            };
            plans.push_back(std::move(p));
        }
    }
    if (e.timeseries) {
        const auto ts = *e.timeseries;
        for (const auto& model : e.models) {
            CellPlan p;
            p.key = "ising/timeseries/" + model.name + "/N=" + std::to_string(ts.sites);
            p.file = "ising_timeseries.csv";
            p.compute = [p, e, ts, model](unsigned) {
                CellRecord r = record(p);
                const auto h = ising_hamiltonian({ts.sites, model.hx, model.hz}, e.max_sites);
                const auto sectors = symmetry_sectors(h, reflection_operator(ts.sites));
                const auto& sec = ts.sector > 0 ? sectors.plus : sectors.minus;
                const auto [decomp, part] = ising_sector(sec, h.rows(), e.f, e.partition_basis);
                const auto times = linspace(0.0, ts.t_max, ts.points);
                const auto c = correlation_series(decomp, part, times);
                for (std::size_t i = 0; i < c.size(); ++i) {
                    r.rows.push_back(model.name + "," + num(times[i]) + "," + num(c[i]));
                }
                return r;
            };
            plans.push_back(std::move(p));
        }
    }
}

// ---- rp --------------------------------------------------------------------

std::string gamma_key(double g) { return "gamma=" + format_number(g); }

void plan_rp(const ExperimentConfig& cfg, const RpExperiment& e, std::vector<CellPlan>& plans) {
    for (double g : e.gammas) {
        for (std::size_t i = 0; i < e.sizes.size(); ++i) {
            CellPlan p;
            p.key = "rp/" + to_string(e.ensemble) + "/" + gamma_key(g) + "/D=" + std::to_string(e.sizes[i]);
            p.seed = derive_cell_seed(cfg.seed, p.key);
            p.file = "rp_sweep.csv";
            p.ensemble = true;
            EnsembleSpec spec{e.ensemble, e.sizes[i], g, e.realizations[i], p.seed};
            p.compute = [p, spec, e, g](unsigned threads) {
                CellRecord r = record(p);
                ObservableSet obs;
                obs.ipr = e.ipr;
                const auto res = ensemble_average(spec, e.f, obs, threads);
                std::string ipr_mean, ipr_se;
                if (res.ipr) {
                    ipr_mean = num(res.ipr->mean);
                    ipr_se = num(res.ipr->standard_error);
                }
                r.rows.push_back(join({num(g), std::to_string(spec.dimension), num(res.c_avg->mean),
                                       num(res.c_avg->standard_error), num(res.sigma2->mean),
                                       num(res.sigma2->standard_error), ipr_mean, ipr_se,
                                       std::to_string(spec.realizations)}));
                note_degeneracy(r, res);
                return r;
            };
            plans.push_back(std::move(p));
        }
    }
    if (e.timeseries) {
        const auto ts = *e.timeseries;
        for (double g : ts.gammas) {
            CellPlan p;
            p.key = "rp/timeseries/" + to_string(e.ensemble) + "/" + gamma_key(g) + "/D=" + std::to_string(ts.dimension);
            p.seed = derive_cell_seed(cfg.seed, p.key);
            p.file = "rp_timeseries.csv";
            p.ensemble = true;
            p.compute = [p, e, ts, g](unsigned threads) {
                CellRecord r = record(p);
                const EnsembleSpec spec{e.ensemble, ts.dimension, g, ts.realizations, p.seed};
                spec.validate();
                const auto part = projector(ts.dimension, e.f);
                const auto times = linspace(0.0, ts.t_max, ts.points);
                std::vector<std::vector<double>> series(static_cast<std::size_t>(ts.realizations));
                parallel_for(ts.realizations, threads, [&](std::int64_t k) {
                    Stream rng = derive_substream(spec.master_seed, static_cast<std::uint64_t>(k));
                    const auto h = sample_ensemble(spec, rng);
                    const auto decomp = std::visit([](const auto& m) { return eigh(m); }, h);
                    series[static_cast<std::size_t>(k)] = correlation_series(decomp, part, times);
                });
                for (std::size_t j = 0; j < times.size(); ++j) {
                    std::vector<double> column;
                    column.reserve(series.size());
                    for (const auto& s : series) column.push_back(s[j]);
                    const auto sum = summarize(column);
                    r.rows.push_back(join({num(g), num(times[j]), num(sum.mean), num(sum.standard_error)}));
                }
                return r;
            };
            plans.push_back(std::move(p));
        }
    }
}

// ---- oracle ----------------------------------------------------------------

void plan_oracle(const ExperimentConfig& cfg, const OracleExperiment& e, std::vector<CellPlan>& plans) {
    auto add = [&](const std::string& kind, int index) {
        CellPlan p;
        p.key = "oracle/" + kind + "/" + std::to_string(index);
        p.seed = derive_cell_seed(cfg.seed, p.key);
        p.file = "oracle.csv";
        p.compute = [p, e, kind, index](unsigned) {
            CellRecord r = record(p);
            Stream rng = derive_substream(p.seed, 0);
            const SpectralDecomposition decomp =
                kind == "unitary" ? eig_unitary(sample_cue(e.dimension, rng)) : eigh(sample_goe(e.dimension, rng));
            const auto part = projector(e.dimension, e.f);
            const auto fl = fluctuations(decomp, part);
            const auto oracle = time_average_oracle(decomp, part, e.horizon, e.samples);
            r.rows.push_back(join({std::to_string(index), kind, num(fl.c_avg), num(oracle.mean), num(fl.sigma2),
                                   num(oracle.variance), std::to_string(oracle.samples)}));
            note_degeneracy(r, fl, "");
            return r;
        };
        plans.push_back(std::move(p));
    };
    for (int i = 0; i < e.unitaries; ++i) add("unitary", i);
    for (int i = 0; i < e.hamiltonians; ++i) add("hamiltonian", i);
}

// ---- moments ---------------------------------------------------------------

void plan_moments(const ExperimentConfig& cfg, const MomentsExperiment& e, std::vector<CellPlan>& plans) {
    for (auto field : e.fields) {
        for (Index d : e.dimensions) {
            const std::string fname = field == Field::Real ? "real" : "complex";
            CellPlan p;
            p.key = "moments/" + fname + "/D=" + std::to_string(d);
            p.seed = derive_cell_seed(cfg.seed, p.key);
            p.file = "moments.csv";
            p.compute = [p, e, field, fname, d](unsigned) {
                CellRecord r = record(p);
                Stream rng = derive_substream(p.seed, 0);
                for (const auto& row : sphere_moment_check(d, field, e.samples, rng)) {
                    r.rows.push_back(join({fname, std::to_string(d), row.name, num(row.empirical),
                                           num(row.standard_error), num(row.analytic), std::to_string(e.samples)}));
                }
                return r;
            };
            plans.push_back(std::move(p));
        }
    }
}

std::vector<CellPlan> plan_cells(const ExperimentConfig& cfg) {
    std::vector<CellPlan> plans;
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, RmtExperiment>) plan_rmt(cfg, e, plans);
            else if constexpr (std::is_same_v<T, BakerExperiment>) plan_baker(cfg, e, plans);
            else if constexpr (std::is_same_v<T, IsingExperiment>) plan_ising(cfg, e, plans);
            else if constexpr (std::is_same_v<T, RpExperiment>) plan_rp(cfg, e, plans);
            else if constexpr (std::is_same_v<T, OracleExperiment>) plan_oracle(cfg, e, plans);
            else plan_moments(cfg, e, plans);
        },
        cfg.body);
    return plans;
}

std::vector<CellRecord> execute(const std::vector<CellPlan>& plans, unsigned threads) {
    std::vector<CellRecord> out(plans.size());
    std::vector<std::int64_t> independent;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (plans[i].ensemble) {
            out[i] = plans[i].compute(threads);
        } else {
            independent.push_back(static_cast<std::int64_t>(i));
        }
    }
    parallel_for(static_cast<std::int64_t>(independent.size()), threads, [&](std::int64_t k) {
        const auto i = static_cast<std::size_t>(independent[static_cast<std::size_t>(k)]);
        out[i] = plans[i].compute(1);
    });
    return out;
}

} // namespace

namespace detail {

// Files computed from other CSVs rather than from cells.
std::map<std::string, std::vector<std::string>> derived_files(const std::filesystem::path& dir,
                                                              const ExperimentConfig& cfg) {
    std::map<std::string, std::vector<std::string>> out;
    if (const auto* rmt = std::get_if<RmtExperiment>(&cfg.body); rmt && rmt->fractions.size() > 1) {
        const auto t = read_table(dir / "rmt_fractions.csv");
        std::vector<std::string> lines{csv_headers().at("rmt.csv")};
        const auto first = rmt->fractions.front().str();
        for (const auto& row : t.rows) {
            if (row[0] == first) {
                lines.push_back(join(std::vector<std::string>(row.begin() + 1, row.end())));
            }
        }
        out["rmt.csv"] = lines;
    }
    if (const auto* rp = std::get_if<RpExperiment>(&cfg.body); rp && !rp->gammas.empty()) {
        const auto t = read_table(dir / "rp_sweep.csv");
        std::vector<std::string> lines{csv_headers().at("rp_collapse.csv")};
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const double g = t.number(i, "gamma");
            const double d = t.number(i, "D");
            lines.push_back(join({t.text(i, "gamma"), t.text(i, "D"), format_number((g - 2.0) * std::log(d)),
                                  t.text(i, "c_avg_mean")}));
        }
        out["rp_collapse.csv"] = lines;
    }
    return out;
}

} // namespace detail

std::vector<CellRecord> compute_cells(const ExperimentConfig& config, const std::vector<std::string>& keys,
                                      unsigned threads) {
    auto plans = plan_cells(config);
    std::vector<CellPlan> chosen;
    for (const auto& k : keys) {
        auto it = std::find_if(plans.begin(), plans.end(), [&](const auto& p) { return p.key == k; });
        if (it == plans.end()) {
            throw ConfigurationError("no cell named '" + k + "' in this experiment");
        }
        chosen.push_back(*it);
    }
    return execute(chosen, threads);
}

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    RunSummary summary;
    summary.directory = options.output.value_or(config.output);
    std::filesystem::create_directories(summary.directory);

    auto plans = plan_cells(config);
    if (!options.only_cells.empty()) {
        std::erase_if(plans, [&](const auto& p) {
            return std::find(options.only_cells.begin(), options.only_cells.end(), p.key) == options.only_cells.end();
        });
    }
    summary.cells = execute(plans, options.threads);

    // Group rows per file, keeping plan order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::string>> lines;
    json cells = json::array();
    for (const auto& c : summary.cells) {
        if (!lines.contains(c.file)) {
            order.push_back(c.file);
            lines[c.file] = {detail::csv_headers().at(c.file)};
        }
        auto& file = lines[c.file];
        cells.push_back({{"key", c.key},
                         {"seed", c.seed},
                         {"file", c.file},
                         {"first_row", file.size()},
                         {"row_count", c.rows.size()}});
        file.insert(file.end(), c.rows.begin(), c.rows.end());
        summary.warnings.insert(summary.warnings.end(), c.warnings.begin(), c.warnings.end());
    }
    for (const auto& f : order) {
        detail::write_lines(summary.directory / f, lines[f]);
        summary.files.push_back(f);
    }
    if (options.only_cells.empty()) {
        for (const auto& [name, content] : detail::derived_files(summary.directory, config)) {
            detail::write_lines(summary.directory / name, content);
            summary.files.push_back(name);
        }
    }

    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest{{"version", kVersion},
                  {"kind", config.kind},
                  {"seed", config.seed},
                  {"config", json::parse(config.echo)},
                  {"cells", cells},
                  {"files", summary.files},
                  {"threads", resolve_threads(options.threads)},
                  {"wall_clock_seconds", summary.wall_seconds},
                  {"warnings", summary.warnings}};
    if (const auto* e = std::get_if<RmtExperiment>(&config.body)) manifest["ensemble"] = to_string(e->ensemble);
    if (const auto* e = std::get_if<RpExperiment>(&config.body)) manifest["ensemble"] = to_string(e->ensemble);
    detail::write_lines(summary.directory / "manifest.json", {manifest.dump(2)});
    return summary;
}

} // namespace relaxometer
