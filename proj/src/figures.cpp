#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relaxometer/experiment.hpp"
#include "relaxometer/relaxation.hpp"
#include "relaxometer/spectral_stats.hpp"
#include "table.hpp"

namespace relaxometer {

namespace {

namespace fs = std::filesystem;
using detail::Table;

Table require(const fs::path& dir, const std::string& file, const std::string& figure) {
    if (!fs::exists(dir / file)) {
        throw MissingInputs(figure + " needs " + file + " in " + dir.string(), {file});
    }
    return detail::read_table(dir / file);
}

// The configured ensemble, from the manifest written next to the CSVs.
std::string manifest_ensemble(const fs::path& dir, const std::string& figure) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw MissingInputs(figure + " needs manifest.json in " + dir.string(), {"manifest.json"});
    const auto m = nlohmann::json::parse(in, nullptr, false);
    if (m.is_discarded() || !m.contains("ensemble")) {
        throw MissingInputs(figure + ": manifest.json does not name an ensemble", {"manifest.json"});
    }
    return m["ensemble"].get<std::string>();
}

class DataFile {
  public:
    DataFile(fs::path path, const std::string& columns) : path_(std::move(path)) { out_ << "# " << columns << '\n'; }

    DataFile& row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : " ") << format_number(v);
            first = false;
        }
        out_ << '\n';
        return *this;
    }
    void blank() { out_ << '\n'; }
    void comment(const std::string& text) { out_ << "# " << text << '\n'; }

    fs::path write() const {
        std::ofstream f(path_);
        f << out_.str();
        if (!f) throw Error("cannot write " + path_.string());
        return path_;
    }

  private:
    fs::path path_;
    std::ostringstream out_;
};

struct Emitter {
    fs::path dir;
    fs::path out;
    std::string figure;
    std::vector<fs::path> written;

    DataFile data(const std::string& suffix, const std::string& columns) const {
        return DataFile(out / (figure + "_" + suffix + ".dat"), columns);
    }
    void keep(const DataFile& f) { written.push_back(f.write()); }
    void sidecar(const std::string& text) {
        const auto p = out / (figure + ".txt");
        std::ofstream f(p);
        f << text;
        written.push_back(p);
    }
};

double nan_if_missing(const std::optional<double>& v) { return v.value_or(std::nan("")); }

std::string fit_line(const std::string& label, const ScalingFit& fit) {
    std::ostringstream s;
    s << label << ": a=" << format_number(fit.a) << " +- " << format_number(fit.a_se) << ", b=" << format_number(fit.b)
      << " +- " << format_number(fit.b_se) << " (" << fit.points.size() << " points, D > "
      << format_number(fit.d_min) << ")";
    return s.str();
}

std::optional<ScalingFit> try_fit(const std::vector<ScalingPoint>& pts, FitMode mode, double d_min,
                                  std::vector<std::string>& notes, const std::string& label) {
    try {
        auto fit = power_law_fit(pts, mode, d_min);
        notes.push_back(fit_line(label, fit));
        return fit;
    } catch (const InsufficientData& e) {
        notes.push_back(label + ": no fit (" + e.what() + ")");
        return std::nullopt;
    }
}

void fit_curve(DataFile& f, const ScalingFit& fit, double lo, double hi) {
    for (int i = 0; i <= 40; ++i) {
        const double d = lo * std::pow(hi / lo, i / 40.0);
        f.row({d, fit.a * std::pow(d, -fit.b)});
    }
}

std::string join_notes(const std::vector<std::string>& notes) {
    std::string s;
    for (const auto& n : notes) s += n + "\n";
    return s;
}

// ---- figures ---------------------------------------------------------------

void fig1(Emitter& em) {
    const auto t = require(em.dir, "rmt.csv", em.figure);
    const auto ens = manifest_ensemble(em.dir, em.figure);
    const bool gue = ens == "GUE";
    auto dev = em.data("deviation", "D 1-c_avg se reference");
    auto var = em.data("variance", "D sigma2 se reference");
    std::vector<ScalingPoint> pd, pv;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double d = t.number(i, "D");
        const double c = t.number(i, "c_avg_mean");
        const double s2 = t.number(i, "sigma2_mean");
        const auto ref_c = gue ? d / (d + 1) : d / (d + 2);
        const auto ref_s = (gue ? 2.0 : 3.0) / (d * d);
        dev.row({d, 1 - c, nan_if_missing(t.maybe_number(i, "c_avg_se")), 1 - ref_c});
        var.row({d, s2, nan_if_missing(t.maybe_number(i, "sigma2_se")), ref_s});
        pd.push_back({d, c, t.maybe_number(i, "c_avg_se")});
        pv.push_back({d, s2, t.maybe_number(i, "sigma2_se")});
    }
    em.keep(dev);
    em.keep(var);
    std::vector<std::string> notes{"x: D (log)", "fig1_deviation: 1 - <c_avg> with the " + ens + " reference",
                                   "fig1_variance: <sigma^2> with the " + ens + " reference"};
    try_fit(pd, FitMode::DeviationFromUnity, 0.0, notes, "1 - c_avg = a D^-b");
    try_fit(pv, FitMode::PlainPower, 0.0, notes, "sigma2 = a D^-b");
    em.sidecar(join_notes(notes));
}

void fig2(Emitter& em) {
    const auto t = require(em.dir, "baker_spacings.csv", em.figure);
    std::vector<double> s;
    for (std::size_t i = 0; i < t.rows.size(); ++i) s.push_back(t.number(i, "s"));
    if (s.size() < 10) throw MissingInputs(em.figure + ": too few spacings in baker_spacings.csv", {"baker_spacings.csv"});
    const auto h = histogram(s);
    auto f = em.data("histogram", "s_center density wigner_goe poisson");
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double c = 0.5 * (h.edges[b] + h.edges[b + 1]);
        f.row({c, h.density[b], wigner_surmise_goe(c), std::exp(-c)});
    }
    em.keep(f);
    std::ostringstream notes;
    notes << "x: unfolded spacing s\ny: density\n"
          << "spacings: " << s.size() << "\nKS distance to Wigner (GOE): "
          << format_number(ks_distance(s, wigner_cdf_goe)) << "\nKS distance to Poisson: "
          << format_number(ks_distance(s, poisson_cdf)) << "\n";
    em.sidecar(notes.str());
}

void fig3(Emitter& em) {
    const auto t = require(em.dir, "baker_scaling.csv", em.figure);
    std::map<std::string, std::vector<std::size_t>> by_scheme;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& s = t.text(i, "scheme");
        if (!by_scheme.contains(s)) order.push_back(s);
        by_scheme[s].push_back(i);
    }
    std::vector<std::string> notes{"x: D (log)", "fig3_data: one block per scheme: D 1-c_avg sigma2",
                                   "fig3_fits: fitted power laws, same block order"};
    auto data = em.data("data", "D 1-c_avg sigma2");
    auto fits = em.data("fits", "D fitted_value");
    for (const auto& scheme : order) {
        data.comment("scheme " + scheme);
        std::vector<ScalingPoint> pc, ps;
        double lo = 1e300, hi = 0;
        for (auto i : by_scheme[scheme]) {
            const double d = t.number(i, "D");
            data.row({d, 1 - t.number(i, "c_avg"), t.number(i, "sigma2")});
            pc.push_back({d, t.number(i, "c_avg"), std::nullopt});
            ps.push_back({d, t.number(i, "sigma2"), std::nullopt});
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        data.blank();
        data.blank();
        if (auto f = try_fit(pc, FitMode::DeviationFromUnity, 200.0, notes, scheme + " 1 - c_avg")) {
            fits.comment(scheme + " 1 - c_avg");
            fit_curve(fits, *f, lo, hi);
            fits.blank();
            fits.blank();
        }
        if (auto f = try_fit(ps, FitMode::PlainPower, 200.0, notes, scheme + " sigma2")) {
            fits.comment(scheme + " sigma2");
            fit_curve(fits, *f, lo, hi);
            fits.blank();
            fits.blank();
        }
    }
    em.keep(data);
    em.keep(fits);
    em.sidecar(join_notes(notes));
}

void fig4(Emitter& em) {
    const auto t = require(em.dir, "ising_timeseries.csv", em.figure);
    auto f = em.data("series", "t c_t");
    std::string model;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.text(i, "model") != model) {
            if (!model.empty()) {
                f.blank();
                f.blank();
            }
            model = t.text(i, "model");
            f.comment("model " + model);
        }
        f.row({t.number(i, "t"), t.number(i, "c_t")});
    }
    em.keep(f);
    em.sidecar("x: t\ny: c(t), one block per model\n");
}

void ising_scaling(Emitter& em, const std::vector<std::string>& models) {
    const auto t = require(em.dir, "ising_scaling.csv", em.figure);
    std::vector<std::string> notes{"x: D (log)", "one block per model and sector: N D 1-c_avg sigma2"};
    auto f = em.data("data", "N D 1-c_avg sigma2");
    bool any = false;
    for (const auto& model : models) {
        for (const std::string sector : {"+", "-"}) {
            std::vector<ScalingPoint> pc, ps;
            f.comment("model " + model + " sector " + sector);
            for (std::size_t i = 0; i < t.rows.size(); ++i) {
                if (t.text(i, "model") != model || t.text(i, "sector") != sector) continue;
                const double d = t.number(i, "D");
                f.row({t.number(i, "N"), d, 1 - t.number(i, "c_avg"), t.number(i, "sigma2")});
                pc.push_back({d, t.number(i, "c_avg"), std::nullopt});
                ps.push_back({d, t.number(i, "sigma2"), std::nullopt});
            }
            f.blank();
            f.blank();
            if (pc.empty()) continue;
            any = true;
            try_fit(pc, FitMode::DeviationFromUnity, 200.0, notes, model + " " + sector + " 1 - c_avg");
            try_fit(ps, FitMode::PlainPower, 200.0, notes, model + " " + sector + " sigma2");
        }
    }
    if (!any) {
        std::string names;
        for (const auto& m : models) names += (names.empty() ? "" : ", ") + m;
        throw MissingInputs(em.figure + ": ising_scaling.csv has no rows for " + names, {"ising_scaling.csv"});
    }
    em.keep(f);
    em.sidecar(join_notes(notes));
}

SweepTable sweep_table(const Table& t) {
    SweepTable s;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        s.cells.push_back({t.number(i, "gamma"), static_cast<Index>(t.number(i, "D")), t.number(i, "c_avg_mean"),
                           t.maybe_number(i, "c_avg_se"), static_cast<std::int64_t>(t.number(i, "realizations")), 0});
    }
    return s;
}

Table rp_sweep(Emitter& em, const std::string& ensemble) {
    auto t = require(em.dir, "rp_sweep.csv", em.figure);
    const auto ens = manifest_ensemble(em.dir, em.figure);
    if (ens != ensemble) {
        throw MissingInputs(em.figure + " needs an " + ensemble + " sweep; " + em.dir.string() + " holds " + ens,
                            {"rp_sweep.csv"});
    }
    return t;
}

void rp_vs_gamma(Emitter& em, const std::string& ensemble) {
    const auto t = rp_sweep(em, ensemble);
    auto f = em.data("sweep", "gamma c_avg c_avg_se D^2*sigma2 D^2*sigma2_se");
    const auto table = sweep_table(t);
    for (Index d : table.dimensions()) {
        f.comment("D " + std::to_string(d));
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            if (static_cast<Index>(t.number(i, "D")) != d) continue;
            const double d2 = static_cast<double>(d) * static_cast<double>(d);
            f.row({t.number(i, "gamma"), t.number(i, "c_avg_mean"), nan_if_missing(t.maybe_number(i, "c_avg_se")),
                   d2 * t.number(i, "sigma2_mean"), d2 * nan_if_missing(t.maybe_number(i, "sigma2_se"))});
        }
        f.blank();
        f.blank();
    }
    em.keep(f);
    std::vector<std::string> notes{"x: gamma", "y: <c_avg> and D^2 <sigma^2>, one block per D"};
    const auto cross = crossing_detect(table);
    if (cross.found) {
        notes.push_back("crossing gamma* = " + format_number(cross.gamma_star) + " in [" + format_number(cross.low) +
                        ", " + format_number(cross.high) + "]");
    } else {
        notes.push_back("no crossing between adjacent sizes");
    }
    em.sidecar(join_notes(notes));
}

void fig8(Emitter& em) {
    const auto t = rp_sweep(em, "RP-GOE");
    const auto table = sweep_table(t);
    auto f = em.data("deviation", "lnD ln(1-c_avg)");
    std::vector<std::string> notes{"x: ln D", "y: ln(1 - <c_avg>), one block per gamma"};
    for (double g : table.gammas()) {
        f.comment("gamma " + format_number(g));
        std::vector<ScalingPoint> pts;
        for (const auto& c : table.cells) {
            if (c.gamma != g) continue;
            const double d = static_cast<double>(c.dimension);
            if (c.mean < 1) f.row({std::log(d), std::log(1 - c.mean)});
            pts.push_back({d, c.mean, c.standard_error});
        }
        f.blank();
        f.blank();
        try_fit(pts, FitMode::DeviationFromUnity, 0.0, notes, "gamma=" + format_number(g));
    }
    em.keep(f);
    em.sidecar(join_notes(notes));
}

void fig10(Emitter& em) {
    const auto t = require(em.dir, "rp_sweep.csv", em.figure);
    require(em.dir, "rp_collapse.csv", em.figure);
    const auto table = sweep_table(t);
    std::vector<std::string> notes{"x: (gamma - gamma0) ln D", "y: <c_avg>, one block per D"};
    for (double g0 : {1.5, 2.0, 2.5}) {
        const auto res = data_collapse(table, g0);
        auto f = em.data("gamma0_" + format_number(g0), "x c_avg gamma");
        Index current = 0;
        for (const auto& p : res.points) {
            if (p.dimension != current) {
                if (current != 0) {
                    f.blank();
                    f.blank();
                }
                current = p.dimension;
                f.comment("D " + std::to_string(current));
            }
            f.row({p.x, p.y, p.gamma});
        }
        em.keep(f);
        notes.push_back("gamma0=" + format_number(g0) + " quality " +
                        (res.quality ? format_number(*res.quality) : std::string("n/a")));
    }
    em.sidecar(join_notes(notes));
}

void fig11(Emitter& em) {
    const auto t = require(em.dir, "rp_timeseries.csv", em.figure);
    auto f = em.data("series", "t c_t_mean c_t_se");
    std::string gamma;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.text(i, "gamma") != gamma) {
            if (!gamma.empty()) {
                f.blank();
                f.blank();
            }
            gamma = t.text(i, "gamma");
            f.comment("gamma " + gamma);
        }
        f.row({t.number(i, "t"), t.number(i, "c_t_mean"), nan_if_missing(t.maybe_number(i, "c_t_se"))});
    }
    em.keep(f);
    em.sidecar("x: t\ny: ensemble mean c(t), one block per gamma\n");
}

void fig12(Emitter& em) {
    const auto t = require(em.dir, "rmt_fractions.csv", em.figure);
    const auto ens = manifest_ensemble(em.dir, em.figure);
    const bool gue = ens == "GUE";
    auto f = em.data("fractions", "D (1-c_avg)*D D^2*sigma2");
    std::string frac;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (t.text(i, "f") != frac) {
            if (!frac.empty()) {
                f.blank();
                f.blank();
            }
            frac = t.text(i, "f");
            f.comment("f " + frac);
        }
        const double d = t.number(i, "D");
        f.row({d, (1 - t.number(i, "c_avg_mean")) * d, d * d * t.number(i, "sigma2_mean")});
    }
    em.keep(f);
    em.sidecar(std::string("x: D\ny: D(1 - <c_avg>) and D^2 <sigma^2>, one block per f\n") +
               "large-D references: " + (gue ? "1 and 2" : "2 and 3") + "\n");
}

} // namespace

std::vector<fs::path> emit_figure(const fs::path& dir, const std::string& figure) {
    static const std::map<std::string, std::function<void(Emitter&)>> table{
        {"fig1", fig1},
        {"fig2", fig2},
        {"fig3", fig3},
        {"fig4", fig4},
        {"fig5", [](Emitter& em) { ising_scaling(em, {"integrable"}); }},
        {"fig6", [](Emitter& em) { ising_scaling(em, {"bch", "kim-huse"}); }},
        {"fig7", [](Emitter& em) { rp_vs_gamma(em, "RP-GOE"); }},
        {"fig8", fig8},
        {"fig9", [](Emitter& em) { rp_vs_gamma(em, "RP-GUE"); }},
        {"fig10", fig10},
        {"fig11", fig11},
        {"fig12", fig12},
    };
    const auto it = table.find(figure);
    if (it == table.end()) {
        throw MissingInputs("unknown figure '" + figure + "' (expected fig1..fig12)", {});
    }
    Emitter em{dir, dir / "figures", figure, {}};
    fs::create_directories(em.out);
    it->second(em);
    return em.written;
}

} // namespace relaxometer
