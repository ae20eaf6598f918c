#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relaxometer/experiment.hpp"

namespace relaxometer {

namespace {

using nlohmann::json;

int line_at_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Wraps one JSON object and reports problems at the line of the offending key.
class Section {
  public:
    Section(const json& node, const std::string& text, const std::string& source, std::string path)
        : node_(node), text_(text), source_(source), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigFileError(source_, line_of(key), what);
    }

    int line_of(const std::string& key) const {
        const auto pos = text_.find("\"" + key + "\"");
        return pos == std::string::npos ? 1 : line_at_offset(text_, pos);
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    void allow_only(std::set<std::string> keys) const {
        for (const auto& [k, v] : node_.items()) {
            if (!keys.contains(k)) {
                fail(k, "unknown key '" + path_ + k + "'");
            }
        }
    }

    template <class T>
    T get(const std::string& key) const {
        if (!has(key)) {
            throw ConfigFileError(source_, 1, "missing required key '" + path_ + key + "'");
        }
        return convert<T>(key, node_.at(key));
    }

    template <class T>
    T get(const std::string& key, T fallback) const {
        return has(key) ? convert<T>(key, node_.at(key)) : fallback;
    }

    Section child(const std::string& key) const {
        const auto& n = node_.at(key);
        if (!n.is_object()) {
            fail(key, "'" + path_ + key + "' must be an object");
        }
        return {n, text_, source_, path_ + key + "."};
    }

    const json& raw(const std::string& key) const { return node_.at(key); }

    Fraction fraction(const std::string& key, const json& v) const {
        try {
            if (v.is_string()) {
                return Fraction::parse(v.get<std::string>());
            }
            if (v.is_number()) {
                return Fraction::from_double(v.get<double>());
            }
        } catch (const Error& e) {
            fail(key, e.what());
        }
        fail(key, "'" + path_ + key + "' must be a fraction such as \"1/2\"");
    }

  private:
    template <class T>
    T convert(const std::string& key, const json& v) const {
        try {
            if constexpr (std::is_same_v<T, Fraction>) {
                return fraction(key, v);
            } else if constexpr (std::is_same_v<T, std::vector<Fraction>>) {
                if (!v.is_array()) fail(key, "'" + path_ + key + "' must be a list");
                std::vector<Fraction> out;
                for (const auto& x : v) out.push_back(fraction(key, x));
                return out;
            } else {
                return v.get<T>();
            }
        } catch (const json::exception&) {
            fail(key, "'" + path_ + key + "' has the wrong type");
        }
    }

    const json& node_;
    const std::string& text_;
    const std::string& source_;
    std::string path_;
};

void require_positive_sizes(const Section& s, const std::string& key, const std::vector<Index>& sizes, Index lo = 2) {
    if (sizes.empty()) {
        s.fail(key, "'" + key + "' must not be empty");
    }
    for (Index d : sizes) {
        if (d < lo) {
            s.fail(key, "size " + std::to_string(d) + " is below the minimum " + std::to_string(lo));
        }
    }
}

void require_equal_length(const Section& s, std::size_t sizes, std::size_t reals) {
    if (sizes != reals) {
        s.fail("realizations", "sizes and realizations must have equal length (" + std::to_string(sizes) + " vs " +
                                   std::to_string(reals) + ")");
    }
}

void require_realizations(const Section& s, const std::vector<std::int64_t>& reals) {
    for (auto r : reals) {
        if (r < 1) {
            s.fail("realizations", "realizations must be at least 1");
        }
    }
}

void require_partition(const Section& s, const std::string& key, Fraction f, const std::vector<Index>& sizes) {
    if (!(f.num() < f.den())) {
        s.fail(key, "partition fraction " + f.str() + " must lie strictly between 0 and 1");
    }
    // A defaulted fraction has no line of its own; blame the size list instead.
    const std::string where = s.has(key) ? key : "sizes";
    for (Index d : sizes) {
        if (!f.divides(d)) {
            s.fail(where, "f*D is not an integer for f=" + f.str() + ", D=" + std::to_string(d));
        }
    }
}

void require_cap(Index d, Index cap) {
    if (d > cap) {
        throw ResourceLimit("dimension " + std::to_string(d) + " exceeds max_dimension " + std::to_string(cap));
    }
}

EnsembleKind ensemble(const Section& s, const std::string& key, bool rp) {
    const auto name = s.get<std::string>(key);
    EnsembleKind k;
    try {
        k = parse_ensemble_kind(name);
    } catch (const Error& e) {
        s.fail(key, e.what());
    }
    if (is_rp(k) != rp) {
        s.fail(key, rp ? "rp experiments need RP-GOE or RP-GUE" : "rmt experiments need GOE or GUE");
    }
    return k;
}

RmtExperiment parse_rmt(const Section& s, Index cap) {
    s.allow_only({"kind", "seed", "output", "max_dimension", "ensemble", "sizes", "realizations", "f", "fractions"});
    RmtExperiment e;
    e.ensemble = ensemble(s, "ensemble", false);
    e.sizes = s.get<std::vector<Index>>("sizes");
    e.realizations = s.get<std::vector<std::int64_t>>("realizations");
    require_positive_sizes(s, "sizes", e.sizes);
    require_equal_length(s, e.sizes.size(), e.realizations.size());
    require_realizations(s, e.realizations);
    if (s.has("fractions")) {
        if (s.has("f")) s.fail("fractions", "give either 'f' or 'fractions', not both");
        e.fractions = s.get<std::vector<Fraction>>("fractions");
        if (e.fractions.empty()) s.fail("fractions", "'fractions' must not be empty");
    } else {
        e.fractions = {s.get<Fraction>("f", Fraction(1, 2))};
    }
    for (const auto& f : e.fractions) {
        require_partition(s, s.has("fractions") ? "fractions" : "f", f, e.sizes);
    }
    for (Index d : e.sizes) require_cap(d, cap);
    return e;
}

Fraction scheme_fraction(const Section& s, const std::string& key, const json& v) {
    if (v.is_string()) {
        auto text = v.get<std::string>();
        // "(2/3,1/3)" names the scheme by both blocks.
        if (!text.empty() && text.front() == '(') {
            const auto comma = text.find(',');
            if (comma == std::string::npos || text.back() != ')') {
                s.fail(key, "malformed scheme '" + text + "'");
            }
            const Fraction left = s.fraction(key, text.substr(1, comma - 1));
            const Fraction right = s.fraction(key, text.substr(comma + 1, text.size() - comma - 2));
            if (!(left.complement() == right)) {
                s.fail(key, "scheme blocks in '" + text + "' do not sum to 1");
            }
            return left;
        }
    }
    return s.fraction(key, v);
}

BakerExperiment parse_baker(const Section& s, Index cap) {
    s.allow_only({"kind", "seed", "output", "max_dimension", "schemes", "sizes", "f", "phases", "parity_resolve",
                  "spectrum", "timeseries"});
    BakerExperiment e;
    if (s.has("schemes")) {
        if (!s.raw("schemes").is_array()) s.fail("schemes", "'schemes' must be a list");
        for (const auto& v : s.raw("schemes")) e.schemes.push_back(scheme_fraction(s, "schemes", v));
    }
    e.sizes = s.get<std::vector<Index>>("sizes", {});
    e.f = s.get<Fraction>("f", Fraction(1, 2));
    e.parity_resolve = s.get<bool>("parity_resolve", true);
    if (s.has("phases")) {
        const auto p = s.child("phases");
        p.allow_only({"alpha", "beta"});
        e.phases.alpha = p.get<double>("alpha", 0.5);
        e.phases.beta = p.get<double>("beta", 0.5);
    }
    if (!e.schemes.empty() || !e.sizes.empty()) {
        if (e.schemes.empty()) s.fail("sizes", "'sizes' given without 'schemes'");
        require_positive_sizes(s, "sizes", e.sizes);
        require_partition(s, "f", e.f, e.sizes);
        for (const auto& sc : e.schemes) {
            if (!(sc.num() < sc.den())) s.fail("schemes", "scheme fraction must lie strictly between 0 and 1");
            for (Index d : e.sizes) {
                if (!sc.divides(d)) {
                    s.fail("sizes", "D=" + std::to_string(d) + " does not fit scheme " + BernoulliScheme{sc}.name());
                }
                require_cap(d, cap);
            }
        }
    }
    if (s.has("spectrum")) {
        const auto p = s.child("spectrum");
        p.allow_only({"dimension", "scheme", "degree", "edge_trim"});
        BakerSpectrum sp;
        sp.dimension = p.get<Index>("dimension", sp.dimension);
        if (p.has("scheme")) sp.scheme = scheme_fraction(p, "scheme", p.raw("scheme"));
        sp.degree = p.get<int>("degree", sp.degree);
        sp.edge_trim = p.get<double>("edge_trim", sp.edge_trim);
        if (!sp.scheme.divides(sp.dimension)) p.fail("dimension", "spectrum dimension does not fit the scheme");
        if (sp.degree < 1) p.fail("degree", "unfolding degree must be positive");
        if (!(sp.edge_trim >= 0.0 && sp.edge_trim < 0.5)) p.fail("edge_trim", "edge_trim must lie in [0, 0.5)");
        require_cap(sp.dimension, cap);
        e.spectrum = sp;
    }
    if (s.has("timeseries")) {
        const auto p = s.child("timeseries");
        p.allow_only({"dimension", "scheme", "steps"});
        BakerTimeseries ts;
        ts.dimension = p.get<Index>("dimension", ts.dimension);
        if (p.has("scheme")) ts.scheme = scheme_fraction(p, "scheme", p.raw("scheme"));
        ts.steps = p.get<std::int64_t>("steps", ts.steps);
        if (!ts.scheme.divides(ts.dimension)) p.fail("dimension", "timeseries dimension does not fit the scheme");
        if (!e.f.divides(ts.dimension)) p.fail("dimension", "f*D is not an integer for the timeseries dimension");
        if (ts.steps < 0) p.fail("steps", "steps must be non-negative");
        require_cap(ts.dimension, cap);
        e.timeseries = ts;
    }
    if (e.schemes.empty() && !e.spectrum && !e.timeseries) {
        s.fail("kind", "baker experiment needs 'schemes'/'sizes', 'spectrum' or 'timeseries'");
    }
    return e;
}

NamedIsing ising_model(const Section& s, const json& v) {
    if (v.is_string()) {
        const auto name = v.get<std::string>();
        if (name == "bch") {
            const auto p = ising_presets::bch(2);
            return {name, p.hx, p.hz};
        }
        if (name == "integrable") {
            const auto p = ising_presets::integrable(2);
            return {name, p.hx, p.hz};
        }
        if (name == "kim-huse") {
            const auto p = ising_presets::kim_huse(2);
            return {name, p.hx, p.hz};
        }
        s.fail("models", "unknown Ising preset '" + name + "' (expected bch, integrable, kim-huse)");
    }
    if (v.is_object() && v.contains("name") && v.contains("hx") && v.contains("hz")) {
        try {
            return {v.at("name").get<std::string>(), v.at("hx").get<double>(), v.at("hz").get<double>()};
        } catch (const json::exception&) {
        }
    }
    s.fail("models", "an Ising model is a preset name or {\"name\", \"hx\", \"hz\"}");
}

IsingExperiment parse_ising(const Section& s) {
    s.allow_only({"kind", "seed", "output", "max_dimension", "models", "sites", "f", "partition_basis", "max_sites",
                  "timeseries"});
    IsingExperiment e;
    if (!s.has("models") || !s.raw("models").is_array()) s.fail("models", "'models' must be a list");
    for (const auto& v : s.raw("models")) e.models.push_back(ising_model(s, v));
    if (e.models.empty()) s.fail("models", "'models' must not be empty");
    e.sites = s.get<std::vector<int>>("sites", {});
    e.f = s.get<Fraction>("f", Fraction(1, 2));
    e.max_sites = s.get<int>("max_sites", e.max_sites);
    const auto basis = s.get<std::string>("partition_basis", "full");
    if (basis == "full") {
        e.partition_basis = PartitionBasis::Full;
    } else if (basis == "sector") {
        e.partition_basis = PartitionBasis::Sector;
    } else {
        s.fail("partition_basis", "partition_basis must be 'full' or 'sector'");
    }
    auto check_sites = [&](const Section& where, const std::string& key, int n) {
        if (n < 3) where.fail(key, "Ising chains need at least 3 sites for two non-empty parity sectors");
        if (n > e.max_sites) {
            throw ResourceLimit("Ising chain with N=" + std::to_string(n) + " exceeds max_sites " +
                                std::to_string(e.max_sites));
        }
        if (!e.f.divides(Index{1} << n)) where.fail(key, "f*D is not an integer for N=" + std::to_string(n));
    };
    for (int n : e.sites) check_sites(s, "sites", n);
    if (s.has("timeseries")) {
        const auto p = s.child("timeseries");
        p.allow_only({"sites", "t_max", "points", "sector"});
        IsingTimeseries ts;
        ts.sites = p.get<int>("sites", ts.sites);
        ts.t_max = p.get<double>("t_max", ts.t_max);
        ts.points = p.get<std::int64_t>("points", ts.points);
        ts.sector = p.get<int>("sector", ts.sector);
        check_sites(p, "sites", ts.sites);
        if (!(ts.t_max > 0.0)) p.fail("t_max", "t_max must be positive");
        if (ts.points < 2) p.fail("points", "points must be at least 2");
        if (ts.sector != 1 && ts.sector != -1) p.fail("sector", "sector must be +1 or -1");
        e.timeseries = ts;
    }
    if (e.sites.empty() && !e.timeseries) s.fail("sites", "ising experiment needs 'sites' or 'timeseries'");
    return e;
}

RpExperiment parse_rp(const Section& s, Index cap) {
    s.allow_only({"kind", "seed", "output", "max_dimension", "ensemble", "gammas", "sizes", "realizations", "f", "ipr",
                  "timeseries"});
    RpExperiment e;
    e.ensemble = ensemble(s, "ensemble", true);
    e.gammas = s.get<std::vector<double>>("gammas", {});
    e.sizes = s.get<std::vector<Index>>("sizes", {});
    e.realizations = s.get<std::vector<std::int64_t>>("realizations", {});
    e.f = s.get<Fraction>("f", Fraction(1, 2));
    e.ipr = s.get<bool>("ipr", false);
    for (double g : e.gammas) {
        if (!(g >= 0.0) || !std::isfinite(g)) s.fail("gammas", "gamma values must be finite and non-negative");
    }
    if (!e.gammas.empty() || !e.sizes.empty()) {
        if (e.gammas.empty()) s.fail("gammas", "'gammas' must not be empty");
        require_positive_sizes(s, "sizes", e.sizes);
        require_equal_length(s, e.sizes.size(), e.realizations.size());
        require_realizations(s, e.realizations);
        require_partition(s, "f", e.f, e.sizes);
        for (Index d : e.sizes) require_cap(d, cap);
    }
    if (s.has("timeseries")) {
        const auto p = s.child("timeseries");
        p.allow_only({"dimension", "gammas", "realizations", "t_max", "points"});
        RpTimeseries ts;
        ts.dimension = p.get<Index>("dimension", ts.dimension);
        ts.gammas = p.get<std::vector<double>>("gammas");
        ts.realizations = p.get<std::int64_t>("realizations", ts.realizations);
        ts.t_max = p.get<double>("t_max", ts.t_max);
        ts.points = p.get<std::int64_t>("points", ts.points);
        if (ts.gammas.empty()) p.fail("gammas", "'gammas' must not be empty");
        if (ts.realizations < 1) p.fail("realizations", "realizations must be at least 1");
        if (!(ts.t_max > 0.0)) p.fail("t_max", "t_max must be positive");
        if (ts.points < 2) p.fail("points", "points must be at least 2");
        if (!e.f.divides(ts.dimension)) p.fail("dimension", "f*D is not an integer for the timeseries dimension");
        require_cap(ts.dimension, cap);
        e.timeseries = ts;
    }
    if (e.gammas.empty() && !e.timeseries) s.fail("gammas", "rp experiment needs 'gammas'/'sizes' or 'timeseries'");
    return e;
}

OracleExperiment parse_oracle(const Section& s, Index cap) {
    s.allow_only({"kind", "seed", "output", "max_dimension", "dimension", "unitaries", "hamiltonians", "horizon",
                  "samples", "f"});
    OracleExperiment e;
    e.dimension = s.get<Index>("dimension", e.dimension);
    e.unitaries = s.get<int>("unitaries", e.unitaries);
    e.hamiltonians = s.get<int>("hamiltonians", e.hamiltonians);
    e.horizon = s.get<double>("horizon", e.horizon);
    e.samples = s.get<std::int64_t>("samples", e.samples);
    e.f = s.get<Fraction>("f", e.f);
    if (e.dimension < 2) s.fail("dimension", "dimension must be at least 2");
    if (e.unitaries < 0 || e.hamiltonians < 0 || e.unitaries + e.hamiltonians == 0) {
        s.fail("unitaries", "need at least one system");
    }
    if (!(e.horizon >= 1.0)) s.fail("horizon", "horizon must be at least 1");
    if (e.samples < 1) s.fail("samples", "samples must be positive");
    require_partition(s, "f", e.f, {e.dimension});
    require_cap(e.dimension, cap);
    return e;
}

MomentsExperiment parse_moments(const Section& s) {
    s.allow_only({"kind", "seed", "output", "max_dimension", "dimensions", "fields", "samples"});
    MomentsExperiment e;
    e.dimensions = s.get<std::vector<Index>>("dimensions");
    require_positive_sizes(s, "dimensions", e.dimensions);
    if (s.has("fields")) {
        e.fields.clear();
        for (const auto& name : s.get<std::vector<std::string>>("fields")) {
            if (name == "real") {
                e.fields.push_back(Field::Real);
            } else if (name == "complex") {
                e.fields.push_back(Field::Complex);
            } else {
                s.fail("fields", "field must be 'real' or 'complex'");
            }
        }
    }
    e.samples = s.get<std::int64_t>("samples", e.samples);
    if (e.samples < 1000) s.fail("samples", "samples must be at least 1000");
    return e;
}

} // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigFileError(source, line_at_offset(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON");
    }
    if (!root.is_object()) {
        throw ConfigFileError(source, 1, "configuration must be a JSON object");
    }
    const Section s(root, text, source, "");
    ExperimentConfig cfg;
    cfg.kind = s.get<std::string>("kind");
    cfg.seed = s.get<std::uint64_t>("seed", 0);
    cfg.output = s.get<std::string>("output", "results/" + cfg.kind);
    cfg.max_dimension = s.get<Index>("max_dimension", cfg.max_dimension);
    if (cfg.kind == "rmt") {
        cfg.body = parse_rmt(s, cfg.max_dimension);
    } else if (cfg.kind == "baker") {
        cfg.body = parse_baker(s, cfg.max_dimension);
    } else if (cfg.kind == "ising") {
        cfg.body = parse_ising(s);
    } else if (cfg.kind == "rp") {
        cfg.body = parse_rp(s, cfg.max_dimension);
    } else if (cfg.kind == "oracle") {
        cfg.body = parse_oracle(s, cfg.max_dimension);
    } else if (cfg.kind == "moments") {
        cfg.body = parse_moments(s);
    } else {
        s.fail("kind", "unknown experiment kind '" + cfg.kind + "' (expected rmt, baker, ising, rp, oracle, moments)");
    }
    cfg.echo = root.dump(2);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigFileError(path.string(), 1, "cannot open configuration file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

} // namespace relaxometer
