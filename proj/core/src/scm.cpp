#include "causalift/scm.hpp"

#include "causalift/error.hpp"
#include "causalift/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

namespace causalift {

using nlohmann::json;

std::vector<TruthLink> ScmSpec::truth_links() const {
    std::set<TruthLink> links;
    for (const auto& eq : equations) {
        if (eq.kind == EquationKind::setpoint) {
            // Between scheduled changes the setpoint holds its previous value.
            links.insert({eq.target, eq.target, 1});
            continue;
        }
        if (eq.kind != EquationKind::structural) {
            continue;
        }
        for (const auto& term : eq.terms) {
            if (term.coef == 0.0) {
                continue;
            }
            for (const auto& in : term.inputs) {
                if (in.weight != 0.0) {
                    links.insert({in.source, eq.target, in.lag});
                }
            }
        }
    }
    return {links.begin(), links.end()};
}

int ScmSpec::max_lag() const {
    int out = 1;
    for (const auto& eq : equations) {
        for (const auto& term : eq.terms) {
            for (const auto& in : term.inputs) {
                out = std::max(out, in.lag);
            }
        }
    }
    return out;
}

const Equation& ScmSpec::equation(const std::string& target) const {
    for (const auto& eq : equations) {
        if (eq.target == target) {
            return eq;
        }
    }
    throw DataError("no equation for '" + target + "'");
}

Equation& ScmSpec::equation(const std::string& target) {
    return const_cast<Equation&>(static_cast<const ScmSpec&>(*this).equation(target));
}

void ScmSpec::validate() const {
    if (variables.empty() || variables.size() != equations.size()) {
        throw DataError("scm: need one equation per variable");
    }
    std::set<std::string> names(variables.begin(), variables.end());
    if (names.size() != variables.size()) {
        throw DataError("scm: duplicate variable names");
    }
    for (std::size_t i = 0; i < variables.size(); ++i) {
        const auto& eq = equations[i];
        if (eq.target != variables[i]) {
            throw DataError("scm: equation " + std::to_string(i) + " targets '" + eq.target + "', expected '" +
                            variables[i] + "'");
        }
        if (!(eq.noise_std >= 0.0)) {
            throw DataError("scm: noise std of '" + eq.target + "' must be >= 0");
        }
        if (eq.kind == EquationKind::clock && eq.clock_period < 1) {
            throw DataError("scm: clock period must be >= 1");
        }
        for (const auto& term : eq.terms) {
            for (const auto& in : term.inputs) {
                if (!names.contains(in.source)) {
                    throw DataError("scm: '" + eq.target + "' depends on unknown '" + in.source + "'");
                }
                if (in.lag < 1) {
                    throw DataError("scm: lag of " + in.source + " -> " + eq.target + " must be >= 1");
                }
            }
        }
        for (const auto& f : eq.forcings) {
            if (!(f.period > 0.0)) {
                throw DataError("scm: forcing period must be > 0");
            }
        }
    }
    if (!names.contains(policy.variable) || equation(policy.variable).kind != EquationKind::setpoint) {
        throw DataError("scm: policy variable '" + policy.variable + "' must be a setpoint equation");
    }
    if (policy.min_spacing < max_lag()) {
        throw DataError("scm: policy min spacing must be >= the largest equation lag");
    }
    if (!(policy.max_value >= policy.min_value) || !(policy.changes_per_year >= 0.0) || policy.steps_per_year < 1) {
        throw DataError("scm: invalid intervention policy");
    }
    if (burn_in < 0) {
        throw DataError("scm: burn_in must be >= 0");
    }
}

ScmSpec default_spec(std::uint64_t seed) {
    ScmSpec spec;
    spec.seed = seed;
    spec.variables = {"Hour", "Out_Temp", "Out_Hum", "IT_Load", "Cool_set", "In_Temp", "ITE_Ener", "HVAC_Ener"};

    auto linear = [](std::string source, int lag, double coef) {
        return Term{coef, {TermInput{std::move(source), lag, 1.0}}, Squash::none};
    };

    Equation hour;
    hour.target = "Hour";
    hour.unit = "h";
    hour.kind = EquationKind::clock;
    hour.clock_period = 24;

    // AR(1) around a seasonal cycle (amplitude ~2 C at equilibrium) plus a diurnal ramp.
    Equation out_temp;
    out_temp.target = "Out_Temp";
    out_temp.unit = "C";
    out_temp.intercept = 1.825;
    out_temp.terms = {linear("Out_Temp", 1, 0.8), linear("Hour", 1, 0.05)};
    out_temp.forcings = {Forcing{0.4, 8760.0, -std::numbers::pi / 2.0}};
    out_temp.noise_std = 1.5;
    out_temp.initial = 12.0;

    Equation out_hum;
    out_hum.target = "Out_Hum";
    out_hum.unit = "%";
    out_hum.intercept = 13.2;
    out_hum.terms = {linear("Out_Hum", 1, 0.8), linear("Out_Temp", 1, -0.1)};
    out_hum.noise_std = 1.5;
    out_hum.initial = 60.0;

    Equation it_load;
    it_load.target = "IT_Load";
    it_load.unit = "kW";
    it_load.intercept = 40.0;
    it_load.terms = {linear("Hour", 1, 1.0)};
    it_load.noise_std = 2.0;
    it_load.initial = 50.0;

    Equation cool_set;
    cool_set.target = "Cool_set";
    cool_set.unit = "C";
    cool_set.kind = EquationKind::setpoint;
    cool_set.initial = 22.5;

    // In_Temp[t] = In_Temp[t-1] + 0.6 (Cool_set[t-2] - In_Temp[t-1]) + heat gains:
    // a setpoint step decays by 0.4 per step and settles within ~5 steps.
    Equation in_temp;
    in_temp.target = "In_Temp";
    in_temp.unit = "C";
    in_temp.terms = {linear("In_Temp", 1, 0.4), linear("Cool_set", 2, 0.6), linear("Out_Temp", 1, 0.05),
                     linear("IT_Load", 1, 0.01)};
    in_temp.noise_std = 0.3;
    in_temp.initial = 24.0;

    Equation ite;
    ite.target = "ITE_Ener";
    ite.unit = "kW";
    ite.intercept = 20.0;
    ite.terms = {linear("IT_Load", 1, 0.5), linear("In_Temp", 1, 0.1)};
    ite.noise_std = 1.0;
    ite.initial = 50.0;

    Equation hvac;
    hvac.target = "HVAC_Ener";
    hvac.unit = "kW";
    hvac.intercept = 8.0;
    hvac.terms = {Term{4.0, {TermInput{"In_Temp", 1, 1.0}, TermInput{"Cool_set", 1, -1.0}}, Squash::relu},
                  linear("Out_Temp", 1, 0.5)};
    hvac.noise_std = 1.0;
    hvac.initial = 20.0;

    spec.equations = {hour, out_temp, out_hum, it_load, cool_set, in_temp, ite, hvac};
    spec.policy = InterventionPolicy{};
    spec.horizon_steps = 17520;
    spec.burn_in = 100;
    return spec;
}

ScmSpec without_noise(ScmSpec spec) {
    for (auto& eq : spec.equations) {
        eq.noise_std = 0.0;
    }
    return spec;
}

TimeSeriesGraph truth_graph(const ScmSpec& spec) {
    std::vector<Link> links;
    for (const auto& l : spec.truth_links()) {
        links.push_back({l.source, l.target, l.lag, std::nullopt, Provenance::truth});
    }
    return TimeSeriesGraph(spec.variables, spec.max_lag(), std::nullopt, std::move(links));
}

namespace {

std::vector<InterventionEvent> draw_schedule(const ScmSpec& spec, std::mt19937_64& rng) {
    std::vector<InterventionEvent> events;
    const auto& p = spec.policy;
    if (p.changes_per_year <= 0.0) {
        return events;
    }
    const double mean_gap = static_cast<double>(p.steps_per_year) / p.changes_per_year;
    const double extra = std::max(mean_gap - p.min_spacing, 1.0);
    std::exponential_distribution<double> gap(1.0 / extra);
    std::uniform_real_distribution<double> level(p.min_value, p.max_value);
    double t = static_cast<double>(p.min_spacing) + gap(rng);
    while (t < static_cast<double>(spec.horizon_steps)) {
        events.push_back({static_cast<std::size_t>(t), p.variable, level(rng)});
        t = std::floor(t) + static_cast<double>(p.min_spacing) + gap(rng);
    }
    return events;
}

}  // namespace

std::pair<TimeSeriesDataset, GroundTruth> simulate(const ScmSpec& spec) {
    spec.validate();
    const int max_lag = spec.max_lag();
    if (spec.horizon_steps < 10 * max_lag || spec.horizon_steps < 2) {
        throw DataError("scm: horizon must be >= 10 x the largest lag");
    }
    const auto V = static_cast<Eigen::Index>(spec.variables.size());
    const long total = spec.burn_in + spec.horizon_steps;

    std::mt19937_64 schedule_rng(derive_seed(spec.seed, 1));
    std::mt19937_64 noise_rng(derive_seed(spec.seed, 2));
    std::normal_distribution<double> normal(0.0, 1.0);

    const auto events = draw_schedule(spec, schedule_rng);
    std::uniform_real_distribution<double> level(spec.policy.min_value, spec.policy.max_value);
    const double initial_setpoint = level(schedule_rng);

    // Resolve term inputs to column indices once.
    struct ResolvedInput {
        Eigen::Index col;
        int lag;
        double weight;
    };
    std::vector<std::vector<std::vector<ResolvedInput>>> resolved(spec.equations.size());
    auto col_of = [&](const std::string& name) {
        return static_cast<Eigen::Index>(std::find(spec.variables.begin(), spec.variables.end(), name) -
                                         spec.variables.begin());
    };
    for (std::size_t e = 0; e < spec.equations.size(); ++e) {
        for (const auto& term : spec.equations[e].terms) {
            std::vector<ResolvedInput> ins;
            for (const auto& in : term.inputs) {
                ins.push_back({col_of(in.source), in.lag, in.weight});
            }
            resolved[e].push_back(std::move(ins));
        }
    }

    Matrix state(total, V);
    std::size_t next_event = 0;
    double setpoint = initial_setpoint;
    for (long s = 0; s < total; ++s) {
        const long t = s - spec.burn_in;
        while (t >= 0 && next_event < events.size() && static_cast<long>(events[next_event].time_index) == t) {
            setpoint = events[next_event].new_value;
            ++next_event;
        }
        for (Eigen::Index v = 0; v < V; ++v) {
            const auto& eq = spec.equations[static_cast<std::size_t>(v)];
            double value = 0.0;
            switch (eq.kind) {
                case EquationKind::clock: {
                    const long P = eq.clock_period;
                    value = static_cast<double>(((t % P) + P) % P);
                    break;
                }
                case EquationKind::setpoint:
                    value = setpoint;
                    break;
                case EquationKind::structural: {
                    if (s < max_lag) {
                        value = eq.initial;
                        break;
                    }
                    value = eq.intercept;
                    for (std::size_t k = 0; k < eq.terms.size(); ++k) {
                        double inner = 0.0;
                        for (const auto& in : resolved[static_cast<std::size_t>(v)][k]) {
                            inner += in.weight * state(s - in.lag, in.col);
                        }
                        if (eq.terms[k].squash == Squash::relu) {
                            inner = std::max(0.0, inner);
                        }
                        value += eq.terms[k].coef * inner;
                    }
                    for (const auto& f : eq.forcings) {
                        value += f.amplitude *
                                 std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / f.period + f.phase);
                    }
                    value += eq.noise_std * normal(noise_rng);
                    break;
                }
            }
            if (!std::isfinite(value) || std::abs(value) > 1e12) {
                throw InstabilityError(eq.target, static_cast<std::size_t>(std::max<long>(t, 0)),
                                       "scm: '" + eq.target + "' became non-finite or exploded at step " +
                                           std::to_string(t));
            }
            state(s, v) = value;
        }
    }

    std::vector<Variable> variables;
    for (const auto& eq : spec.equations) {
        variables.push_back({eq.target, eq.unit});
    }
    TimeSeriesDataset ds(std::move(variables), state.bottomRows(spec.horizon_steps), spec.step, events, spec.seed);
    GroundTruth truth{truth_graph(spec), events};
    return {std::move(ds), std::move(truth)};
}

std::vector<std::pair<TimeSeriesDataset, GroundTruth>> run_batch(const ScmSpec& spec, int n_runs, int threads) {
    if (n_runs < 1) {
        throw DataError("run_batch: n_runs must be >= 1");
    }
    std::vector<std::optional<std::pair<TimeSeriesDataset, GroundTruth>>> slots(static_cast<std::size_t>(n_runs));
    parallel_for(slots.size(), threads, [&](std::size_t i) {
        ScmSpec run_spec = spec;
        run_spec.seed = spec.seed + i;
        try {
            slots[i] = simulate(run_spec);
        } catch (const InstabilityError& e) {
            throw InstabilityError(e.variable(), e.step(), "run " + std::to_string(i) + ": " + e.what());
        }
    });
    std::vector<std::pair<TimeSeriesDataset, GroundTruth>> out;
    out.reserve(slots.size());
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Spec file (JSON)

namespace {

std::string kind_name(EquationKind k) {
    switch (k) {
        case EquationKind::structural: return "structural";
        case EquationKind::clock: return "clock";
        case EquationKind::setpoint: return "setpoint";
    }
    return "structural";
}

EquationKind kind_from(const std::string& s, const std::string& path) {
    if (s == "structural") return EquationKind::structural;
    if (s == "clock") return EquationKind::clock;
    if (s == "setpoint") return EquationKind::setpoint;
    throw SchemaError(path, "unknown equation kind '" + s + "'");
}

template <class T>
T get_or(const json& doc, const std::string& key, T fallback, const std::string& path) {
    if (!doc.contains(key)) {
        return fallback;
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(path + "." + key, "wrong type");
    }
}

}  // namespace

json to_json(const ScmSpec& spec) {
    json eqs = json::array();
    for (const auto& eq : spec.equations) {
        json terms = json::array();
        for (const auto& term : eq.terms) {
            json inputs = json::array();
            for (const auto& in : term.inputs) {
                inputs.push_back({{"source", in.source}, {"lag", in.lag}, {"weight", in.weight}});
            }
            terms.push_back({{"coef", term.coef},
                             {"squash", term.squash == Squash::relu ? "relu" : "none"},
                             {"inputs", inputs}});
        }
        json forcings = json::array();
        for (const auto& f : eq.forcings) {
            forcings.push_back({{"amplitude", f.amplitude}, {"period", f.period}, {"phase", f.phase}});
        }
        json je = {{"target", eq.target}, {"unit", eq.unit},           {"kind", kind_name(eq.kind)},
                   {"intercept", eq.intercept}, {"noise_std", eq.noise_std}, {"initial", eq.initial},
                   {"terms", terms},      {"forcings", forcings}};
        if (eq.kind == EquationKind::clock) {
            je["clock_period"] = eq.clock_period;
        }
        eqs.push_back(std::move(je));
    }
    return {{"variables", spec.variables},
            {"horizon_steps", spec.horizon_steps},
            {"burn_in", spec.burn_in},
            {"seed", spec.seed},
            {"step", spec.step},
            {"policy",
             {{"variable", spec.policy.variable},
              {"changes_per_year", spec.policy.changes_per_year},
              {"min_value", spec.policy.min_value},
              {"max_value", spec.policy.max_value},
              {"min_spacing", spec.policy.min_spacing},
              {"steps_per_year", spec.policy.steps_per_year}}},
            {"equations", eqs}};
}

ScmSpec scm_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("$", "scm spec must be an object");
    }
    ScmSpec spec;
    try {
        spec.variables = doc.at("variables").get<std::vector<std::string>>();
    } catch (const json::exception&) {
        throw SchemaError("variables", "missing or not a list of names");
    }
    spec.horizon_steps = get_or(doc, "horizon_steps", 17520, "");
    spec.burn_in = get_or(doc, "burn_in", 100, "");
    spec.seed = get_or<std::uint64_t>(doc, "seed", 0, "");
    spec.step = get_or<std::string>(doc, "step", "1h", "");
    if (doc.contains("policy")) {
        const auto& p = doc.at("policy");
        spec.policy.variable = get_or<std::string>(p, "variable", spec.policy.variable, "policy");
        spec.policy.changes_per_year = get_or(p, "changes_per_year", spec.policy.changes_per_year, "policy");
        spec.policy.min_value = get_or(p, "min_value", spec.policy.min_value, "policy");
        spec.policy.max_value = get_or(p, "max_value", spec.policy.max_value, "policy");
        spec.policy.min_spacing = get_or(p, "min_spacing", spec.policy.min_spacing, "policy");
        spec.policy.steps_per_year = get_or(p, "steps_per_year", spec.policy.steps_per_year, "policy");
    }
    if (!doc.contains("equations") || !doc.at("equations").is_array()) {
        throw SchemaError("equations", "missing or not an array");
    }
    std::size_t i = 0;
    for (const auto& je : doc.at("equations")) {
        const std::string path = "equations[" + std::to_string(i++) + "]";
        Equation eq;
        eq.target = get_or<std::string>(je, "target", "", path);
        if (eq.target.empty()) {
            throw SchemaError(path + ".target", "missing");
        }
        eq.unit = get_or<std::string>(je, "unit", "", path);
        eq.kind = kind_from(get_or<std::string>(je, "kind", "structural", path), path + ".kind");
        eq.intercept = get_or(je, "intercept", 0.0, path);
        eq.noise_std = get_or(je, "noise_std", 0.0, path);
        eq.initial = get_or(je, "initial", 0.0, path);
        eq.clock_period = get_or(je, "clock_period", 24, path);
        std::size_t ti = 0;
        for (const auto& jt : je.value("terms", json::array())) {
            const std::string tpath = path + ".terms[" + std::to_string(ti++) + "]";
            Term term;
            term.coef = get_or(jt, "coef", 0.0, tpath);
            const auto squash = get_or<std::string>(jt, "squash", "none", tpath);
            if (squash != "none" && squash != "relu") {
                throw SchemaError(tpath + ".squash", "expected none or relu");
            }
            term.squash = squash == "relu" ? Squash::relu : Squash::none;
            std::size_t ii = 0;
            for (const auto& jin : jt.value("inputs", json::array())) {
                const std::string ipath = tpath + ".inputs[" + std::to_string(ii++) + "]";
                TermInput in;
                in.source = get_or<std::string>(jin, "source", "", ipath);
                in.lag = get_or(jin, "lag", 1, ipath);
                in.weight = get_or(jin, "weight", 1.0, ipath);
                if (in.lag < 1) {
                    throw SchemaError(ipath + ".lag", "lags must be >= 1");
                }
                term.inputs.push_back(std::move(in));
            }
            eq.terms.push_back(std::move(term));
        }
        for (const auto& jf : je.value("forcings", json::array())) {
            eq.forcings.push_back({get_or(jf, "amplitude", 0.0, path), get_or(jf, "period", 1.0, path),
                                   get_or(jf, "phase", 0.0, path)});
        }
        spec.equations.push_back(std::move(eq));
    }
    try {
        spec.validate();
    } catch (const DataError& e) {
        throw SchemaError("$", e.what());
    }
    return spec;
}

ScmSpec load_scm_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    return scm_from_json(doc);
}

}  // namespace causalift
