#pragma once

#include "causalift/dataset.hpp"
#include "causalift/graph.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace causalift {

struct TermInput {
    std::string source;
    int lag = 1;
    double weight = 1.0;
};

enum class Squash { none, relu };

/// coef * squash(sum_i weight_i * source_i[t - lag_i])
struct Term {
    double coef = 0.0;
    std::vector<TermInput> inputs;
    Squash squash = Squash::none;
};

/// amplitude * sin(2 pi t / period + phase); exogenous forcing, not a graph link.
struct Forcing {
    double amplitude = 0.0;
    double period = 1.0;
    double phase = 0.0;
};

enum class EquationKind {
    structural,  ///< intercept + terms + forcings + Gaussian noise
    clock,       ///< t mod period, no parents
    setpoint     ///< holds its previous value except at scheduled changes (self-link at lag 1)
};

struct Equation {
    std::string target;
    std::string unit;
    EquationKind kind = EquationKind::structural;
    double intercept = 0.0;
    std::vector<Term> terms;
    std::vector<Forcing> forcings;
    double noise_std = 0.0;
    double initial = 0.0;
    int clock_period = 24;
};

struct InterventionPolicy {
    std::string variable = "Cool_set";
    double changes_per_year = 8.0;
    double min_value = 18.0;
    double max_value = 27.0;
    int min_spacing = 240;
    int steps_per_year = 8760;
};

struct TruthLink {
    std::string source;
    std::string target;
    int lag = 1;

    friend auto operator<=>(const TruthLink&, const TruthLink&) = default;
};

/// Structural causal model over lagged parents with scheduled setpoint changes.
struct ScmSpec {
    std::vector<std::string> variables;
    std::vector<Equation> equations;  // one per variable, same order
    InterventionPolicy policy;
    int horizon_steps = 17520;
    int burn_in = 100;
    std::uint64_t seed = 0;
    std::string step = "1h";

    /// Nonzero lagged dependencies, derived from the equations; a setpoint depends on its own lag 1.
    std::vector<TruthLink> truth_links() const;
    int max_lag() const;
    const Equation& equation(const std::string& target) const;
    Equation& equation(const std::string& target);
    /// Throws DataError on contract violations (names, lags >= 1, noise >= 0, spacing).
    void validate() const;
};

struct GroundTruth {
    TimeSeriesGraph graph;
    std::vector<InterventionEvent> interventions;
};

/// Data-center-like default model (8 variables, 2 years hourly).
ScmSpec default_spec(std::uint64_t seed);

/// Deterministic in spec.seed; drops `burn_in` leading steps.
std::pair<TimeSeriesDataset, GroundTruth> simulate(const ScmSpec& spec);

/// Run i uses seed spec.seed + i; runs are independent and share one truth graph.
std::vector<std::pair<TimeSeriesDataset, GroundTruth>> run_batch(const ScmSpec& spec, int n_runs,
                                                                 int threads = 0);

/// Same spec with every noise std set to zero; forcings and the setpoint schedule stay.
ScmSpec without_noise(ScmSpec spec);

TimeSeriesGraph truth_graph(const ScmSpec& spec);

nlohmann::json to_json(const ScmSpec& spec);
ScmSpec scm_from_json(const nlohmann::json& doc);
ScmSpec load_scm_spec(const std::filesystem::path& path);

}  // namespace causalift
