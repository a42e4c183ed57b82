#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace causalift {

enum class Provenance { discovered, expert_added, truth };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& text);

/// Directed lagged link source_{t-lag} -> target_t.
struct Link {
    std::string source;
    std::string target;
    int lag = 1;
    std::optional<double> strength;
    Provenance provenance = Provenance::discovered;

    std::tuple<std::string, std::string, int> key() const { return {source, target, lag}; }
    friend bool operator==(const Link&, const Link&) = default;
};

struct AuditEntry {
    std::string kind;
    nlohmann::json detail;

    friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

/// Lagged causal graph over a fixed, ordered variable set.
///
/// All lags are >= 1, so the time-expanded graph is acyclic by construction.
/// Links are kept sorted by (target, source, lag) in variable order.
class TimeSeriesGraph {
public:
    TimeSeriesGraph(std::vector<std::string> variables, int tau_max, std::optional<double> alpha,
                    std::vector<Link> links = {}, std::vector<AuditEntry> audit = {});

    const std::vector<std::string>& variables() const noexcept { return variables_; }
    int tau_max() const noexcept { return tau_max_; }
    std::optional<double> alpha() const noexcept { return alpha_; }
    const std::vector<Link>& links() const noexcept { return links_; }
    const std::vector<AuditEntry>& audit() const noexcept { return audit_; }

    int index_of(const std::string& variable) const;
    bool has_variable(const std::string& variable) const;
    const Link* find(const std::string& source, const std::string& target, int lag) const;
    std::vector<Link> links_into(const std::string& target) const;

    TimeSeriesGraph with_audit(AuditEntry entry) const;
    TimeSeriesGraph with_tau_max(int tau_max) const;

    /// Same variables, tau_max and (source, target, lag) set.
    bool same_structure(const TimeSeriesGraph& other) const;

    friend bool operator==(const TimeSeriesGraph&, const TimeSeriesGraph&) = default;

private:
    void validate_and_sort();

    std::vector<std::string> variables_;
    int tau_max_;
    std::optional<double> alpha_;
    std::vector<Link> links_;
    std::vector<AuditEntry> audit_;
};

struct EditEntry {
    std::string source;
    std::string target;
    int lag = 1;
    std::string note;

    friend bool operator==(const EditEntry&, const EditEntry&) = default;
};

/// Expert add/remove instructions applied on top of a graph.
struct EditSpec {
    std::string author;
    std::string created_at;
    std::vector<EditEntry> add;
    std::vector<EditEntry> remove;

    bool empty() const { return add.empty() && remove.empty(); }
    friend bool operator==(const EditSpec&, const EditSpec&) = default;
};

/// Applies `edits` to a copy of `graph`. Removing a missing link, adding an
/// existing one, or an out-of-range lag throws EditError; nothing is silently skipped.
TimeSeriesGraph apply_edits(const TimeSeriesGraph& graph, const EditSpec& edits);

/// Swaps add and remove lists.
EditSpec inverse(const EditSpec& edits);

struct SummaryEntry {
    std::string source;
    std::string target;
    std::vector<int> lags;
    std::optional<double> max_abs_strength;
    bool has_expert_link = false;
};

/// Projection onto variable pairs with lag lists (process graph).
std::vector<SummaryEntry> summary_graph(const TimeSeriesGraph& graph);

nlohmann::json to_json(const TimeSeriesGraph& graph);
TimeSeriesGraph graph_from_json(const nlohmann::json& doc);
std::string graph_to_text(const TimeSeriesGraph& graph);
TimeSeriesGraph graph_from_text(const std::string& text);

nlohmann::json to_json(const EditSpec& edits);
EditSpec edits_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const std::vector<SummaryEntry>& summary);

/// Graphviz text; edge labels are lag lists, expert-added edges dashed blue.
std::string to_dot(const std::vector<SummaryEntry>& summary, const std::vector<std::string>& variables);

}  // namespace causalift
