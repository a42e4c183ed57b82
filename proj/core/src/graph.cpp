#include "causalift/graph.hpp"

#include "causalift/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace causalift {

using nlohmann::json;

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::discovered: return "discovered";
        case Provenance::expert_added: return "expert-added";
        case Provenance::truth: return "truth";
    }
    return "discovered";
}

Provenance provenance_from_string(const std::string& text) {
    if (text == "discovered") return Provenance::discovered;
    if (text == "expert-added") return Provenance::expert_added;
    if (text == "truth") return Provenance::truth;
    throw DataError("unknown provenance '" + text + "'");
}

TimeSeriesGraph::TimeSeriesGraph(std::vector<std::string> variables, int tau_max, std::optional<double> alpha,
                                 std::vector<Link> links, std::vector<AuditEntry> audit)
    : variables_(std::move(variables)),
      tau_max_(tau_max),
      alpha_(alpha),
      links_(std::move(links)),
      audit_(std::move(audit)) {
    validate_and_sort();
}

void TimeSeriesGraph::validate_and_sort() {
    if (tau_max_ < 1) {
        throw DataError("graph tau_max must be >= 1");
    }
    std::set<std::string> names(variables_.begin(), variables_.end());
    if (names.size() != variables_.size()) {
        throw DataError("graph variable names must be unique");
    }
    for (const auto& l : links_) {
        if (!names.contains(l.source) || !names.contains(l.target)) {
            throw DataError("link " + l.source + "->" + l.target + " names an unknown variable");
        }
        // Lags >= 1 make the time-expanded graph acyclic.
        if (l.lag < 1 || l.lag > tau_max_) {
            throw DataError("link " + l.source + "->" + l.target + " has lag " + std::to_string(l.lag) +
                            " outside 1.." + std::to_string(tau_max_));
        }
        if (l.strength && !(std::abs(*l.strength) <= 1.0)) {
            throw DataError("link strength must lie in [-1, 1]");
        }
        if (l.provenance == Provenance::expert_added && l.strength) {
            throw DataError("expert-added links carry no strength");
        }
    }
    std::sort(links_.begin(), links_.end(), [this](const Link& a, const Link& b) {
        return std::tuple(index_of(a.target), index_of(a.source), a.lag) <
               std::tuple(index_of(b.target), index_of(b.source), b.lag);
    });
    for (std::size_t i = 1; i < links_.size(); ++i) {
        if (links_[i].key() == links_[i - 1].key()) {
            throw DataError("duplicate link " + links_[i].source + "->" + links_[i].target + " at lag " +
                            std::to_string(links_[i].lag));
        }
    }
}

int TimeSeriesGraph::index_of(const std::string& variable) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i] == variable) {
            return static_cast<int>(i);
        }
    }
    throw DataError("unknown graph variable '" + variable + "'");
}

bool TimeSeriesGraph::has_variable(const std::string& variable) const {
    return std::find(variables_.begin(), variables_.end(), variable) != variables_.end();
}

const Link* TimeSeriesGraph::find(const std::string& source, const std::string& target, int lag) const {
    for (const auto& l : links_) {
        if (l.source == source && l.target == target && l.lag == lag) {
            return &l;
        }
    }
    return nullptr;
}

std::vector<Link> TimeSeriesGraph::links_into(const std::string& target) const {
    std::vector<Link> out;
    for (const auto& l : links_) {
        if (l.target == target) {
            out.push_back(l);
        }
    }
    return out;
}

TimeSeriesGraph TimeSeriesGraph::with_audit(AuditEntry entry) const {
    auto audit = audit_;
    audit.push_back(std::move(entry));
    return TimeSeriesGraph(variables_, tau_max_, alpha_, links_, std::move(audit));
}

TimeSeriesGraph TimeSeriesGraph::with_tau_max(int tau_max) const {
    return TimeSeriesGraph(variables_, tau_max, alpha_, links_, audit_);
}

bool TimeSeriesGraph::same_structure(const TimeSeriesGraph& other) const {
    if (variables_ != other.variables_ || tau_max_ != other.tau_max_ || links_.size() != other.links_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < links_.size(); ++i) {
        if (links_[i].key() != other.links_[i].key()) {
            return false;
        }
    }
    return true;
}

TimeSeriesGraph apply_edits(const TimeSeriesGraph& graph, const EditSpec& edits) {
    std::set<std::tuple<std::string, std::string, int>> add_keys;
    for (const auto& a : edits.add) {
        add_keys.insert({a.source, a.target, a.lag});
    }
    for (std::size_t i = 0; i < edits.remove.size(); ++i) {
        const auto& r = edits.remove[i];
        if (add_keys.contains({r.source, r.target, r.lag})) {
            throw EditError("link " + r.source + "->" + r.target + " lag " + std::to_string(r.lag) +
                                " is both added and removed",
                            "remove[" + std::to_string(i) + "]");
        }
    }

    auto links = graph.links();
    for (std::size_t i = 0; i < edits.remove.size(); ++i) {
        const auto& r = edits.remove[i];
        auto it = std::find_if(links.begin(), links.end(), [&](const Link& l) {
            return l.source == r.source && l.target == r.target && l.lag == r.lag;
        });
        if (it == links.end()) {
            throw EditError("cannot remove missing link " + r.source + "->" + r.target + " at lag " +
                                std::to_string(r.lag),
                            "remove[" + std::to_string(i) + "]");
        }
        links.erase(it);
    }
    for (std::size_t i = 0; i < edits.add.size(); ++i) {
        const auto& a = edits.add[i];
        const std::string path = "add[" + std::to_string(i) + "]";
        if (!graph.has_variable(a.source)) {
            throw EditError("unknown variable '" + a.source + "'", path + ".source");
        }
        if (!graph.has_variable(a.target)) {
            throw EditError("unknown variable '" + a.target + "'", path + ".target");
        }
        if (a.lag < 1 || a.lag > graph.tau_max()) {
            throw EditError("lag " + std::to_string(a.lag) + " of " + a.source + "->" + a.target + " outside 1.." +
                                std::to_string(graph.tau_max()),
                            path + ".lag");
        }
        const bool exists = std::any_of(links.begin(), links.end(), [&](const Link& l) {
            return l.source == a.source && l.target == a.target && l.lag == a.lag;
        });
        if (exists) {
            throw EditError("link " + a.source + "->" + a.target + " at lag " + std::to_string(a.lag) +
                                " already exists",
                            path);
        }
        links.push_back({a.source, a.target, a.lag, std::nullopt, Provenance::expert_added});
    }
    auto audit = graph.audit();
    audit.push_back({"edit", to_json(edits)});
    return TimeSeriesGraph(graph.variables(), graph.tau_max(), graph.alpha(), std::move(links), std::move(audit));
}

EditSpec inverse(const EditSpec& edits) {
    EditSpec out = edits;
    std::swap(out.add, out.remove);
    return out;
}

std::vector<SummaryEntry> summary_graph(const TimeSeriesGraph& graph) {
    std::map<std::pair<int, int>, SummaryEntry> pairs;
    for (const auto& l : graph.links()) {
        auto& e = pairs[{graph.index_of(l.source), graph.index_of(l.target)}];
        e.source = l.source;
        e.target = l.target;
        e.lags.push_back(l.lag);
        if (l.strength) {
            e.max_abs_strength = std::max(e.max_abs_strength.value_or(0.0), std::abs(*l.strength));
        }
        e.has_expert_link = e.has_expert_link || l.provenance == Provenance::expert_added;
    }
    std::vector<SummaryEntry> out;
    out.reserve(pairs.size());
    for (auto& [key, e] : pairs) {
        std::sort(e.lags.begin(), e.lags.end());
        out.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <class T>
T field(const json& doc, const std::string& key, const std::string& path) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw SchemaError(path + (path.empty() ? "" : ".") + key, "missing field");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(path + (path.empty() ? "" : ".") + key, "wrong type");
    }
}

std::vector<EditEntry> edit_entries(const json& doc, const std::string& key) {
    std::vector<EditEntry> out;
    if (!doc.contains(key)) {
        return out;
    }
    if (!doc.at(key).is_array()) {
        throw SchemaError(key, "expected array");
    }
    std::size_t i = 0;
    for (const auto& e : doc.at(key)) {
        const std::string path = key + "[" + std::to_string(i++) + "]";
        EditEntry entry;
        entry.source = field<std::string>(e, "source", path);
        entry.target = field<std::string>(e, "target", path);
        entry.lag = field<int>(e, "lag", path);
        if (entry.lag < 1) {
            throw SchemaError(path + ".lag", "lag must be >= 1 (lag 0 is not a wildcard)");
        }
        if (e.contains("note")) {
            entry.note = field<std::string>(e, "note", path);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace

json to_json(const TimeSeriesGraph& graph) {
    json doc = json::object();
    doc["variables"] = graph.variables();
    doc["tau_max"] = graph.tau_max();
    doc["alpha"] = graph.alpha() ? json(*graph.alpha()) : json(nullptr);
    json links = json::array();
    for (const auto& l : graph.links()) {
        json jl = {{"source", l.source}, {"target", l.target}, {"lag", l.lag},
                   {"strength", l.strength ? json(*l.strength) : json(nullptr)},
                   {"provenance", to_string(l.provenance)}};
        links.push_back(std::move(jl));
    }
    doc["links"] = std::move(links);
    json audit = json::array();
    for (const auto& a : graph.audit()) {
        audit.push_back({{"kind", a.kind}, {"detail", a.detail}});
    }
    doc["audit"] = std::move(audit);
    return doc;
}

TimeSeriesGraph graph_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("$", "graph document must be an object");
    }
    const auto variables = field<std::vector<std::string>>(doc, "variables", "");
    const int tau_max = field<int>(doc, "tau_max", "");
    if (tau_max < 1) {
        throw SchemaError("tau_max", "must be >= 1");
    }
    std::optional<double> alpha;
    if (doc.contains("alpha") && !doc.at("alpha").is_null()) {
        alpha = field<double>(doc, "alpha", "");
    }
    std::set<std::string> names(variables.begin(), variables.end());
    if (names.size() != variables.size()) {
        throw SchemaError("variables", "names must be unique");
    }
    std::vector<Link> links;
    if (doc.contains("links")) {
        if (!doc.at("links").is_array()) {
            throw SchemaError("links", "expected array");
        }
        std::set<std::tuple<std::string, std::string, int>> seen;
        std::size_t i = 0;
        for (const auto& jl : doc.at("links")) {
            const std::string path = "links[" + std::to_string(i++) + "]";
            Link l;
            l.source = field<std::string>(jl, "source", path);
            l.target = field<std::string>(jl, "target", path);
            l.lag = field<int>(jl, "lag", path);
            if (!names.contains(l.source)) {
                throw SchemaError(path + ".source", "unknown variable '" + l.source + "'");
            }
            if (!names.contains(l.target)) {
                throw SchemaError(path + ".target", "unknown variable '" + l.target + "'");
            }
            if (l.lag < 1 || l.lag > tau_max) {
                throw SchemaError(path + ".lag", "lag must lie in 1.." + std::to_string(tau_max));
            }
            if (jl.contains("strength") && !jl.at("strength").is_null()) {
                l.strength = field<double>(jl, "strength", path);
                if (!(std::abs(*l.strength) <= 1.0)) {
                    throw SchemaError(path + ".strength", "must lie in [-1, 1]");
                }
            }
            try {
                l.provenance = provenance_from_string(field<std::string>(jl, "provenance", path));
            } catch (const DataError& e) {
                throw SchemaError(path + ".provenance", e.what());
            }
            if (l.provenance == Provenance::expert_added && l.strength) {
                throw SchemaError(path + ".strength", "expert-added links carry no strength");
            }
            if (!seen.insert(l.key()).second) {
                throw SchemaError(path, "duplicate link");
            }
            links.push_back(std::move(l));
        }
    }
    std::vector<AuditEntry> audit;
    if (doc.contains("audit")) {
        std::size_t i = 0;
        for (const auto& ja : doc.at("audit")) {
            const std::string path = "audit[" + std::to_string(i++) + "]";
            audit.push_back({field<std::string>(ja, "kind", path), ja.contains("detail") ? ja.at("detail") : json()});
        }
    }
    return TimeSeriesGraph(variables, tau_max, alpha, std::move(links), std::move(audit));
}

std::string graph_to_text(const TimeSeriesGraph& graph) { return to_json(graph).dump(2) + "\n"; }

TimeSeriesGraph graph_from_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError("$", std::string("invalid JSON: ") + e.what());
    }
    return graph_from_json(doc);
}

json to_json(const EditSpec& edits) {
    auto entries = [](const std::vector<EditEntry>& list) {
        json arr = json::array();
        for (const auto& e : list) {
            arr.push_back({{"source", e.source}, {"target", e.target}, {"lag", e.lag}, {"note", e.note}});
        }
        return arr;
    };
    return {{"author", edits.author},
            {"created_at", edits.created_at},
            {"add", entries(edits.add)},
            {"remove", entries(edits.remove)}};
}

EditSpec edits_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("$", "edit document must be an object");
    }
    EditSpec edits;
    if (doc.contains("author")) {
        edits.author = field<std::string>(doc, "author", "");
    }
    if (doc.contains("created_at")) {
        edits.created_at = field<std::string>(doc, "created_at", "");
    }
    edits.add = edit_entries(doc, "add");
    edits.remove = edit_entries(doc, "remove");
    std::set<std::tuple<std::string, std::string, int>> adds;
    for (const auto& a : edits.add) {
        adds.insert({a.source, a.target, a.lag});
    }
    for (std::size_t i = 0; i < edits.remove.size(); ++i) {
        const auto& r = edits.remove[i];
        if (adds.contains({r.source, r.target, r.lag})) {
            throw SchemaError("remove[" + std::to_string(i) + "]", "also listed in add");
        }
    }
    return edits;
}

json to_json(const std::vector<SummaryEntry>& summary) {
    json arr = json::array();
    for (const auto& e : summary) {
        arr.push_back({{"source", e.source},
                       {"target", e.target},
                       {"lags", e.lags},
                       {"max_abs_strength", e.max_abs_strength ? json(*e.max_abs_strength) : json(nullptr)},
                       {"expert", e.has_expert_link}});
    }
    return arr;
}

std::string to_dot(const std::vector<SummaryEntry>& summary, const std::vector<std::string>& variables) {
    std::ostringstream out;
    out << "digraph causal {\n  rankdir=LR;\n  node [shape=ellipse];\n";
    for (const auto& v : variables) {
        out << "  \"" << v << "\";\n";
    }
    for (const auto& e : summary) {
        std::string label;
        for (std::size_t i = 0; i < e.lags.size(); ++i) {
            label += (i ? "," : "") + std::to_string(e.lags[i]);
        }
        out << "  \"" << e.source << "\" -> \"" << e.target << "\" [label=\"" << label << "\"";
        if (e.has_expert_link) {
            out << ", color=blue, style=dashed";
        }
        if (e.max_abs_strength) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", *e.max_abs_strength);
            out << ", tooltip=\"|r|max=" << buf << "\"";
        }
        out << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace causalift
