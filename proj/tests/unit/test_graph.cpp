#include "causalift/error.hpp"
#include "causalift/features.hpp"
#include "causalift/graph.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <set>

using namespace causalift;

namespace {

TimeSeriesGraph xy_graph() {
    return TimeSeriesGraph({"X", "Y"}, 3, 0.01,
                           {{"Y", "Y", 1, 0.5, Provenance::discovered}, {"X", "Y", 2, -0.3, Provenance::discovered}});
}

TimeSeriesGraph random_graph(std::mt19937_64& rng, int V, int tau) {
    std::vector<std::string> vars;
    for (int v = 0; v < V; ++v) {
        vars.push_back("v" + std::to_string(v));
    }
    std::vector<Link> links;
    std::bernoulli_distribution keep(0.15);
    std::uniform_real_distribution<double> r(-1.0, 1.0);
    for (const auto& s : vars) {
        for (const auto& t : vars) {
            for (int lag = 1; lag <= tau; ++lag) {
                if (keep(rng)) {
                    links.push_back({s, t, lag, r(rng), Provenance::discovered});
                }
            }
        }
    }
    return TimeSeriesGraph(vars, tau, 0.01, std::move(links));
}

}  // namespace

TEST_CASE("graph invariants are enforced on construction") {
    CHECK_THROWS_AS(TimeSeriesGraph({"X"}, 0, 0.01), DataError);
    CHECK_THROWS_AS(TimeSeriesGraph({"X", "X"}, 1, 0.01), DataError);
    CHECK_THROWS_AS(TimeSeriesGraph({"X"}, 2, 0.01, {{"X", "X", 0}}), DataError);
    CHECK_THROWS_AS(TimeSeriesGraph({"X"}, 2, 0.01, {{"X", "X", 3}}), DataError);
    CHECK_THROWS_AS(TimeSeriesGraph({"X"}, 2, 0.01, {{"X", "Q", 1}}), DataError);
    CHECK_THROWS_AS(TimeSeriesGraph({"X"}, 2, 0.01, {{"X", "X", 1}, {"X", "X", 1}}), DataError);
    CHECK_THROWS_AS(TimeSeriesGraph({"X"}, 2, 0.01, {{"X", "X", 1, 1.5}}), DataError);
    CHECK_THROWS_AS(TimeSeriesGraph({"X"}, 2, 0.01, {{"X", "X", 1, 0.2, Provenance::expert_added}}), DataError);
}

TEST_CASE("links are kept sorted by target, source and lag in variable order") {
    const TimeSeriesGraph g({"B", "A"}, 3, 0.01, {{"A", "A", 2}, {"B", "A", 1}, {"A", "B", 3}, {"A", "A", 1}});
    const auto& l = g.links();
    REQUIRE(l.size() == 4);
    CHECK(l[0].key() == std::tuple<std::string, std::string, int>{"A", "B", 3});
    CHECK(l[1].key() == std::tuple<std::string, std::string, int>{"B", "A", 1});
    CHECK(l[2].key() == std::tuple<std::string, std::string, int>{"A", "A", 1});
    CHECK(l[3].key() == std::tuple<std::string, std::string, int>{"A", "A", 2});
    CHECK(g.links_into("A").size() == 3);
    CHECK(g.find("A", "B", 3) != nullptr);
    CHECK(g.find("A", "B", 2) == nullptr);
}

TEST_CASE("apply_edits marks provenance and appends the audit") {
    const auto g = xy_graph();
    EditSpec e;
    e.author = "expert";
    e.add = {{"X", "Y", 1, "physics"}};
    e.remove = {{"Y", "Y", 1, ""}};
    const auto h = apply_edits(g, e);
    REQUIRE(h.find("X", "Y", 1));
    CHECK(h.find("X", "Y", 1)->provenance == Provenance::expert_added);
    CHECK_FALSE(h.find("X", "Y", 1)->strength.has_value());
    CHECK(h.find("Y", "Y", 1) == nullptr);
    REQUIRE_FALSE(h.audit().empty());
    CHECK(h.audit().back().kind == "edit");
    CHECK(h.audit().back().detail == to_json(e));
    CHECK(g.find("Y", "Y", 1) != nullptr);
}

TEST_CASE("empty edit leaves links unchanged") {
    const auto g = xy_graph();
    const auto h = apply_edits(g, EditSpec{});
    CHECK(h.links() == g.links());
    CHECK(h.audit().size() == g.audit().size() + 1);
}

TEST_CASE("invalid edits fail with the offending path") {
    const auto g = xy_graph();
    auto path_of = [&](const EditSpec& e) {
        try {
            apply_edits(g, e);
        } catch (const EditError& err) {
            return err.path();
        }
        return std::string("no error");
    };
    CHECK(path_of({"", "", {}, {{"X", "Y", 1, ""}}}) == "remove[0]");
    CHECK(path_of({"", "", {{"X", "Y", 2, ""}}, {}}) == "add[0]");
    CHECK(path_of({"", "", {{"X", "Y", 1, ""}, {"X", "Y", 4, ""}}, {}}) == "add[1].lag");
    CHECK(path_of({"", "", {{"Q", "Y", 1, ""}}, {}}) == "add[0].source");
    CHECK(path_of({"", "", {{"X", "Q", 1, ""}}, {}}) == "add[0].target");
    CHECK(path_of({"", "", {{"X", "X", 1, ""}}, {{"X", "X", 1, ""}}}) == "remove[0]");
}

TEST_CASE("edit then inverse restores the link set on random graphs") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 200; ++rep) {
        const auto g = random_graph(rng, 2 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 4));
        EditSpec e;
        for (const auto& l : g.links()) {
            if (rng() % 3 == 0) {
                e.remove.push_back({l.source, l.target, l.lag, ""});
            }
        }
        for (const auto& s : g.variables()) {
            for (const auto& t : g.variables()) {
                for (int lag = 1; lag <= g.tau_max(); ++lag) {
                    if (!g.find(s, t, lag) && rng() % 7 == 0) {
                        e.add.push_back({s, t, lag, ""});
                    }
                }
            }
        }
        const auto back = apply_edits(apply_edits(g, e), inverse(e));
        CHECK(back.same_structure(g));
    }
}

TEST_CASE("summary graph projects lags per pair") {
    const auto s = summary_graph(TimeSeriesGraph({"X", "Y"}, 3, 0.01, {{"X", "Y", 2, 0.4}, {"Y", "Y", 1, -0.7}}));
    REQUIRE(s.size() == 2);
    CHECK(s[0].source == "X");
    CHECK(s[0].lags == std::vector<int>{2});
    CHECK(s[1].source == "Y");
    CHECK(s[1].target == "Y");
    REQUIRE(s[1].max_abs_strength);
    CHECK(*s[1].max_abs_strength == doctest::Approx(0.7));

    const auto multi = summary_graph(TimeSeriesGraph({"X", "Y"}, 3, 0.01, {{"X", "Y", 3}, {"X", "Y", 1}}));
    REQUIRE(multi.size() == 1);
    CHECK(multi[0].lags == std::vector<int>{1, 3});
}

TEST_CASE("dot output labels lags and styles expert links") {
    const auto g = apply_edits(xy_graph(), EditSpec{"", "", {{"X", "X", 1, ""}}, {}});
    const auto dot = to_dot(summary_graph(g), g.variables());
    CHECK(dot.find("\"X\" -> \"Y\" [label=\"2\"") != std::string::npos);
    CHECK(dot.find("\"X\" -> \"X\" [label=\"1\", color=blue, style=dashed") != std::string::npos);
}

TEST_CASE("json and text round trips preserve the graph") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        auto g = random_graph(rng, 4, 3).with_audit({"note", {{"rep", rep}}});
        CHECK(graph_from_json(to_json(g)) == g);
        CHECK(graph_from_text(graph_to_text(g)) == g);
    }
}

TEST_CASE("graph and edit schema errors carry field paths") {
    auto doc = to_json(xy_graph());
    doc["links"][1]["lag"] = 9;
    try {
        graph_from_json(doc);
        FAIL("expected schema error");
    } catch (const SchemaError& e) {
        CHECK(e.path() == "links[1].lag");
    }
    const nlohmann::json bad_lag = {{"add", {{{"source", "X"}, {"target", "Y"}, {"lag", 0}}}}};
    try {
        edits_from_json(bad_lag);
        FAIL("expected schema error");
    } catch (const SchemaError& e) {
        CHECK(e.path() == "add[0].lag");
    }
    const nlohmann::json missing = {{"remove", {{{"source", "X"}, {"lag", 1}}}}};
    try {
        edits_from_json(missing);
        FAIL("expected schema error");
    } catch (const SchemaError& e) {
        CHECK(e.path() == "remove[0].target");
    }
    CHECK_THROWS_AS(graph_from_text("{"), SchemaError);
    const EditSpec e{"a", "2024-01-01", {{"X", "Y", 1, "n"}}, {{"Y", "Y", 1, ""}}};
    CHECK(edits_from_json(to_json(e)) == e);
}

TEST_CASE("shipped edit file turns the fixture graph into the expert graph") {
    const auto g = graph_from_json(testing::load_json(testing::source_path("configs/reference_graph.json")));
    CHECK(g.variables().size() == 8);
    CHECK(g.find("Cool_set", "In_Temp", 2) != nullptr);
    const auto edits = edits_from_json(testing::load_json(testing::source_path("configs/expert_edits.json")));
    const auto h = apply_edits(g, edits);
    CHECK(h.links_into("Hour").empty());
    CHECK(h.find("HVAC_Ener", "IT_Load", 1) == nullptr);
    for (const auto& [s, t] : std::vector<std::pair<std::string, std::string>>{
             {"In_Temp", "ITE_Ener"}, {"In_Temp", "HVAC_Ener"}, {"Out_Temp", "In_Temp"}, {"Out_Temp", "HVAC_Ener"}}) {
        REQUIRE(h.find(s, t, 1) != nullptr);
        CHECK(h.find(s, t, 1)->provenance == Provenance::expert_added);
    }
    CHECK(causal_lags(h, "In_Temp").size() == 6);
}
