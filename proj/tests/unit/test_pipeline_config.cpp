#include "causalift/error.hpp"
#include "causalift/pipeline.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace causalift;
using nlohmann::json;

namespace {

std::string schema_path(const json& doc, const std::filesystem::path& base = {}) {
    try {
        experiment_config_from_json(doc, base);
    } catch (const SchemaError& e) {
        return e.path();
    }
    return "no error";
}

}  // namespace

TEST_CASE("committed default experiment config") {
    const auto cfg = load_experiment_config(testing::source_path("configs/default_experiment.json"));
    REQUIRE(cfg.simulator);
    CHECK(to_json(*cfg.simulator) == to_json(default_spec(0)));
    CHECK(cfg.n_runs == 20);
    CHECK(cfg.targets == std::vector<std::string>{"ITE_Ener", "In_Temp"});
    CHECK(cfg.selectors.size() == 7);
    CHECK(cfg.families.size() == 4);
    CHECK(cfg.discovery.alpha == 0.01);
    CHECK(cfg.discovery.max_scan_lag == 24);
    CHECK(cfg.horizon == 5);
    CHECK_FALSE(cfg.edits.has_value());
    CHECK(cfg.output_dir.lexically_normal() == testing::source_path("results").lexically_normal());
}

TEST_CASE("defaults cover every selector and four families") {
    const ExperimentConfig cfg;
    CHECK(cfg.selectors == all_selectors());
    CHECK(cfg.families.size() == 4);
    CHECK(cfg.simulator.has_value());
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config JSON round trip") {
    ExperimentConfig cfg;
    cfg.n_runs = 3;
    cfg.edits = EditSpec{"x", "", {{"Out_Temp", "In_Temp", 1, ""}}, {}};
    cfg.tree_rule = ImportanceRule::zero;
    const auto doc = to_json(cfg);
    CHECK(to_json(experiment_config_from_json(doc)) == doc);
}

TEST_CASE("schema errors point at the offending key") {
    const json base = {{"n_runs", 2}};
    auto with = [&](const std::string& key, json value) {
        json d = base;
        d[key] = std::move(value);
        return d;
    };
    CHECK(schema_path(with("bogus", 1)) == "bogus");
    CHECK(schema_path(with("n_runs", "two")) == "n_runs");
    CHECK(schema_path(with("selectors", json::array({"all", "magic"}))) == "selectors[1]");
    CHECK(schema_path(with("families", json::array({"xgb"}))) == "families[0]");
    CHECK(schema_path(with("tree_rule", "median")) == "tree_rule");
    CHECK(schema_path(with("discovery", json{{"alpah", 0.1}})) == "discovery.alpah");
    CHECK(schema_path(with("edits", json{{"add", json::array({json{{"source", "a"}, {"lag", 1}}})}})) ==
          "edits.add[0].target");
    CHECK(schema_path(json{{"simulator", {{"variables", 3}}}}) == "simulator.variables");
    CHECK(schema_path(json::array()) == "$");
}

TEST_CASE("validation rejects inconsistent settings") {
    auto fails = [](const json& doc) {
        try {
            experiment_config_from_json(doc);
        } catch (const DataError&) {
            return true;
        }
        return false;
    };
    CHECK(fails({{"n_runs", 0}}));
    CHECK(fails({{"split_fraction", 1.0}}));
    CHECK(fails({{"targets", json::array()}}));
    CHECK(fails({{"selectors", {"all", "all"}}}));
    CHECK(fails({{"k_folds", 1}}));
    CHECK(fails({{"horizon", 0}}));
    CHECK(fails({{"pca_variance", 1.5}}));
    CHECK(fails({{"discovery", {{"alpha", 2.0}}}}));
    CHECK(fails({{"data_dir", "/definitely/not/here"}}));
}

TEST_CASE("relative paths resolve against the config file") {
    testing::TempDir dir("cfg");
    std::filesystem::create_directories(dir / "data");
    const json doc = {{"data_dir", "data"}, {"output_dir", "out"}, {"n_runs", 1}};
    std::ofstream(dir / "exp.json") << doc.dump();
    const auto cfg = load_experiment_config(dir / "exp.json");
    REQUIRE(cfg.data_dir);
    CHECK(*cfg.data_dir == dir / "data");
    CHECK(cfg.output_dir == dir / "out");
    CHECK_FALSE(cfg.simulator.has_value());
}
