#include "causalift/features.hpp"
#include "causalift/scm.hpp"
#include "causalift/service.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>
#include <tuple>

using namespace causalift;
using nlohmann::json;

namespace {

struct Fixture {
    ScmSpec spec;
    TimeSeriesGraph graph;
    TimeSeriesDataset data;
};

Fixture make_fixture() {
    auto spec = default_spec(1);
    spec.horizon_steps = 3000;
    auto graph = truth_graph(spec);
    auto data = simulate(spec).first;
    return {spec, std::move(graph), std::move(data)};
}

/// Service plus a live HTTP server on a free port.
struct LiveServer {
    explicit LiveServer(GraphService& service) : server(service) {
        port = server.bind("127.0.0.1", 0);
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
        for (int i = 0; i < 100 && !client->Get("/api/graph"); ++i) {
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    }
    ~LiveServer() {
        server.stop();
        thread.join();
    }

    httplib::Result post(const std::string& path, const json& body) {
        return client->Post(path.c_str(), body.dump(), "application/json");
    }

    HttpServer server;
    int port = -1;
    std::thread thread;
    std::unique_ptr<httplib::Client> client;
};

json edit(const std::string& source, const std::string& target, int lag) {
    return {{"author", "test"}, {"add", {{{"source", source}, {"target", target}, {"lag", lag}}}}};
}

}  // namespace

TEST_CASE("graph and summary endpoints") {
    auto fx = make_fixture();
    GraphService service(fx.graph, fx.data);
    LiveServer live(service);
    auto res = live.client->Get("/api/graph");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Content-Type") == "application/json");
    CHECK(graph_from_json(json::parse(res->body)) == fx.graph);

    res = live.client->Get("/api/summary");
    REQUIRE(res);
    const auto summary = json::parse(res->body);
    CHECK(summary["version"] == 0);
    CHECK(summary["variables"].size() == 8);
    bool labelled = false;
    for (const auto& e : summary["summary"]) {
        labelled |= e["source"] == "Cool_set" && e["target"] == "In_Temp" && e["lags"] == json::array({2});
    }
    CHECK(labelled);

    res = live.client->Get("/api/nothing");
    REQUIRE(res);
    CHECK(res->status == 404);
    CHECK(json::parse(res->body).contains("error"));
}

TEST_CASE("features endpoint") {
    auto fx = make_fixture();
    GraphService service(fx.graph, fx.data);
    LiveServer live(service);
    auto res = live.client->Get("/api/features?target=In_Temp&method=causal-lags");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["count"] == causal_lags(fx.graph, "In_Temp").size());
    CHECK(body["method"] == "causal-lags");

    res = live.client->Get("/api/features?target=In_Temp&method=pca");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body).contains("loadings"));

    res = live.client->Get("/api/features?target=In_Temp&method=magic");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["errors"][0]["path"] == "method");
    res = live.client->Get("/api/features?method=all");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = live.client->Get("/api/features?target=Nope&method=all");
    REQUIRE(res);
    CHECK(res->status == 400);
}

TEST_CASE("committed edits become the current graph and are persisted") {
    auto fx = make_fixture();
    testing::TempDir dir("serve");
    const auto persist = dir / "graph.edited.json";
    GraphService service(fx.graph, fx.data, persist);
    LiveServer live(service);

    auto res = live.post("/api/edits", edit("Out_Hum", "In_Temp", 1));
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto body = json::parse(res->body);
    CHECK(body["version"] == 1);
    CHECK(body["committed"] == true);

    res = live.client->Get("/api/graph");
    const auto g = graph_from_json(json::parse(res->body));
    REQUIRE(g.find("Out_Hum", "In_Temp", 1));
    CHECK(g.find("Out_Hum", "In_Temp", 1)->provenance == Provenance::expert_added);
    REQUIRE(std::filesystem::exists(persist));
    CHECK(graph_from_json(testing::load_json(persist)) == g);
    CHECK_FALSE(std::filesystem::exists(dir / "graph.edited.json.tmp"));

    // preview leaves state alone
    json preview = edit("Out_Hum", "ITE_Ener", 1);
    preview["commit"] = false;
    res = live.post("/api/edits", preview);
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["committed"] == false);
    CHECK(service.version() == 1);
    CHECK(service.current_graph().find("Out_Hum", "ITE_Ener", 1) == nullptr);
}

TEST_CASE("invalid edits return 422 with field paths") {
    auto fx = make_fixture();
    GraphService service(fx.graph, fx.data);
    LiveServer live(service);
    auto check = [&](const json& body, int status, const std::string& path) {
        auto res = live.post("/api/edits", body);
        REQUIRE(res);
        CHECK(res->status == status);
        const auto doc = json::parse(res->body);
        CHECK(doc.contains("error"));
        if (!path.empty()) {
            REQUIRE(doc["errors"].size() == 1);
            CHECK(doc["errors"][0]["path"] == path);
        }
    };
    check(edit("Out_Hum", "In_Temp", 0), 422, "add[0].lag");
    check(edit("Out_Hum", "In_Temp", 99), 422, "add[0].lag");
    check(edit("Nope", "In_Temp", 1), 422, "add[0].source");
    check(edit("Cool_set", "In_Temp", 2), 422, "add[0]");
    check({{"remove", {{{"source", "Hour"}, {"target", "Hour"}, {"lag", 1}}}}}, 422, "remove[0]");
    check({{"add", "oops"}}, 422, "add");
    check({{"commit", "yes"}}, 422, "commit");
    check(json::array(), 422, "$");
    auto res = live.client->Post("/api/edits", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(service.version() == 0);
    CHECK(service.current_graph() == fx.graph);
}

TEST_CASE("stale base version is a conflict") {
    auto fx = make_fixture();
    GraphService service(fx.graph, fx.data);
    LiveServer live(service);
    json first = edit("Out_Hum", "In_Temp", 1);
    first["base_version"] = 0;
    auto res = live.post("/api/edits", first);
    REQUIRE(res);
    CHECK(res->status == 200);
    json second = edit("Out_Hum", "ITE_Ener", 1);
    second["base_version"] = 0;
    res = live.post("/api/edits", second);
    REQUIRE(res);
    CHECK(res->status == 409);
    CHECK(json::parse(res->body)["version"] == 1);
}

TEST_CASE("concurrent edits are serialized") {
    auto fx = make_fixture();
    GraphService service(fx.graph, fx.data);
    LiveServer live(service);

    // same base version: exactly one wins
    std::vector<std::tuple<std::string, std::string, int>> absent;
    for (const auto& s : fx.graph.variables()) {
        for (int lag = 1; lag <= fx.graph.tau_max(); ++lag) {
            if (!fx.graph.find(s, "HVAC_Ener", lag)) {
                absent.emplace_back(s, "HVAC_Ener", lag);
            }
        }
    }
    REQUIRE(absent.size() >= 10);
    for (int round = 0; round < 5; ++round) {
        const long base = service.version();
        std::vector<int> status(2);
        std::vector<std::thread> threads;
        for (int i = 0; i < 2; ++i) {
            threads.emplace_back([&, i] {
                httplib::Client c("127.0.0.1", live.port);
                const auto& [s, t, lag] = absent[static_cast<std::size_t>(2 * round + i)];
                json body = edit(s, t, lag);
                body["base_version"] = base;
                auto r = c.Post("/api/edits", body.dump(), "application/json");
                status[static_cast<std::size_t>(i)] = r ? r->status : -1;
            });
        }
        for (auto& t : threads) {
            t.join();
        }
        std::sort(status.begin(), status.end());
        CHECK(status == std::vector<int>{200, 409});
        CHECK(service.version() == base + 1);
    }

    // no base version: both apply, one after the other
    const long before = service.version();
    const auto links_before = service.current_graph().links().size();
    std::vector<std::thread> threads;
    std::vector<int> status(2);
    for (int i = 0; i < 2; ++i) {
        threads.emplace_back([&, i] {
            httplib::Client c("127.0.0.1", live.port);
            auto r = c.Post("/api/edits", edit(i == 0 ? "Out_Temp" : "Out_Hum", "ITE_Ener", 2).dump(),
                            "application/json");
            status[static_cast<std::size_t>(i)] = r ? r->status : -1;
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    CHECK(status == std::vector<int>{200, 200});
    CHECK(service.version() == before + 2);
    CHECK(service.current_graph().links().size() == links_before + 2);
}

TEST_CASE("quick-eval endpoint") {
    auto fx = make_fixture();
    GraphService service(fx.graph, fx.data);
    LiveServer live(service);
    for (const auto* method : {"causal-lags", "all"}) {
        auto res = live.post("/api/quick-eval", {{"target", "In_Temp"}, {"method", method}, {"horizon", 5}});
        REQUIRE(res);
        REQUIRE(res->status == 200);
        const auto body = json::parse(res->body);
        for (const auto* key : {"mae", "mape", "mae_w", "mape_w", "n_features", "windows"}) {
            CHECK(body.contains(key));
        }
        CHECK(body["mae"].get<double>() > 0.0);
        CHECK(body["windows"].get<int>() >= 1);
    }
    // Hour has no parents in the truth graph
    auto res = live.post("/api/quick-eval", {{"target", "Hour"}, {"method", "causal-lags"}});
    REQUIRE(res);
    CHECK(res->status == 409);
    CHECK(json::parse(res->body)["error"].get<std::string>().find("empty") != std::string::npos);

    res = live.post("/api/quick-eval", {{"method", "all"}});
    REQUIRE(res);
    CHECK(res->status == 400);
    res = live.post("/api/quick-eval", {{"target", "In_Temp"}, {"method", "all"}, {"horizon", 0}});
    REQUIRE(res);
    CHECK(res->status == 400);
}

TEST_CASE("service rejects a dataset missing graph variables") {
    auto fx = make_fixture();
    const TimeSeriesGraph g({"Ghost"}, 1, 0.01);
    CHECK_THROWS(GraphService(g, fx.data));
    CHECK_THROWS(GraphService(fx.graph, fx.data, std::nullopt, 1.0));
}
