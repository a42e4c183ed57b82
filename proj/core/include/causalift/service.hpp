#pragma once

#include "causalift/dataset.hpp"
#include "causalift/graph.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

namespace causalift {

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

/// State machine behind the expert-editing HTTP API: one current graph,
/// mutations serialized, reads concurrent.
class GraphService {
public:
    GraphService(TimeSeriesGraph graph, TimeSeriesDataset dataset,
                 std::optional<std::filesystem::path> persist_path = std::nullopt, double split_fraction = 0.5);

    ServiceResponse get_graph() const;
    ServiceResponse get_summary() const;
    /// Body: EditSpec JSON, optional "commit" (default true) and "base_version".
    ServiceResponse post_edits(const std::string& body);
    ServiceResponse get_features(const std::string& target, const std::string& method) const;
    /// Body: {"target", "method", "horizon"}; OLS on the training half, scored on the test half.
    ServiceResponse quick_eval(const std::string& body) const;

    TimeSeriesGraph current_graph() const;
    long version() const;

private:
    mutable std::shared_mutex mutex_;
    TimeSeriesGraph graph_;
    long version_ = 0;
    TimeSeriesDataset dataset_;
    std::optional<std::filesystem::path> persist_path_;
    double split_fraction_;
};

/// cpp-httplib front end for GraphService.
class HttpServer {
public:
    explicit HttpServer(GraphService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and returns the port (0 picks a free one); -1 on failure.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    bool listen_after_bind();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace causalift
