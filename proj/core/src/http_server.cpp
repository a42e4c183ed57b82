#include "causalift/service.hpp"

#include <httplib.h>

namespace causalift {

using nlohmann::json;

struct HttpServer::Impl {
    explicit Impl(GraphService& s) : service(s) {}

    GraphService& service;
    httplib::Server server;
};

namespace {

void send(httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(GraphService& service) : impl_(std::make_unique<Impl>(service)) {
    auto& svr = impl_->server;
    GraphService& svc = impl_->service;

    svr.Get("/api/graph", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_graph()); });
    svr.Get("/api/summary",
            [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_summary()); });
    svr.Get("/api/features", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.get_features(req.get_param_value("target"), req.get_param_value("method")));
    });
    svr.Post("/api/edits",
             [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.post_edits(req.body)); });
    svr.Post("/api/quick-eval",
             [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.quick_eval(req.body)); });

    svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send(res, {500, {{"error", what}, {"errors", json::array()}}});
    });
    svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty()) {
            send(res, {res.status, {{"error", "no route for " + req.method + " " + req.path}, {"errors", json::array()}}});
        }
    });
}

HttpServer::~HttpServer() {
    stop();
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        return impl_->server.bind_to_any_port(host);
    }
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() {
    return impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    if (impl_) {
        impl_->server.stop();
    }
}

}  // namespace causalift
