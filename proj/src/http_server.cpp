#include "phrl/http_server.hpp"

#include <httplib.h>

#include <stdexcept>

namespace phrl {

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        Headers headers;
        for (const auto& [k, v] : req.headers) headers[k] = v;
        const auto resp = service_.handle(req.method, req.target, req.body, headers);
        res.status = resp.status;
        res.set_content(resp.body.dump(), "application/json");
    };
    server_->Get(".*", handler);
    server_->Post(".*", handler);
    server_->Put(".*", handler);
    server_->Delete(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    running_ = true;
    listener_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void HttpServer::start_scheduler(std::chrono::milliseconds period) {
    running_ = true;
    scheduler_ = std::thread([this, period] {
        while (running_) {
            service_.pull_events();
            service_.tick();
            const auto until = std::chrono::steady_clock::now() + period;
            while (running_ && std::chrono::steady_clock::now() < until)
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    });
}

void HttpServer::wait() {
    if (listener_.joinable()) listener_.join();
}

void HttpServer::stop() {
    running_ = false;
    server_->stop();
    if (listener_.joinable()) listener_.join();
    if (scheduler_.joinable()) scheduler_.join();
}

}  // namespace phrl
