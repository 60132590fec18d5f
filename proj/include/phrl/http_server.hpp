#pragma once

// HTTP front end for Service::handle, plus a background scheduler loop.

#include "phrl/service.hpp"

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace phrl {

class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and serves on a background thread; port 0 picks a free port.
    /// Returns the bound port.
    int start(const std::string& host, int port);
    /// Calls Service::tick() and pull_events() every `period` until stop().
    void start_scheduler(std::chrono::milliseconds period);
    /// Blocks until stop() is called from elsewhere.
    void wait();
    void stop();

private:
    Service& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread listener_;
    std::thread scheduler_;
    std::atomic<bool> running_{false};
};

}  // namespace phrl
