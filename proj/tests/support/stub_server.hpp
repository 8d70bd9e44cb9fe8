#pragma once

// MockBackends behind a real HTTP listener on 127.0.0.1, for tests that go
// through the httplib transport and the CLI.

#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>

#include "mock_backends.hpp"

namespace ev2r::testing {

class StubServer {
 public:
  explicit StubServer(std::shared_ptr<MockBackends> backends)
      : backends_(std::move(backends)) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      const MockResponse r = backends_->handle(req.method, req.path, req.body);
      if (auto it = req.headers.find("Authorization"); it != req.headers.end()) {
        std::lock_guard lock(auth_mutex_);
        last_auth_ = it->second;
      }
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server_.Post(R"(/.*)", route);
    server_.Get(R"(/.*)", route);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  int port() const { return port_; }
  std::string url(const std::string& path = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  MockBackends& backends() { return *backends_; }
  std::string last_auth() const {
    std::lock_guard lock(auth_mutex_);
    return last_auth_;
  }

 private:
  std::shared_ptr<MockBackends> backends_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex auth_mutex_;
  std::string last_auth_;
};

}  // namespace ev2r::testing
