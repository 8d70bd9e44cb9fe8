#include <httplib.h>

#include "ev2r/error.hpp"
#include "ev2r/llm_backend.hpp"

namespace ev2r::llm {
namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::Config, "endpoint '" + url + "' lacks a scheme");
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

void set_timeouts(httplib::Client& client, double timeout_s) {
  const auto sec = static_cast<time_t>(timeout_s);
  const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
}

HttpResponse finish(const httplib::Result& result, const std::string& url) {
  if (result) return {result->status, result->body};
  const httplib::Error err = result.error();
  const std::string what = httplib::to_string(err);
  switch (err) {
    case httplib::Error::Connection:
    case httplib::Error::ConnectionTimeout:
    case httplib::Error::Read:
    case httplib::Error::Write:
      throw Error(ErrorKind::Timeout, url + " unreachable or too slow (" + what + ")");
    default:
      throw Error(ErrorKind::Transport, url + ": " + what);
  }
}

class HttpTransport final : public Transport {
 public:
  HttpResponse post(const std::string& url, const std::string& body, const Headers& headers,
                    double timeout_s) override {
    const Url u = split_url(url);
    httplib::Client client(u.origin);
    set_timeouts(client, timeout_s);
    httplib::Headers h(headers.begin(), headers.end());
    return finish(client.Post(u.path, h, body, "application/json"), url);
  }

  HttpResponse get(const std::string& url, const Headers& headers, double timeout_s) override {
    const Url u = split_url(url);
    httplib::Client client(u.origin);
    set_timeouts(client, timeout_s);
    httplib::Headers h(headers.begin(), headers.end());
    return finish(client.Get(u.path, h), url);
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttpTransport>(); }

}  // namespace ev2r::llm
