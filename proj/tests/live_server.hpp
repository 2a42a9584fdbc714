#pragma once

// In-process service on an ephemeral port for the HTTP-level tests.

#include "fixtures.hpp"

#include "patchr/service.hpp"

#include <httplib.h>

#include <cctype>
#include <thread>

namespace {

using namespace patchr;

inline ApiConfig test_config() {
    ApiConfig c;
    c.port = 0;
    c.repo_base = Iri(fixtures::kRepo);
    c.datasets = {{Iri(fixtures::kDBpediaDataset), "DBpedia"}};
    return c;
}

// A server on an ephemeral port, serving from a background thread.
struct LiveServer {
    explicit LiveServer(ApiConfig config = test_config()) : server(std::move(config)) {
        port = server.bind();
        thread = std::thread([this] { server.listen(); });
        server.wait_until_ready();
    }
    ~LiveServer() {
        server.stop();
        thread.join();
    }

    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(10);
        return c;
    }

    ApiServer server;
    int port = 0;
    std::thread thread;
};

inline std::string percent_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

}  // namespace
