#pragma once

#include "patchr/repository.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace patchr {

struct ApiConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    Iri repo_base{"http://localhost:8080/repo/"};
    std::optional<std::filesystem::path> journal_path;
    std::map<Iri, std::string> datasets;  // dataset IRI -> label
    std::vector<std::string> cors_origins;  // "*" allows any origin
};

// "host:port", ":port" or "port".
void set_listen_address(ApiConfig& config, const std::string& address);
// "<iri>|<label>" entries separated by ';'.
std::map<Iri, std::string> parse_dataset_registry(const std::string& text);
// Comma-separated origins.
std::vector<std::string> parse_origins(const std::string& text);

// Overrides `config` with PATCHR_LISTEN, PATCHR_REPO_BASE, PATCHR_JOURNAL,
// PATCHR_DATASETS and PATCHR_CORS_ORIGINS where set.
void apply_environment(ApiConfig& config);

// HTTP status for a library error code.
int http_status(ErrorCode code);

// JSON/Turtle HTTP API over a Repository. Handlers run on a thread pool;
// writes go through the repository's single writer.
class ApiServer {
public:
    // Replays the journal (and takes its lock) when one is configured.
    explicit ApiServer(ApiConfig config);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Returns the bound port. Throws std::runtime_error when binding fails.
    int bind();
    // Serves until stop(); bind() first.
    void listen();
    void stop();
    // Blocks until the server accepts connections.
    void wait_until_ready() const;

    Repository& repository();
    const ApiConfig& config() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace patchr
