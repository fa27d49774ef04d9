#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "forge/dataset.hpp"

namespace forge {

// REST surface used by the annotation studio. JSON in and out, PNG for
// images. Errors are {"error": {"kind", "message"}} plus "violations" for
// rejected annotations.
//
//   GET  /scenes?offset=&limit=&review=      paged records and inbox uploads
//   GET  /scenes/{id}                        record, schema and review state
//   GET  /scenes/{id}/image|depth|context    PNG (context takes ?kind=)
//   PUT  /scenes/{id}/keypoints              {"version", "keypoints"}
//   POST /scenes                             upload into the inbox
//   GET  /review/next                        next pending synthetic record
//   POST /review/{id}                        {"verdict": accept|reject, "note"}
//   GET  /schema/{task_id}
class AnnotationServer {
public:
    AnnotationServer(DatasetStore& store, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    int start(const std::string& host = "127.0.0.1", int port = 0);
    void listen_blocking(const std::string& host, int port);
    void stop();
    int port() const { return port_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace forge
