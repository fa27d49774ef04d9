#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "httplib.h"

#include "forge/base64.hpp"
#include "forge/error.hpp"
#include "forge/gateway.hpp"
#include "forge/json_io.hpp"
#include "forge/png_io.hpp"
#include "forge/random.hpp"

namespace forge {

std::string request_hash(const std::string& path, const std::string& canonical_body) {
    const std::string key = path + "\n" + canonical_body;
    return fmt::format("{:016x}", fnv1a(key.data(), key.size()));
}

namespace {

std::string b64_rgb(const RgbImage& img) { return base64::encode(png::encode_rgb(img)); }
std::string b64_mask(const BinaryMask& m) { return base64::encode(png::encode_mask(m)); }
std::string b64_context(const ContextImage& c) { return base64::encode(png::encode_context(c)); }

RgbImage rgb_from_b64(const json& v) { return png::decode_rgb(base64::decode(v.get<std::string>())); }

json inpaint_body(const InpaintRequest& req) {
    return {{"image", b64_rgb(req.image)}, {"region", b64_mask(req.region)}, {"context", b64_context(req.context)},
            {"prompt", req.prompt},        {"seed", req.seed},               {"strength", req.strength},
            {"guidance", req.guidance}};
}

}  // namespace

struct HttpModelService::Response {
    json body;
};

HttpModelService::HttpModelService(ServiceEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    endpoint_.check();
    in_flight_ = std::make_unique<std::counting_semaphore<1024>>(std::min(endpoint_.max_in_flight, 1024));
}

std::string HttpModelService::model_id() const {
    std::lock_guard lock(model_id_mutex_);
    return last_model_id_.empty() ? "http:" + endpoint_.base_url : last_model_id_;
}

HttpModelService::Response HttpModelService::post(const std::string& path, const std::string& body) {
    const std::string expected_hash = request_hash(path, body);
    const auto secs = static_cast<time_t>(endpoint_.timeout_s);
    const auto usecs = static_cast<time_t>((endpoint_.timeout_s - static_cast<double>(secs)) * 1e6);

    in_flight_->acquire();
    struct Release {
        std::counting_semaphore<1024>* s;
        ~Release() { s->release(); }
    } release{in_flight_.get()};

    std::string last_error;
    double delay = endpoint_.backoff_initial_s;
    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            spdlog::warn("retrying {}{} (attempt {}/{}): {}", endpoint_.base_url, path, attempt + 1,
                         endpoint_.max_retries + 1, last_error);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            delay *= endpoint_.backoff_multiplier;
        }
        httplib::Client cli(endpoint_.base_url);
        cli.set_connection_timeout(secs, usecs);
        cli.set_read_timeout(secs, usecs);
        cli.set_write_timeout(secs, usecs);
        auto res = cli.Post(path, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = fmt::format("HTTP {}", res->status);
            continue;
        }
        json j;
        try {
            j = json::parse(res->body);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::service_protocol, fmt::format("{}: response is not JSON: {}", path, e.what()));
        }
        if (res->status >= 400) {
            ErrorKind kind = ErrorKind::invalid_argument;
            std::string message = res->body;
            if (j.contains("error") && j["error"].is_object()) {
                kind = error_kind_from_string(j["error"].value("kind", std::string{}));
                message = j["error"].value("message", message);
            }
            throw Error(kind, fmt::format("{} rejected the request (HTTP {}): {}", path, res->status, message));
        }
        if (res->status != 200) throw Error(ErrorKind::service_protocol, fmt::format("{}: unexpected HTTP {}", path, res->status));
        if (j.value("request_hash", std::string{}) != expected_hash)
            throw Error(ErrorKind::service_protocol, fmt::format("{}: request_hash mismatch", path));
        {
            std::lock_guard lock(model_id_mutex_);
            last_model_id_ = j.value("model_id", std::string{});
        }
        return {std::move(j)};
    }
    throw Error(ErrorKind::service_unavailable,
                fmt::format("{}{} failed after {} attempts: {}", endpoint_.base_url, path, endpoint_.max_retries + 1, last_error));
}

std::vector<std::string> HttpModelService::do_describe(const RgbImage& image, const std::string& instruction) {
    const json body{{"image", b64_rgb(image)}, {"instruction", instruction}};
    auto res = post("/describe", body.dump());
    try {
        return res.body.at("descriptors").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::service_protocol, fmt::format("/describe: {}", e.what()));
    }
}

BinaryMask HttpModelService::do_segment(const RgbImage& image, const std::string& descriptor) {
    const json body{{"image", b64_rgb(image)}, {"descriptor", descriptor}};
    auto res = post("/segment", body.dump());
    try {
        return png::decode_mask(base64::decode(res.body.at("mask").get<std::string>()));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::service_protocol, fmt::format("/segment: {}", e.what()));
    }
}

std::string HttpModelService::do_resample(const std::string& descriptor, std::uint64_t seed) {
    const json body{{"descriptor", descriptor}, {"seed", seed}};
    auto res = post("/redescribe", body.dump());
    try {
        return res.body.at("descriptor").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::service_protocol, fmt::format("/redescribe: {}", e.what()));
    }
}

RgbImage HttpModelService::do_inpaint(const InpaintRequest& req) {
    auto res = post("/inpaint", inpaint_body(req).dump());
    try {
        return rgb_from_b64(res.body.at("image"));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::service_protocol, fmt::format("/inpaint: {}", e.what()));
    }
}

struct ModelServer::Impl {
    std::shared_ptr<ModelService> service;
    httplib::Server server;
};

namespace {

int status_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::service_unavailable: return 503;
        case ErrorKind::io: return 500;
        case ErrorKind::no_match: return 422;
        default: return 400;
    }
}

}  // namespace

ModelServer::ModelServer(std::shared_ptr<ModelService> service) : impl_(std::make_unique<Impl>()) {
    impl_->service = std::move(service);
    auto handle = [this](const std::string& path, auto&& fn) {
        impl_->server.Post(path, [this, path, fn](const httplib::Request& req, httplib::Response& res) {
            ++served_;
            json out;
            try {
                const json in = json::parse(req.body);
                out = fn(in);
                out["model_id"] = impl_->service->model_id();
                out["request_hash"] = request_hash(path, in.dump());
                res.status = 200;
            } catch (const json::exception& e) {
                res.status = 400;
                out = {{"error", {{"kind", "invalid_argument"}, {"message", e.what()}}}};
            } catch (const Error& e) {
                res.status = status_for(e.kind());
                out = {{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
            } catch (const std::exception& e) {
                res.status = 500;
                out = {{"error", {{"kind", "io"}, {"message", e.what()}}}};
            }
            res.set_content(out.dump(), "application/json");
        });
    };
    auto& svc = impl_->service;
    handle("/describe", [svc](const json& in) {
        return json{{"descriptors", svc->describe_objects(rgb_from_b64(in.at("image")), in.at("instruction").get<std::string>())}};
    });
    handle("/segment", [svc](const json& in) {
        return json{{"mask", b64_mask(svc->segment(rgb_from_b64(in.at("image")), in.at("descriptor").get<std::string>()))}};
    });
    handle("/redescribe", [svc](const json& in) {
        return json{{"descriptor", svc->resample_description(in.at("descriptor").get<std::string>(),
                                                             in.at("seed").get<std::uint64_t>())}};
    });
    handle("/inpaint", [svc](const json& in) {
        InpaintRequest req;
        req.image = rgb_from_b64(in.at("image"));
        req.region = png::decode_mask(base64::decode(in.at("region").get<std::string>()));
        req.context = png::decode_context(base64::decode(in.at("context").get<std::string>()), ContextKind::soft_edge);
        req.prompt = in.at("prompt").get<std::string>();
        req.seed = in.at("seed").get<std::uint64_t>();
        req.strength = in.value("strength", 1.0);
        req.guidance = in.value("guidance", 7.5);
        return json{{"image", b64_rgb(svc->inpaint(req))}};
    });
    impl_->server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"status", "ok"}, {"model_id", impl_->service->model_id()}}.dump(), "application/json");
    });
}

ModelServer::~ModelServer() { stop(); }

int ModelServer::start(const std::string& host, int port) {
    port_ = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (port_ <= 0) throw Error(ErrorKind::io, fmt::format("cannot bind {}:{}", host, port));
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void ModelServer::listen_blocking(const std::string& host, int port) {
    port_ = port;
    if (!impl_->server.listen(host, port)) throw Error(ErrorKind::io, fmt::format("cannot listen on {}:{}", host, port));
}

void ModelServer::stop() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace forge
