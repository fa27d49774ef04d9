#include "forge/annotation_api.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "httplib.h"

#include "forge/base64.hpp"
#include "forge/context.hpp"
#include "forge/error.hpp"
#include "forge/json_io.hpp"
#include "forge/png_io.hpp"
#include "forge/random.hpp"
#include "forge/synthesis.hpp"

namespace forge {

struct AnnotationServer::Impl {
    DatasetStore& store;
    httplib::Server server;
};

namespace {

constexpr const char* kIdPattern = "([A-Za-z0-9_.-]+)";
constexpr std::size_t kMaxPage = 500;

int status_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::not_found: return 404;
        case ErrorKind::conflict: return 409;
        case ErrorKind::io: return 500;
        default: return 400;
    }
}

json error_body(std::string_view kind, std::string_view message) {
    return {{"error", {{"kind", kind}, {"message", message}}}};
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_png(httplib::Response& res, const png::Bytes& bytes) {
    res.status = 200;
    res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
}

// Wraps a handler so every failure becomes a JSON error with a fitting status.
template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const json::exception& e) {
            send_json(res, 400, error_body("invalid_argument", e.what()));
        } catch (const Error& e) {
            send_json(res, status_for(e.kind()), error_body(to_string(e.kind()), e.what()));
        } catch (const std::exception& e) {
            spdlog::error("{} {}: {}", req.method, req.path, e.what());
            send_json(res, 500, error_body("io", e.what()));
        }
    };
}

std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    const std::string v = req.get_param_value(key);
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; }) || v.size() > 9)
        throw Error(ErrorKind::invalid_argument, fmt::format("query parameter '{}' must be a non-negative integer", key));
    return static_cast<std::size_t>(std::stoul(v));
}

json summary_of(const SceneRecord& r, ReviewState state, bool annotated) {
    json j{{"id", r.record_id},       {"task_id", r.task_id}, {"object_set", r.object_set},
           {"width", r.width},        {"height", r.height},   {"version", r.version},
           {"synthetic", r.is_synthetic()}, {"annotated", annotated}};
    if (const auto* syn = r.synthetic()) {
        j["parent_id"] = syn->parent_id;
        j["review_state"] = to_string(state);
    }
    return j;
}

// Loads a stored record or an inbox upload.
SceneRecord load_any(const DatasetStore& store, const std::string& id) {
    if (store.contains(id)) return store.load_record(id);
    if (store.in_inbox(id)) return store.load_inbox_record(id);
    throw Error(ErrorKind::not_found, fmt::format("no scene '{}'", id));
}

BinaryMask objects_union(const DatasetStore& store, const SceneRecord& r) {
    BinaryMask u(r.width, r.height);
    for (std::size_t i = 0; i < r.objects.size(); ++i)
        if (auto m = store.load_mask(r, i)) u = mask_union(u, *m);
    return u;
}

json violations_body(const ValidationReport& report) {
    json v = json::array();
    for (const auto& x : report) v.push_back({{"code", x.code}, {"message", x.message}});
    json body = error_body("schema_mismatch", fmt::format("{} violation(s)", report.size()));
    body["violations"] = v;
    return body;
}

void handle_keypoints(DatasetStore& store, const std::string& id, const httplib::Request& req,
                      httplib::Response& res) {
    const json in = json::parse(req.body);
    if (!in.contains("version") || !in.at("version").is_number_integer())
        throw Error(ErrorKind::invalid_argument, "an integer 'version' token is required");
    const std::int64_t version = in.at("version").get<std::int64_t>();
    const KeypointSet keypoints = keypoints_from_json(in.at("keypoints"));

    auto lock = store.lock_writes();
    const bool stored = store.contains(id);
    SceneRecord r = load_any(store, id);
    if (r.version != version) {
        json body = error_body("conflict", fmt::format("scene '{}' is at version {}, request carried {}", id,
                                                       r.version, version));
        body["current_version"] = r.version;
        send_json(res, 409, body);
        return;
    }
    SceneRecord updated = r;
    updated.keypoints = keypoints;
    updated.version = r.version + 1;
    const ValidationReport report = validate_stored_record(store, updated);
    if (!report.empty()) {
        send_json(res, 400, violations_body(report));
        return;
    }
    if (stored) store.put_record(updated);
    else store.promote_inbox(updated);
    store.rebuild_index();
    send_json(res, 200, {{"record", to_json(updated)}, {"version", updated.version}});
}

void handle_upload(DatasetStore& store, const httplib::Request& req, httplib::Response& res) {
    const json in = json::parse(req.body);
    SceneRecord r;
    r.task_id = in.at("task_id").get<std::string>();
    r.object_set = in.value("object_set", std::string("seen"));
    r.instruction = in.at("instruction").get<std::string>();
    store.schema_for(r.task_id);  // unknown tasks are rejected up front

    const auto rgb_bytes = base64::decode(in.at("image").get<std::string>());
    SceneAssets assets{png::decode_rgb(rgb_bytes), std::nullopt, {}};
    r.width = assets.rgb.width;
    r.height = assets.rgb.height;
    if (in.contains("depth") && !in.at("depth").is_null()) {
        assets.depth = png::decode_depth(base64::decode(in.at("depth").get<std::string>()));
        if (assets.depth->width != r.width || assets.depth->height != r.height)
            throw Error(ErrorKind::dimension_mismatch, "depth image size differs from the RGB image");
    }
    const json objects = in.at("objects");
    if (!objects.is_array() || objects.empty()) throw Error(ErrorKind::invalid_argument, "'objects' must list descriptors");
    const json masks = in.value("masks", json::array());
    for (std::size_t i = 0; i < objects.size(); ++i) {
        r.objects.push_back({objects[i].get<std::string>(), std::nullopt});
        if (i < masks.size() && !masks[i].is_null()) {
            BinaryMask m = png::decode_mask(base64::decode(masks[i].get<std::string>()));
            if (m.width() != r.width || m.height() != r.height)
                throw Error(ErrorKind::dimension_mismatch, fmt::format("mask {} size differs from the RGB image", i));
            assets.masks.push_back(std::move(m));
        } else {
            assets.masks.push_back(std::nullopt);
        }
    }
    r.record_id = in.contains("id") ? in.at("id").get<std::string>()
                                    : fmt::format("scene-{:016x}", fnv1a(rgb_bytes.data(), rgb_bytes.size()));
    if (r.record_id.empty() || r.record_id.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.-") != std::string::npos ||
        r.record_id == "." || r.record_id == "..")
        throw Error(ErrorKind::invalid_argument, fmt::format("invalid scene id '{}'", r.record_id));
    store.put_inbox_scene(r, assets);
    send_json(res, 201, {{"id", r.record_id}, {"version", r.version}});
}

}  // namespace

AnnotationServer::AnnotationServer(DatasetStore& store, std::optional<std::filesystem::path> static_dir)
    : impl_(new Impl{store, {}}) {
    auto& srv = impl_->server;
    DatasetStore& st = impl_->store;
    const std::string id = kIdPattern;

    srv.Get("/scenes", guarded([&st](const httplib::Request& req, httplib::Response& res) {
        const std::size_t offset = query_size(req, "offset", 0);
        const std::size_t limit = std::min(query_size(req, "limit", 50), kMaxPage);
        std::optional<ReviewState> filter;
        if (req.has_param("review")) filter = review_state_from_string(req.get_param_value("review"));

        const auto reviews = st.review_entries();
        auto state_of = [&](const std::string& rid) {
            auto it = reviews.find(rid);
            return it == reviews.end() ? ReviewState::pending : it->second.state;
        };
        std::vector<json> rows;
        for (const auto& rid : st.record_ids()) {
            const SceneRecord r = st.load_record(rid);
            const ReviewState s = state_of(rid);
            if (filter && (!r.is_synthetic() || s != *filter)) continue;
            rows.push_back(summary_of(r, s, true));
        }
        if (!filter)
            for (const auto& rid : st.inbox_ids()) rows.push_back(summary_of(st.load_inbox_record(rid), ReviewState::pending, false));
        json page = json::array();
        for (std::size_t i = offset; i < rows.size() && i < offset + limit; ++i) page.push_back(rows[i]);
        send_json(res, 200, {{"total", rows.size()}, {"offset", offset}, {"limit", limit}, {"scenes", page}});
    }));

    srv.Get("/scenes/" + id, guarded([&st](const httplib::Request& req, httplib::Response& res) {
        const SceneRecord r = load_any(st, req.matches[1]);
        json out{{"record", to_json(r)}, {"annotated", st.contains(r.record_id)},
                 {"schema", to_json(st.schema_for(r.task_id))}};
        if (r.is_synthetic()) out["review_state"] = to_string(st.review_state(r.record_id));
        send_json(res, 200, out);
    }));

    srv.Get("/scenes/" + id + "/image", guarded([&st](const httplib::Request& req, httplib::Response& res) {
        const SceneRecord r = load_any(st, req.matches[1]);
        send_png(res, png::encode_rgb(st.load_rgb(r)));
    }));

    srv.Get("/scenes/" + id + "/depth", guarded([&st](const httplib::Request& req, httplib::Response& res) {
        const SceneRecord r = load_any(st, req.matches[1]);
        auto depth = st.load_depth(r);
        if (!depth) throw Error(ErrorKind::not_found, fmt::format("scene '{}' has no depth image", r.record_id));
        send_png(res, png::encode_depth(*depth));
    }));

    srv.Get("/scenes/" + id + "/context", guarded([&st](const httplib::Request& req, httplib::Response& res) {
        const SceneRecord r = load_any(st, req.matches[1]);
        ContextKind kind = ContextKind::soft_edge;
        if (req.has_param("kind")) kind = context_kind_from_string(req.get_param_value("kind"));
        else if (const auto* syn = r.synthetic()) kind = syn->context_kind;
        ContextImage ctx;
        switch (kind) {
            case ContextKind::soft_edge: ctx = compute_soft_edge(st.load_rgb(r)); break;
            case ContextKind::seg_mask: ctx = compute_mask_context(objects_union(st, r)); break;
            case ContextKind::depth: {
                auto depth = st.load_depth(r);
                if (!depth) throw Error(ErrorKind::missing_depth, fmt::format("scene '{}' has no depth image", r.record_id));
                ctx = compute_depth_context(*depth, objects_union(st, r));
                break;
            }
        }
        send_png(res, png::encode_context(ctx));
    }));

    srv.Put("/scenes/" + id + "/keypoints", guarded([&st](const httplib::Request& req, httplib::Response& res) {
        handle_keypoints(st, req.matches[1], req, res);
    }));

    srv.Post("/scenes", guarded([&st](const httplib::Request& req, httplib::Response& res) { handle_upload(st, req, res); }));

    srv.Get("/review/next", guarded([&st](const httplib::Request&, httplib::Response& res) {
        const auto pending = pending_reviews(st);
        if (pending.empty()) {
            send_json(res, 200, {{"pending", 0}, {"record", nullptr}});
            return;
        }
        const SceneRecord r = st.load_record(pending.front());
        send_json(res, 200, {{"pending", pending.size()}, {"record", to_json(r)},
                             {"parent", to_json(st.load_record(r.synthetic()->parent_id))}});
    }));

    srv.Post("/review/" + id, guarded([&st](const httplib::Request& req, httplib::Response& res) {
        const std::string rid = req.matches[1];
        const json in = json::parse(req.body);
        const ReviewState verdict = review_state_from_string(in.at("verdict").get<std::string>());
        if (verdict == ReviewState::pending) throw Error(ErrorKind::invalid_argument, "verdict must be accept or reject");
        const SceneRecord r = st.load_record(rid);
        if (!r.is_synthetic()) throw Error(ErrorKind::invalid_argument, fmt::format("'{}' is not a synthetic record", rid));
        st.record_verdict(rid, verdict, in.value("note", std::string()));
        send_json(res, 200, {{"id", rid}, {"review_state", to_string(verdict)}, {"pending", pending_reviews(st).size()}});
    }));

    srv.Get("/schema/" + id, guarded([&st](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, to_json(st.schema_for(req.matches[1])));
    }));

    if (static_dir && !srv.set_mount_point("/", static_dir->string()))
        throw Error(ErrorKind::not_found, fmt::format("static directory {} does not exist", static_dir->string()));
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::start(const std::string& host, int port) {
    port_ = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (port_ <= 0) throw Error(ErrorKind::io, fmt::format("cannot bind {}:{}", host, port));
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void AnnotationServer::listen_blocking(const std::string& host, int port) {
    port_ = port;
    if (!impl_->server.listen(host, port)) throw Error(ErrorKind::io, fmt::format("cannot listen on {}:{}", host, port));
}

void AnnotationServer::stop() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace forge
