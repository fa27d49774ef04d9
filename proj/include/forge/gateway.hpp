#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <memory>
#include <semaphore>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "forge/image.hpp"

namespace forge {

class DatasetStore;

struct ServiceEndpoint {
    std::string base_url = "http://127.0.0.1:8089";
    double timeout_s = 30.0;
    int max_retries = 2;
    double backoff_initial_s = 0.05;
    double backoff_multiplier = 2.0;
    int max_in_flight = 4;

    void check() const;
};

struct InpaintRequest {
    RgbImage image;       // running image s'_{i-1}
    BinaryMask region;    // m + h(m)
    ContextImage context; // h(m * c)
    std::string prompt;   // resampled description
    std::uint64_t seed = 0;
    double strength = 1.0;
    double guidance = 7.5;

    // Throws invalid_argument / dimension_mismatch.
    void check() const;
};

// Client surface of the three external models. The public calls enforce the
// contract (preconditions, response shape, compositing outside the inpaint
// region) so every backend gets the same guarantees.
class ModelService {
public:
    virtual ~ModelService() = default;

    std::vector<std::string> describe_objects(const RgbImage& image, const std::string& instruction);
    BinaryMask segment(const RgbImage& image, const std::string& descriptor);
    std::string resample_description(const std::string& descriptor, std::uint64_t seed);
    RgbImage inpaint(const InpaintRequest& req);

    virtual std::string model_id() const = 0;

protected:
    virtual std::vector<std::string> do_describe(const RgbImage& image, const std::string& instruction) = 0;
    virtual BinaryMask do_segment(const RgbImage& image, const std::string& descriptor) = 0;
    virtual std::string do_resample(const std::string& descriptor, std::uint64_t seed) = 0;
    virtual RgbImage do_inpaint(const InpaintRequest& req) = 0;
};

// Output equals `input` outside `region` and `generated` inside it.
RgbImage composite_inside(const RgbImage& input, const RgbImage& generated, const BinaryMask& region);

// Lookup tables behind the mock models.
struct MockTables {
    // Keyed by image content hash.
    std::map<std::uint64_t, std::vector<std::string>> descriptors_by_image;
    std::map<std::pair<std::uint64_t, std::string>, BinaryMask> masks;
    std::map<std::string, std::vector<std::string>> descriptors_by_instruction;
    // Category keyword -> variant list; resampling picks variants[seed % n].
    std::vector<std::pair<std::string, std::vector<std::string>>> variants;

    static MockTables defaults();
    // Adds every stored scene's descriptors and masks.
    void add_dataset(const DatasetStore& store);
};

std::uint64_t image_hash(const RgbImage& image);

// Deterministic offline stand-in for the description, segmentation and
// inpainting models.
class MockModelService : public ModelService {
public:
    explicit MockModelService(MockTables tables = MockTables::defaults(), bool pass_through = false)
        : tables_(std::move(tables)), pass_through_(pass_through) {}

    std::string model_id() const override { return "forge-mock/1"; }
    bool pass_through() const { return pass_through_; }

protected:
    std::vector<std::string> do_describe(const RgbImage& image, const std::string& instruction) override;
    BinaryMask do_segment(const RgbImage& image, const std::string& descriptor) override;
    std::string do_resample(const std::string& descriptor, std::uint64_t seed) override;
    RgbImage do_inpaint(const InpaintRequest& req) override;

private:
    MockTables tables_;
    bool pass_through_;
};

// HTTP+JSON client. 5xx and transport failures are retried with exponential
// backoff; 4xx fails immediately.
class HttpModelService : public ModelService {
public:
    explicit HttpModelService(ServiceEndpoint endpoint);

    std::string model_id() const override;
    const ServiceEndpoint& endpoint() const { return endpoint_; }

protected:
    std::vector<std::string> do_describe(const RgbImage& image, const std::string& instruction) override;
    BinaryMask do_segment(const RgbImage& image, const std::string& descriptor) override;
    std::string do_resample(const std::string& descriptor, std::uint64_t seed) override;
    RgbImage do_inpaint(const InpaintRequest& req) override;

private:
    struct Response;
    Response post(const std::string& path, const std::string& body);

    ServiceEndpoint endpoint_;
    std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
    mutable std::mutex model_id_mutex_;
    mutable std::string last_model_id_;
};

// Hash the server echoes back; fnv1a over "<path>\n<canonical json body>".
std::string request_hash(const std::string& path, const std::string& canonical_body);

// Serves a ModelService over the HTTP contract (used by `forge mock-serve`).
class ModelServer {
public:
    explicit ModelServer(std::shared_ptr<ModelService> service);
    ~ModelServer();
    ModelServer(const ModelServer&) = delete;
    ModelServer& operator=(const ModelServer&) = delete;

    // Binds (port 0 picks a free port) and serves on a background thread.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    // Serves on the calling thread until stop().
    void listen_blocking(const std::string& host, int port);
    void stop();
    int port() const { return port_; }
    std::uint64_t requests_served() const { return served_.load(); }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::uint64_t> served_{0};
};

}  // namespace forge
