#pragma once

#include <functional>
#include <string>
#include <vector>

namespace mathcrawl {

// Chat-style completion endpoint. Implementations may be remote HTTP
// services or in-process mocks.
class ModelEndpoint {
public:
    virtual ~ModelEndpoint() = default;
    virtual std::string complete(const std::string& prompt) = 0;
    virtual std::string model_id() const = 0;
};

// Wraps a callable; handy for tests and scripted mocks.
class LambdaEndpoint : public ModelEndpoint {
public:
    LambdaEndpoint(std::string id, std::function<std::string(const std::string&)> fn)
        : id_(std::move(id)), fn_(std::move(fn)) {}
    std::string complete(const std::string& prompt) override { return fn_(prompt); }
    std::string model_id() const override { return id_; }

private:
    std::string id_;
    std::function<std::string(const std::string&)> fn_;
};

struct EndpointRetryPolicy {
    int max_attempts = 3;
    std::vector<int> backoff_ms = {1000, 4000, 16000};
};

// HTTP JSON chat protocol:
//   request  {model, messages:[{role,content}], temperature}
//   response {choices:[{message:{content}}]}
class HttpChatEndpoint : public ModelEndpoint {
public:
    HttpChatEndpoint(std::string base_url, std::string model, double temperature = 0.0,
                     std::string api_key = {}, EndpointRetryPolicy retry = {});
    std::string complete(const std::string& prompt) override;
    std::string model_id() const override { return model_; }

private:
    std::string base_url_;
    std::string model_;
    double temperature_;
    std::string api_key_;
    EndpointRetryPolicy retry_;
};

// Dense-vector embedding endpoint contract.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
    virtual std::string id() const = 0;
};

// HTTP JSON embedding protocol:
//   request  {model, input:[text]}
//   response {data:[{embedding:[numbers]}]}
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(std::string base_url, std::string model, std::string api_key = {},
                 EndpointRetryPolicy retry = {});
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string id() const override { return model_; }

private:
    std::string base_url_;
    std::string model_;
    std::string api_key_;
    EndpointRetryPolicy retry_;
};

// Deterministic mock embedder: a seeded pseudo-random unit vector per
// text. Identical texts embed identically; distinct texts are nearly
// orthogonal at dim 256.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(size_t dim = 256, uint64_t seed = 0)
        : dim_(dim), seed_(seed) {}
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;
    std::string id() const override { return "mock-hash-" + std::to_string(dim_); }

private:
    size_t dim_;
    uint64_t seed_;
};

// Reads {key: url, model, api_key_env} and builds an endpoint; "mock"
// URLs return a deterministic echo endpoint.
}  // namespace mathcrawl
