#include "mathcrawl/endpoint.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/hashing.hpp"

namespace mathcrawl {

namespace {

// base_url "http://host:port/path" -> (scheme://host:port, /path)
std::pair<std::string, std::string> split_url(const std::string& base_url) {
    size_t scheme = base_url.find("://");
    size_t path_start = scheme == std::string::npos
                            ? base_url.find('/')
                            : base_url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {base_url, "/"};
    return {base_url.substr(0, path_start), base_url.substr(path_start)};
}

std::string post_json_with_retry(const std::string& base_url, const std::string& path,
                                 const std::string& body, const std::string& api_key,
                                 const EndpointRetryPolicy& retry) {
    std::string last_error;
    for (int attempt = 0; attempt < retry.max_attempts; ++attempt) {
        if (attempt > 0) {
            int idx = std::min<int>(attempt - 1, static_cast<int>(retry.backoff_ms.size()) - 1);
            int ms = retry.backoff_ms.empty() ? 0 : retry.backoff_ms[static_cast<size_t>(idx)];
            std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        }
        httplib::Client client(base_url);
        client.set_connection_timeout(10);
        client.set_read_timeout(120);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = client.Post(path, headers, body, "application/json");
        if (res && res->status >= 200 && res->status < 300) return res->body;
        last_error = res ? "HTTP " + std::to_string(res->status)
                         : "transport error " + httplib::to_string(res.error());
    }
    throw EndpointUnavailable(base_url + path + ": " + last_error);
}

}  // namespace

HttpChatEndpoint::HttpChatEndpoint(std::string base_url, std::string model, double temperature,
                                   std::string api_key, EndpointRetryPolicy retry)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      temperature_(temperature),
      api_key_(std::move(api_key)),
      retry_(std::move(retry)) {}

std::string HttpChatEndpoint::complete(const std::string& prompt) {
    nlohmann::json req;
    req["model"] = model_;
    req["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
    req["temperature"] = temperature_;

    auto [host, path] = split_url(base_url_);
    std::string body = post_json_with_retry(host, path, req.dump(), api_key_, retry_);
    try {
        auto j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
        throw MalformedResponse(std::string("chat response: ") + e.what());
    }
}

HttpEmbedder::HttpEmbedder(std::string base_url, std::string model, std::string api_key,
                           EndpointRetryPolicy retry)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      api_key_(std::move(api_key)),
      retry_(std::move(retry)) {}

std::vector<std::vector<double>> HttpEmbedder::embed(const std::vector<std::string>& texts) {
    nlohmann::json req;
    req["model"] = model_;
    req["input"] = texts;

    auto [host, path] = split_url(base_url_);
    std::string body = post_json_with_retry(host, path, req.dump(), api_key_, retry_);
    try {
        auto j = nlohmann::json::parse(body);
        std::vector<std::vector<double>> out;
        for (const auto& item : j.at("data"))
            out.push_back(item.at("embedding").get<std::vector<double>>());
        if (out.size() != texts.size())
            throw std::runtime_error("embedding count mismatch");
        return out;
    } catch (const std::exception& e) {
        throw MalformedResponse(std::string("embedding response: ") + e.what());
    }
}

std::vector<std::vector<double>> HashEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        uint64_t base = hashing::hash64(t, seed_);
        std::vector<double> v(dim_);
        double norm2 = 0.0;
        for (size_t i = 0; i < dim_; ++i) {
            uint64_t h = hashing::family_hash(base, static_cast<uint32_t>(i));
            // map to (-1, 1)
            double x = (static_cast<double>(h >> 11) / 9007199254740992.0) * 2.0 - 1.0;
            v[i] = x;
            norm2 += x * x;
        }
        double norm = std::sqrt(norm2);
        if (norm > 0)
            for (auto& x : v) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace mathcrawl
