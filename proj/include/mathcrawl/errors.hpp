#pragma once

#include <stdexcept>
#include <string>

namespace mathcrawl {

struct MalformedUrl : std::runtime_error {
    explicit MalformedUrl(const std::string& url)
        : std::runtime_error("malformed url: " + url) {}
};

struct CorruptArchive : std::runtime_error {
    CorruptArchive(const std::string& path, uint64_t offset, const std::string& what)
        : std::runtime_error(path + " @" + std::to_string(offset) + ": " + what),
          offset(offset) {}
    uint64_t offset;
};

struct PayloadDecodeError : std::runtime_error {
    explicit PayloadDecodeError(const std::string& what)
        : std::runtime_error("payload decode: " + what) {}
};

struct EmptyInput : std::runtime_error {
    EmptyInput() : std::runtime_error("empty input") {}
};

struct EndpointUnavailable : std::runtime_error {
    explicit EndpointUnavailable(const std::string& what)
        : std::runtime_error("endpoint unavailable: " + what) {}
};

struct MalformedResponse : std::runtime_error {
    explicit MalformedResponse(const std::string& what)
        : std::runtime_error("malformed response: " + what) {}
};

struct ScorerUnavailable : std::runtime_error {
    explicit ScorerUnavailable(const std::string& what)
        : std::runtime_error("scorer unavailable: " + what) {}
};

struct UnscoredDocument : std::runtime_error {
    explicit UnscoredDocument(const std::string& doc_id)
        : std::runtime_error("unscored document: " + doc_id) {}
};

struct EmptyShingleSet : std::runtime_error {
    EmptyShingleSet() : std::runtime_error("empty shingle set") {}
};

struct MissingDocumentText : std::runtime_error {
    explicit MissingDocumentText(const std::string& doc_id)
        : std::runtime_error("missing document text: " + doc_id) {}
};

struct DimensionMismatch : std::runtime_error {
    DimensionMismatch(size_t a, size_t b)
        : std::runtime_error("embedding dimension mismatch: " + std::to_string(a) +
                             " vs " + std::to_string(b)) {}
};

struct ZeroNormVector : std::runtime_error {
    explicit ZeroNormVector(const std::string& id)
        : std::runtime_error("zero-norm embedding: " + id) {}
};

struct MissingEmbedding : std::runtime_error {
    explicit MissingEmbedding(const std::string& id)
        : std::runtime_error("missing embedding: " + id) {}
};

struct ConfigInvalid : std::runtime_error {
    explicit ConfigInvalid(const std::string& what)
        : std::runtime_error("invalid config: " + what) {}
};

struct StageFailure : std::runtime_error {
    StageFailure(const std::string& stage, const std::string& what)
        : std::runtime_error("stage " + stage + " failed: " + what) {}
};

}  // namespace mathcrawl
