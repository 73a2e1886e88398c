#pragma once

#include <string>
#include <string_view>

namespace mathcrawl {

enum class UrlPolicy { exact, canonical };

struct ParsedUrl {
    std::string scheme;
    std::string host;
    std::string port;   // empty when absent
    std::string path;   // includes leading '/', may be empty
    std::string query;  // without '?', empty when absent
    std::string fragment;
    bool has_query = false;
};

// Throws MalformedUrl when scheme or host cannot be found.
ParsedUrl parse_url(std::string_view url);

// canonical: lowercase scheme/host, strip default port, drop fragment,
// keep query, empty path becomes "/". exact: identity.
std::string normalize_url(std::string_view url, UrlPolicy policy);

// Registrable host: port stripped, leading "www." removed.
std::string domain_of(std::string_view url);

}  // namespace mathcrawl
