#include "mathcrawl/url.hpp"

#include <cctype>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl {

namespace {
bool valid_scheme(std::string_view s) {
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
            return false;
    return true;
}
}  // namespace

ParsedUrl parse_url(std::string_view url) {
    ParsedUrl u;
    size_t sep = url.find("://");
    if (sep == std::string_view::npos) throw MalformedUrl(std::string(url));
    u.scheme = std::string(url.substr(0, sep));
    if (!valid_scheme(u.scheme)) throw MalformedUrl(std::string(url));

    std::string_view rest = url.substr(sep + 3);
    size_t auth_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, auth_end);
    std::string_view tail =
        auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

    // drop userinfo
    size_t at = authority.rfind('@');
    if (at != std::string_view::npos) authority = authority.substr(at + 1);
    if (authority.empty()) throw MalformedUrl(std::string(url));

    if (authority.front() == '[') {  // IPv6 literal
        size_t close = authority.find(']');
        if (close == std::string_view::npos) throw MalformedUrl(std::string(url));
        u.host = std::string(authority.substr(0, close + 1));
        if (close + 1 < authority.size()) {
            if (authority[close + 1] != ':') throw MalformedUrl(std::string(url));
            u.port = std::string(authority.substr(close + 2));
        }
    } else {
        size_t colon = authority.rfind(':');
        if (colon != std::string_view::npos) {
            u.host = std::string(authority.substr(0, colon));
            u.port = std::string(authority.substr(colon + 1));
            for (char c : u.port)
                if (!std::isdigit(static_cast<unsigned char>(c)))
                    throw MalformedUrl(std::string(url));
        } else {
            u.host = std::string(authority);
        }
    }
    if (u.host.empty()) throw MalformedUrl(std::string(url));

    size_t frag = tail.find('#');
    if (frag != std::string_view::npos) {
        u.fragment = std::string(tail.substr(frag + 1));
        tail = tail.substr(0, frag);
    }
    size_t q = tail.find('?');
    if (q != std::string_view::npos) {
        u.has_query = true;
        u.query = std::string(tail.substr(q + 1));
        tail = tail.substr(0, q);
    }
    u.path = std::string(tail);
    return u;
}

std::string normalize_url(std::string_view url, UrlPolicy policy) {
    if (policy == UrlPolicy::exact) return std::string(url);

    ParsedUrl u = parse_url(url);
    std::string scheme = text::to_lower(u.scheme);
    std::string host = text::to_lower(u.host);
    std::string port = u.port;
    if ((scheme == "http" && port == "80") || (scheme == "https" && port == "443"))
        port.clear();
    std::string path = u.path.empty() ? "/" : u.path;

    std::string out = scheme + "://" + host;
    if (!port.empty()) out += ":" + port;
    out += path;
    if (u.has_query) out += "?" + u.query;
    return out;  // fragment dropped
}

std::string domain_of(std::string_view url) {
    ParsedUrl u = parse_url(url);
    std::string host = text::to_lower(u.host);
    if (host.rfind("www.", 0) == 0 && host.size() > 4) host = host.substr(4);
    return host;
}

}  // namespace mathcrawl
