#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

#include "mathcrawl/url.hpp"

namespace mathcrawl {

// Curated URL set; membership is checked under the configured policy.
class UrlAllowList {
public:
    explicit UrlAllowList(UrlPolicy policy = UrlPolicy::canonical) : policy_(policy) {}

    // UTF-8 text file, one URL per line, '#' comments and blank lines allowed.
    static UrlAllowList load(const std::string& path, UrlPolicy policy = UrlPolicy::canonical);

    void add(std::string_view url);
    bool contains(std::string_view url) const;
    size_t size() const { return entries_.size(); }
    UrlPolicy policy() const { return policy_; }

private:
    UrlPolicy policy_;
    std::unordered_set<std::string> entries_;
};

}  // namespace mathcrawl
