#include "mathcrawl/allowlist.hpp"

#include <fstream>
#include <stdexcept>

#include "mathcrawl/errors.hpp"
#include "mathcrawl/textutil.hpp"

namespace mathcrawl {

UrlAllowList UrlAllowList::load(const std::string& path, UrlPolicy policy) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open allow-list " + path);
    UrlAllowList list(policy);
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string url = text::trim(line);
        if (url.empty()) continue;
        list.add(url);
    }
    return list;
}

void UrlAllowList::add(std::string_view url) {
    entries_.insert(normalize_url(url, policy_));
}

bool UrlAllowList::contains(std::string_view url) const {
    try {
        return entries_.count(normalize_url(url, policy_)) > 0;
    } catch (const MalformedUrl&) {
        return false;
    }
}

}  // namespace mathcrawl
