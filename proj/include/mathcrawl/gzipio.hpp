#pragma once

#include <string>
#include <string_view>

namespace mathcrawl::gzipio {

// gzip-wrap bytes (single member, default compression).
std::string compress(std::string_view bytes);

// Inflate gzip or raw-deflate data; concatenated gzip members are all
// consumed. Throws PayloadDecodeError on corrupt input.
std::string decompress(std::string_view bytes);

bool looks_gzip(std::string_view bytes);

}  // namespace mathcrawl::gzipio
