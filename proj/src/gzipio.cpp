#include "mathcrawl/gzipio.hpp"

#include <zlib.h>

#include "mathcrawl/errors.hpp"

namespace mathcrawl::gzipio {

std::string compress(std::string_view bytes) {
    z_stream zs{};
    // 15+16: gzip wrapper
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw PayloadDecodeError("deflateInit2 failed");
    std::string out;
    out.resize(deflateBound(&zs, bytes.size()) + 32);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw PayloadDecodeError("deflate did not finish");
    out.resize(out.size() - zs.avail_out);
    return out;
}

std::string decompress(std::string_view bytes) {
    z_stream zs{};
    // 15+32: auto-detect gzip/zlib headers
    if (inflateInit2(&zs, 15 + 32) != Z_OK)
        throw PayloadDecodeError("inflateInit2 failed");
    std::string out;
    char buf[1 << 15];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    while (true) {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        int rc = inflate(&zs, Z_NO_FLUSH);
        out.append(buf, sizeof(buf) - zs.avail_out);
        if (rc == Z_STREAM_END) {
            if (zs.avail_in == 0) break;
            // concatenated gzip member follows
            if (inflateReset2(&zs, 15 + 32) != Z_OK) {
                inflateEnd(&zs);
                throw PayloadDecodeError("inflateReset2 failed");
            }
            continue;
        }
        if (rc != Z_OK) {
            inflateEnd(&zs);
            throw PayloadDecodeError("inflate error " + std::to_string(rc));
        }
        if (zs.avail_in == 0 && rc == Z_OK) {
            inflateEnd(&zs);
            throw PayloadDecodeError("truncated compressed stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

bool looks_gzip(std::string_view bytes) {
    return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1F &&
           static_cast<unsigned char>(bytes[1]) == 0x8B;
}

}  // namespace mathcrawl::gzipio
