#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace csi2img {

// Malformed or truncated file contents. The message carries the path (or a
// short context) and the byte offset where parsing failed.
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace io {

// All file formats in this project are little-endian. The helpers below
// byte-serialize explicitly so the files are identical on any host.

inline void put_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), std::streamsize(n));
}

template <typename T>
void put_le(std::ostream& os, T value) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    using U = std::make_unsigned_t<T>;
    U u = U(value);
    for (size_t i = 0; i < sizeof(T); ++i) buf[i] = (unsigned char)((u >> (8 * i)) & 0xff);
    put_bytes(os, buf, sizeof(T));
}

inline void put_f32(std::ostream& os, float value) {
    uint32_t u;
    std::memcpy(&u, &value, 4);
    put_le<uint32_t>(os, u);
}

inline void read_exact(std::istream& is, void* p, size_t n, const std::string& ctx) {
    is.read(static_cast<char*>(p), std::streamsize(n));
    if (size_t(is.gcount()) != n) {
        const auto got = is.gcount();
        is.clear();
        const long at = long(is.tellg()) - long(got);
        throw format_error(ctx + ": truncated at byte " + std::to_string(at));
    }
}

template <typename T>
T get_le(std::istream& is, const std::string& ctx) {
    static_assert(std::is_integral_v<T>);
    unsigned char buf[sizeof(T)];
    read_exact(is, buf, sizeof(T), ctx);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (size_t i = 0; i < sizeof(T); ++i) u |= U(buf[i]) << (8 * i);
    return T(u);
}

inline float get_f32(std::istream& is, const std::string& ctx) {
    const uint32_t u = get_le<uint32_t>(is, ctx);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

inline void expect_magic(std::istream& is, const char* magic, const std::string& ctx) {
    char buf[9] = {0};
    const auto at = is.tellg();
    is.read(buf, 8);
    if (is.gcount() != 8 || std::memcmp(buf, magic, 8) != 0)
        throw format_error(ctx + ": bad magic at byte " + std::to_string(long(at)));
}

}  // namespace io
}  // namespace csi2img
