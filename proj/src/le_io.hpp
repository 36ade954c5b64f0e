#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

// Little-endian scalar packing shared by the binary file formats.

namespace photonstat::detail {

inline void put_bytes(std::ostream& out, const void* p, std::size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    if constexpr (sizeof(T) == 2) {
        auto v = std::bit_cast<std::uint16_t>(value);
        for (int i = 0; i < 2; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    } else if constexpr (sizeof(T) == 4) {
        auto v = std::bit_cast<std::uint32_t>(value);
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    } else if constexpr (sizeof(T) == 8) {
        auto v = std::bit_cast<std::uint64_t>(value);
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    } else {
        static_assert(sizeof(T) == 1);
        std::memcpy(buf, &value, 1);
    }
    put_bytes(out, buf, sizeof(T));
}

// Returns false on short read; the caller reports the byte offset.
template <typename T>
bool get_le(std::istream& in, T& value) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) return false;
    if constexpr (sizeof(T) == 2) {
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= std::uint16_t(buf[i]) << (8 * i);
        value = std::bit_cast<T>(v);
    } else if constexpr (sizeof(T) == 4) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf[i]) << (8 * i);
        value = std::bit_cast<T>(v);
    } else if constexpr (sizeof(T) == 8) {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
        value = std::bit_cast<T>(v);
    } else {
        static_assert(sizeof(T) == 1);
        std::memcpy(&value, buf, 1);
    }
    return true;
}

} // namespace photonstat::detail
