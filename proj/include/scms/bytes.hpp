#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scms {

using byte_buffer = std::vector<std::uint8_t>;
using byte_view = std::span<const std::uint8_t>;

template <std::size_t N>
using byte_array = std::array<std::uint8_t, N>;

std::string to_hex(byte_view data);

/// Parses lowercase or uppercase hex; "-" is accepted as the empty string.
byte_buffer from_hex(std::string_view hex);

inline void append(byte_buffer& out, byte_view data)
{
    out.insert(out.end(), data.begin(), data.end());
}

inline byte_view as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

template <std::size_t N>
byte_array<N> xor_arrays(const byte_array<N>& a, const byte_array<N>& b)
{
    byte_array<N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = a[i] ^ b[i];
    }
    return out;
}

template <std::size_t N>
byte_array<N> array_from_hex(std::string_view hex)
{
    const auto buf = from_hex(hex);
    if (buf.size() != N) {
        throw std::invalid_argument("hex string has wrong length");
    }
    byte_array<N> out{};
    std::copy(buf.begin(), buf.end(), out.begin());
    return out;
}

} // namespace scms
