#pragma once

#include <scms/bytes.hpp>
#include <scms/errors.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace scms {

/// Canonical big-endian, length-prefixed encoder. Variable-length fields carry
/// a u32 length prefix; fixed-width fields are written raw.
class writer
{
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void boolean(bool v) { u8(v ? 1 : 0); }
    void raw(byte_view data) { append(buf_, data); }
    void var_bytes(byte_view data);
    void str(std::string_view s) { var_bytes(as_bytes(s)); }

    const byte_buffer& buffer() const& { return buf_; }
    byte_buffer buffer() && { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    byte_buffer buf_;
};

class reader
{
public:
    explicit reader(byte_view data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    bool boolean();
    byte_buffer raw(std::size_t n);
    byte_buffer var_bytes();
    std::string str();

    template <std::size_t N>
    byte_array<N> array()
    {
        need(N);
        byte_array<N> out{};
        std::copy_n(data_.begin() + pos_, N, out.begin());
        pos_ += N;
        return out;
    }

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }
    bool at_end() const noexcept { return pos_ == data_.size(); }

    /// Throws parse_error if unread bytes remain (over-long input).
    void expect_end() const;

    [[noreturn]] void fail(const std::string& what) const { throw parse_error(pos_, what); }

private:
    void need(std::size_t n) const;

    byte_view data_;
    std::size_t pos_ = 0;
};

/// Decodes a whole buffer with `fn(reader&)` and rejects trailing bytes.
template <typename Fn>
auto decode_exact(byte_view data, Fn&& fn)
{
    reader r(data);
    auto value = fn(r);
    r.expect_end();
    return value;
}

} // namespace scms
