#include <scms/codec.hpp>

namespace scms {

void writer::u16(std::uint16_t v)
{
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
}

void writer::u32(std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8) {
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

void writer::u64(std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8) {
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

void writer::var_bytes(byte_view data)
{
    u32(static_cast<std::uint32_t>(data.size()));
    raw(data);
}

void reader::need(std::size_t n) const
{
    if (remaining() < n) {
        throw parse_error(pos_, "truncated input, need " + std::to_string(n) + " bytes");
    }
}

std::uint8_t reader::u8()
{
    need(1);
    return data_[pos_++];
}

std::uint16_t reader::u16()
{
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
}

std::uint32_t reader::u32()
{
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v = v << 8 | data_[pos_++];
    }
    return v;
}

std::uint64_t reader::u64()
{
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = v << 8 | data_[pos_++];
    }
    return v;
}

bool reader::boolean()
{
    const auto v = u8();
    if (v > 1) {
        throw parse_error(pos_ - 1, "invalid boolean");
    }
    return v == 1;
}

byte_buffer reader::raw(std::size_t n)
{
    need(n);
    byte_buffer out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

byte_buffer reader::var_bytes()
{
    const auto len = u32();
    return raw(len);
}

std::string reader::str()
{
    const auto buf = var_bytes();
    return {buf.begin(), buf.end()};
}

void reader::expect_end() const
{
    if (!at_end()) {
        throw parse_error(pos_, std::to_string(remaining()) + " trailing bytes");
    }
}

} // namespace scms
