#include <scms/crypto/serialize.hpp>

#include <stdexcept>

namespace scms::crypto {

group_element read_element(reader& r)
{
    const auto at = r.offset();
    const auto raw = r.array<33>();
    try {
        return group_element::decode(raw);
    } catch (const std::invalid_argument& e) {
        throw parse_error(at, e.what());
    }
}

scalar read_scalar(reader& r)
{
    const auto at = r.offset();
    const auto raw = r.array<32>();
    try {
        return scalar::decode(raw);
    } catch (const std::invalid_argument& e) {
        throw parse_error(at, e.what());
    }
}

signature read_signature(reader& r)
{
    const auto at = r.offset();
    const auto raw = r.array<65>();
    try {
        return signature::decode(raw);
    } catch (const std::invalid_argument& e) {
        throw parse_error(at, e.what());
    }
}

} // namespace scms::crypto
