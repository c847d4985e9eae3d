#pragma once

#include <scms/bytes.hpp>
#include <scms/crypto/random.hpp>

#include <memory>

struct ec_point_st;

namespace scms::crypto {

/// Integer modulo the order l of the P-256 base point; always fully reduced.
class scalar
{
public:
    static constexpr std::size_t encoded_size = 32;

    scalar() = default; // zero

    static scalar from_u64(std::uint64_t v);

    /// Interprets big-endian bytes of any length as an integer and reduces mod l.
    static scalar reduce(byte_view big_endian);

    /// Strict decoding: exactly 32 bytes, value < l. Throws std::invalid_argument.
    static scalar decode(byte_view encoded);

    /// Uniform in [1, l-1].
    static scalar random(random_source& rng);

    const byte_array<32>& encode() const noexcept { return value_; }
    bool is_zero() const noexcept;

    scalar operator+(const scalar& rhs) const;
    scalar operator-(const scalar& rhs) const;
    scalar operator*(const scalar& rhs) const;
    scalar operator-() const;
    /// Throws std::domain_error for zero.
    scalar inverse() const;

    friend bool operator==(const scalar&, const scalar&) = default;
    friend auto operator<=>(const scalar&, const scalar&) = default;

private:
    explicit scalar(const byte_array<32>& v) : value_(v) {}
    byte_array<32> value_{};
};

/// Element of the P-256 prime-order group. Canonical encoding is the 33-byte
/// SEC1 compressed point; the identity encodes as 33 zero bytes.
class group_element
{
public:
    static constexpr std::size_t encoded_size = 33;

    group_element(); // identity

    static const group_element& generator();

    /// Validates length, prefix and curve membership; throws std::invalid_argument.
    static group_element decode(byte_view encoded);

    /// s * G using the precomputed generator tables.
    static group_element mul_base(const scalar& s);

    /// a * G + b * p in one multi-scalar multiplication.
    static group_element mul_base_add(const scalar& a, const scalar& b, const group_element& p);

    const byte_array<33>& encode() const noexcept { return encoding_; }
    bool is_identity() const noexcept;

    /// Big-endian affine x-coordinate (zero for the identity).
    byte_array<32> x_coordinate() const;

    group_element operator+(const group_element& rhs) const;
    group_element operator-(const group_element& rhs) const;
    group_element operator-() const;
    friend group_element operator*(const scalar& s, const group_element& p);

    friend bool operator==(const group_element& a, const group_element& b) { return a.encoding_ == b.encoding_; }
    friend bool operator<(const group_element& a, const group_element& b) { return a.encoding_ < b.encoding_; }

private:
    explicit group_element(std::shared_ptr<const ec_point_st> point);

    std::shared_ptr<const ec_point_st> point_;
    byte_array<33> encoding_{};
};

/// offset + s * base.
group_element scalar_mul_add(const group_element& base, const scalar& s, const group_element& offset);

struct key_pair
{
    scalar private_key;
    group_element public_key;

    static key_pair from_private(const scalar& priv);
    static key_pair generate(random_source& rng);
};

/// Big-endian group order l.
const byte_array<32>& group_order();

} // namespace scms::crypto
