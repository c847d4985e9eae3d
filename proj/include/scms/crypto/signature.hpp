#pragma once

#include <scms/crypto/group.hpp>
#include <scms/crypto/hash.hpp>

#include <string_view>

namespace scms::crypto {

enum class signature_algorithm : std::uint8_t {
    ecdsa_p256_sha256 = 1,
    schnorr_p256_sha256 = 2,
};

std::string_view to_string(signature_algorithm alg);

/// Algorithm tag followed by two 32-byte big-endian integers:
/// (r, s) for ECDSA, (e, s) for Schnorr.
struct signature
{
    static constexpr std::size_t encoded_size = 65;

    signature_algorithm algorithm = signature_algorithm::ecdsa_p256_sha256;
    byte_array<64> value{};

    byte_array<65> encode() const;
    /// Throws std::invalid_argument on wrong length or unknown algorithm tag.
    static signature decode(byte_view encoded);

    friend bool operator==(const signature&, const signature&) = default;
};

/// Deterministic signature (RFC 6979 nonce derivation with HMAC-SHA-256).
signature sign(const scalar& priv, const digest256& digest,
               signature_algorithm alg = signature_algorithm::ecdsa_p256_sha256);

/// Randomized variant: fresh entropy from `rng` is mixed into the RFC 6979 nonce
/// derivation as additional data.
signature sign(const scalar& priv, const digest256& digest, random_source& rng,
               signature_algorithm alg = signature_algorithm::ecdsa_p256_sha256);

/// Never throws; malformed signatures simply fail.
bool verify(const group_element& pub, const digest256& digest, const signature& sig) noexcept;

} // namespace scms::crypto
