#pragma once

#include <scms/codec.hpp>
#include <scms/crypto/group.hpp>

namespace scms::crypto {

/// Ephemeral-static ECDH on P-256, ANSI X9.63 SHA-256 key derivation,
/// AES-128-GCM payload protection.
struct hybrid_ciphertext
{
    group_element ephemeral;
    byte_buffer payload;
    byte_array<16> tag{};

    void write(writer& w) const;
    static hybrid_ciphertext read(reader& r);
    byte_buffer encode() const;
    static hybrid_ciphertext decode(byte_view data);

    friend bool operator==(const hybrid_ciphertext&, const hybrid_ciphertext&) = default;
};

hybrid_ciphertext hybrid_encrypt(const group_element& recipient, byte_view plaintext, random_source& rng);

/// Throws decryption_error for a wrong key or any modification of the ciphertext.
byte_buffer hybrid_decrypt(const scalar& recipient_private, const hybrid_ciphertext& ct);

} // namespace scms::crypto
