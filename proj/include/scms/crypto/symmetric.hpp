#pragma once

#include <scms/bytes.hpp>

namespace scms::crypto {

using block128 = byte_array<16>;

/// 128-bit AES key material.
class symmetric_key
{
public:
    static constexpr std::size_t size = 16;

    symmetric_key() = default;
    explicit symmetric_key(const byte_array<16>& bytes) : bytes_(bytes) {}

    /// Throws std::invalid_argument unless exactly 16 bytes.
    static symmetric_key from_bytes(byte_view bytes);

    const byte_array<16>& bytes() const noexcept { return bytes_; }

    friend bool operator==(const symmetric_key&, const symmetric_key&) = default;

private:
    byte_array<16> bytes_{};
};

block128 aes128_encrypt(const symmetric_key& key, const block128& block);

/// Davies-Meyer compression: AES_key(block) XOR block.
block128 prf_block(const symmetric_key& key, const block128& block);

/// Adds `n` to the block read as a 128-bit big-endian integer, wrapping mod 2^128.
block128 block_add(const block128& block, std::uint64_t n);

/// AES-128-GCM with a 12-byte nonce; returns ciphertext followed by a 16-byte tag.
byte_buffer aead_seal(const symmetric_key& key, const byte_array<12>& nonce, byte_view aad,
                      byte_view plaintext);

/// Inverse of aead_seal; throws decryption_error on authentication failure.
byte_buffer aead_open(const symmetric_key& key, const byte_array<12>& nonce, byte_view aad,
                      byte_view sealed);

} // namespace scms::crypto
