#pragma once

#include <scms/bytes.hpp>

#include <memory>

namespace scms::crypto {

using digest256 = byte_array<32>;

digest256 sha256(byte_view data);

/// The `u` most significant (leading) bytes of SHA-256(data), u in [1, 32].
byte_buffer hash_truncated(byte_view data, std::size_t u);

digest256 hmac_sha256(byte_view key, byte_view data);

/// Incremental SHA-256.
class sha256_hasher
{
public:
    sha256_hasher();
    ~sha256_hasher();
    sha256_hasher(sha256_hasher&&) noexcept;
    sha256_hasher& operator=(sha256_hasher&&) noexcept;

    sha256_hasher& update(byte_view data);
    digest256 finish();
    /// Digest of everything absorbed so far; the hasher stays usable.
    digest256 peek() const;

private:
    struct impl;
    std::unique_ptr<impl> impl_;
};

} // namespace scms::crypto
