#include <scms/crypto/hash.hpp>

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <stdexcept>

namespace scms::crypto {

digest256 sha256(byte_view data)
{
    digest256 out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    return out;
}

byte_buffer hash_truncated(byte_view data, std::size_t u)
{
    if (u < 1 || u > 32) {
        throw std::invalid_argument("hash_truncated: u must be in [1, 32]");
    }
    const auto full = sha256(data);
    return byte_buffer(full.begin(), full.begin() + u);
}

digest256 hmac_sha256(byte_view key, byte_view data)
{
    digest256 out{};
    unsigned int len = 0;
    if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
              out.data(), &len)) {
        throw std::runtime_error("HMAC-SHA-256 failed");
    }
    return out;
}

struct sha256_hasher::impl
{
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~impl() { EVP_MD_CTX_free(ctx); }
};

sha256_hasher::sha256_hasher() : impl_(std::make_unique<impl>())
{
    if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 init failed");
    }
}

sha256_hasher::~sha256_hasher() = default;
sha256_hasher::sha256_hasher(sha256_hasher&&) noexcept = default;
sha256_hasher& sha256_hasher::operator=(sha256_hasher&&) noexcept = default;

sha256_hasher& sha256_hasher::update(byte_view data)
{
    EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
    return *this;
}

digest256 sha256_hasher::finish()
{
    digest256 out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(impl_->ctx, out.data(), &len);
    EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr);
    return out;
}

digest256 sha256_hasher::peek() const
{
    EVP_MD_CTX* copy = EVP_MD_CTX_new();
    digest256 out{};
    unsigned int len = 0;
    const bool ok = copy && EVP_MD_CTX_copy_ex(copy, impl_->ctx) == 1 && EVP_DigestFinal_ex(copy, out.data(), &len) == 1;
    EVP_MD_CTX_free(copy);
    if (!ok) {
        throw std::runtime_error("SHA-256 copy failed");
    }
    return out;
}

} // namespace scms::crypto
