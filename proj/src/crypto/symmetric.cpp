#include <scms/crypto/symmetric.hpp>
#include <scms/errors.hpp>

#include <openssl/evp.h>

#include <memory>
#include <stdexcept>

namespace scms::crypto {

namespace {

struct cipher_ctx_deleter
{
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using cipher_ctx = std::unique_ptr<EVP_CIPHER_CTX, cipher_ctx_deleter>;

cipher_ctx new_ctx()
{
    cipher_ctx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) {
        throw std::runtime_error("EVP_CIPHER_CTX_new failed");
    }
    return ctx;
}

constexpr std::size_t gcm_tag_size = 16;

} // namespace

symmetric_key symmetric_key::from_bytes(byte_view bytes)
{
    if (bytes.size() != size) {
        throw std::invalid_argument("symmetric key must be exactly 16 bytes");
    }
    byte_array<16> raw{};
    std::copy(bytes.begin(), bytes.end(), raw.begin());
    return symmetric_key(raw);
}

block128 aes128_encrypt(const symmetric_key& key, const block128& block)
{
    thread_local cipher_ctx ctx = new_ctx();
    block128 out{};
    int len = 0;
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key.bytes().data(), nullptr) != 1 ||
        EVP_CIPHER_CTX_set_padding(ctx.get(), 0) != 1 ||
        EVP_EncryptUpdate(ctx.get(), out.data(), &len, block.data(), static_cast<int>(block.size())) != 1 ||
        len != 16) {
        throw std::runtime_error("AES-128 block encryption failed");
    }
    return out;
}

block128 prf_block(const symmetric_key& key, const block128& block)
{
    return xor_arrays(aes128_encrypt(key, block), block);
}

block128 block_add(const block128& block, std::uint64_t n)
{
    block128 out = block;
    unsigned carry = 0;
    for (int i = 15; i >= 0; --i) {
        const unsigned addend = i >= 8 ? static_cast<unsigned>((n >> (8 * (15 - i))) & 0xff) : 0;
        const unsigned sum = out[i] + addend + carry;
        out[i] = static_cast<std::uint8_t>(sum);
        carry = sum >> 8;
    }
    return out;
}

byte_buffer aead_seal(const symmetric_key& key, const byte_array<12>& nonce, byte_view aad,
                      byte_view plaintext)
{
    auto ctx = new_ctx();
    byte_buffer out(plaintext.size() + gcm_tag_size);
    int len = 0;
    int total = 0;
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, nullptr, nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, 12, nullptr) != 1 ||
        EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), nonce.data()) != 1) {
        throw std::runtime_error("AES-GCM init failed");
    }
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
        throw std::runtime_error("AES-GCM aad failed");
    }
    if (!plaintext.empty()) {
        if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                              static_cast<int>(plaintext.size())) != 1) {
            throw std::runtime_error("AES-GCM encrypt failed");
        }
        total = len;
    }
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + total, &len) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, gcm_tag_size,
                            out.data() + plaintext.size()) != 1) {
        throw std::runtime_error("AES-GCM finalize failed");
    }
    return out;
}

byte_buffer aead_open(const symmetric_key& key, const byte_array<12>& nonce, byte_view aad,
                      byte_view sealed)
{
    if (sealed.size() < gcm_tag_size) {
        throw decryption_error();
    }
    const std::size_t ct_size = sealed.size() - gcm_tag_size;
    auto ctx = new_ctx();
    byte_buffer out(ct_size);
    byte_array<gcm_tag_size> tag{};
    std::copy(sealed.begin() + ct_size, sealed.end(), tag.begin());
    int len = 0;
    int total = 0;
    if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, nullptr, nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, 12, nullptr) != 1 ||
        EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), nonce.data()) != 1) {
        throw std::runtime_error("AES-GCM init failed");
    }
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
        throw decryption_error();
    }
    if (ct_size > 0) {
        if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), static_cast<int>(ct_size)) != 1) {
            throw decryption_error();
        }
        total = len;
    }
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, gcm_tag_size, tag.data()) != 1 ||
        EVP_DecryptFinal_ex(ctx.get(), out.data() + total, &len) != 1) {
        throw decryption_error();
    }
    return out;
}

} // namespace scms::crypto
