#include <scms/crypto/hybrid.hpp>
#include <scms/crypto/hash.hpp>
#include <scms/crypto/symmetric.hpp>
#include <scms/errors.hpp>

#include <stdexcept>

namespace scms::crypto {

namespace {

struct derived_keys
{
    symmetric_key key;
    byte_array<12> nonce{};
};

derived_keys kdf(const group_element& shared, const group_element& ephemeral)
{
    sha256_hasher h;
    const byte_array<4> counter{0, 0, 0, 1};
    h.update(shared.x_coordinate()).update(counter).update(ephemeral.encode());
    const auto out = h.finish();
    derived_keys keys;
    keys.key = symmetric_key::from_bytes(byte_view(out).first(16));
    std::copy_n(out.begin() + 16, 12, keys.nonce.begin());
    return keys;
}

} // namespace

void hybrid_ciphertext::write(writer& w) const
{
    w.raw(ephemeral.encode());
    w.var_bytes(payload);
    w.raw(tag);
}

hybrid_ciphertext hybrid_ciphertext::read(reader& r)
{
    hybrid_ciphertext ct;
    const auto at = r.offset();
    const auto eph = r.array<33>();
    try {
        ct.ephemeral = group_element::decode(eph);
    } catch (const std::invalid_argument& e) {
        throw parse_error(at, e.what());
    }
    ct.payload = r.var_bytes();
    ct.tag = r.array<16>();
    return ct;
}

byte_buffer hybrid_ciphertext::encode() const
{
    writer w;
    write(w);
    return std::move(w).buffer();
}

hybrid_ciphertext hybrid_ciphertext::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) { return read(r); });
}

hybrid_ciphertext hybrid_encrypt(const group_element& recipient, byte_view plaintext, random_source& rng)
{
    if (recipient.is_identity()) {
        throw std::invalid_argument("hybrid_encrypt: recipient key is the identity");
    }
    const auto eph = key_pair::generate(rng);
    const auto keys = kdf(eph.private_key * recipient, eph.public_key);
    auto sealed = aead_seal(keys.key, keys.nonce, eph.public_key.encode(), plaintext);

    hybrid_ciphertext ct;
    ct.ephemeral = eph.public_key;
    std::copy(sealed.end() - 16, sealed.end(), ct.tag.begin());
    sealed.resize(sealed.size() - 16);
    ct.payload = std::move(sealed);
    return ct;
}

byte_buffer hybrid_decrypt(const scalar& recipient_private, const hybrid_ciphertext& ct)
{
    if (ct.ephemeral.is_identity()) {
        throw decryption_error();
    }
    const auto keys = kdf(recipient_private * ct.ephemeral, ct.ephemeral);
    byte_buffer sealed = ct.payload;
    append(sealed, ct.tag);
    return aead_open(keys.key, keys.nonce, ct.ephemeral.encode(), sealed);
}

} // namespace scms::crypto
