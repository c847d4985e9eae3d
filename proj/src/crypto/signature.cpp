#include <scms/crypto/signature.hpp>

#include <stdexcept>

namespace scms::crypto {

namespace {

/// HMAC-DRBG nonce stream from RFC 6979 section 3.2 for qlen = hlen = 256.
class rfc6979_nonces
{
public:
    rfc6979_nonces(const scalar& priv, const digest256& digest, byte_view extra)
    {
        v_.fill(0x01);
        k_.fill(0x00);
        const auto h = scalar::reduce(digest).encode();
        for (std::uint8_t tag : {std::uint8_t{0x00}, std::uint8_t{0x01}}) {
            byte_buffer msg(v_.begin(), v_.end());
            msg.push_back(tag);
            append(msg, priv.encode());
            append(msg, h);
            append(msg, extra);
            k_ = hmac_sha256(k_, msg);
            v_ = hmac_sha256(k_, v_);
        }
    }

    scalar next()
    {
        for (;;) {
            if (!first_) {
                byte_buffer msg(v_.begin(), v_.end());
                msg.push_back(0x00);
                k_ = hmac_sha256(k_, msg);
                v_ = hmac_sha256(k_, v_);
            }
            first_ = false;
            v_ = hmac_sha256(k_, v_);
            if (v_ < group_order()) {
                auto k = scalar::decode(v_);
                if (!k.is_zero()) {
                    return k;
                }
            }
        }
    }

private:
    digest256 v_{};
    digest256 k_{};
    bool first_ = true;
};

constexpr std::string_view schnorr_tag = "scms/schnorr-p256-sha256";

scalar schnorr_challenge(const group_element& r, const group_element& pub, const digest256& digest)
{
    sha256_hasher h;
    h.update(as_bytes(schnorr_tag)).update(r.encode()).update(pub.encode()).update(digest);
    return scalar::reduce(h.finish());
}

signature pack(signature_algorithm alg, const scalar& a, const scalar& b)
{
    signature sig;
    sig.algorithm = alg;
    std::copy(a.encode().begin(), a.encode().end(), sig.value.begin());
    std::copy(b.encode().begin(), b.encode().end(), sig.value.begin() + 32);
    return sig;
}

signature sign_with(const scalar& priv, const digest256& digest, byte_view extra, signature_algorithm alg)
{
    if (priv.is_zero()) {
        throw std::invalid_argument("signing key must be nonzero");
    }
    if (alg == signature_algorithm::ecdsa_p256_sha256) {
        rfc6979_nonces nonces(priv, digest, extra);
        const auto z = scalar::reduce(digest);
        for (;;) {
            const auto k = nonces.next();
            const auto r = scalar::reduce(group_element::mul_base(k).x_coordinate());
            if (r.is_zero()) {
                continue;
            }
            const auto s = k.inverse() * (z + r * priv);
            if (s.is_zero()) {
                continue;
            }
            return pack(alg, r, s);
        }
    }
    if (alg == signature_algorithm::schnorr_p256_sha256) {
        byte_buffer tagged(schnorr_tag.begin(), schnorr_tag.end());
        append(tagged, extra);
        rfc6979_nonces nonces(priv, digest, tagged);
        const auto pub = group_element::mul_base(priv);
        for (;;) {
            const auto k = nonces.next();
            const auto e = schnorr_challenge(group_element::mul_base(k), pub, digest);
            if (e.is_zero()) {
                continue;
            }
            return pack(alg, e, k + e * priv);
        }
    }
    throw std::invalid_argument("unknown signature algorithm");
}

} // namespace

std::string_view to_string(signature_algorithm alg)
{
    switch (alg) {
    case signature_algorithm::ecdsa_p256_sha256:
        return "ecdsa-p256-sha256";
    case signature_algorithm::schnorr_p256_sha256:
        return "schnorr-p256-sha256";
    }
    return "unknown";
}

byte_array<65> signature::encode() const
{
    byte_array<65> out{};
    out[0] = static_cast<std::uint8_t>(algorithm);
    std::copy(value.begin(), value.end(), out.begin() + 1);
    return out;
}

signature signature::decode(byte_view encoded)
{
    if (encoded.size() != encoded_size) {
        throw std::invalid_argument("signature encoding must be 65 bytes");
    }
    if (encoded[0] != 1 && encoded[0] != 2) {
        throw std::invalid_argument("unknown signature algorithm tag");
    }
    signature sig;
    sig.algorithm = static_cast<signature_algorithm>(encoded[0]);
    std::copy(encoded.begin() + 1, encoded.end(), sig.value.begin());
    return sig;
}

signature sign(const scalar& priv, const digest256& digest, signature_algorithm alg)
{
    return sign_with(priv, digest, {}, alg);
}

signature sign(const scalar& priv, const digest256& digest, random_source& rng, signature_algorithm alg)
{
    const auto extra = rng.bytes<32>();
    return sign_with(priv, digest, extra, alg);
}

bool verify(const group_element& pub, const digest256& digest, const signature& sig) noexcept
{
    try {
        if (pub.is_identity()) {
            return false;
        }
        const auto a = scalar::decode(byte_view(sig.value).first(32));
        const auto b = scalar::decode(byte_view(sig.value).last(32));
        if (a.is_zero() || b.is_zero()) {
            return false;
        }
        switch (sig.algorithm) {
        case signature_algorithm::ecdsa_p256_sha256: {
            const auto w = b.inverse();
            const auto point = group_element::mul_base_add(scalar::reduce(digest) * w, a * w, pub);
            if (point.is_identity()) {
                return false;
            }
            return scalar::reduce(point.x_coordinate()) == a;
        }
        case signature_algorithm::schnorr_p256_sha256: {
            const auto r = group_element::mul_base_add(b, -a, pub);
            return schnorr_challenge(r, pub, digest) == a;
        }
        }
        return false;
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace scms::crypto
