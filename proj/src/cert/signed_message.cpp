#include <scms/cert/signed_message.hpp>
#include <scms/crypto/serialize.hpp>

namespace scms::cert {

void signed_message::write(writer& w) const
{
    w.var_bytes(payload);
    signer.write(w);
    crypto::write(w, signature);
}

signed_message signed_message::read(reader& r)
{
    signed_message m;
    m.payload = r.var_bytes();
    m.signer = certificate::read(r);
    m.signature = crypto::read_signature(r);
    return m;
}

byte_buffer signed_message::encode() const
{
    writer w;
    write(w);
    return std::move(w).buffer();
}

signed_message signed_message::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) { return signed_message::read(r); });
}

crypto::digest256 message_digest(byte_view payload, const certificate& signer)
{
    crypto::sha256_hasher h;
    h.update(crypto::sha256(payload));
    h.update(signer.digest());
    return h.finish();
}

signed_message sign_message(const scalar& priv, const certificate& signer, byte_view payload)
{
    signed_message m{byte_buffer(payload.begin(), payload.end()), signer, {}};
    m.signature = crypto::sign(priv, message_digest(payload, signer));
    return m;
}

bool verify_message_with(const signed_message& msg, const certificate& claimed)
{
    return crypto::verify(claimed.verification_key, message_digest(msg.payload, claimed), msg.signature);
}

bool verify_message(const signed_message& msg)
{
    return verify_message_with(msg, msg.signer);
}

} // namespace scms::cert
