#pragma once

#include <scms/cert/certificate.hpp>

namespace scms::cert {

/// Signature over H(H(payload) ‖ H(certificate)), which binds the message to
/// the exact certificate the signer meant to use.
struct signed_message
{
    byte_buffer payload;
    certificate signer;
    crypto::signature signature;

    void write(writer& w) const;
    static signed_message read(reader& r);
    byte_buffer encode() const;
    static signed_message decode(byte_view data);
};

crypto::digest256 message_digest(byte_view payload, const certificate& signer);

/// Precondition: priv matches signer.verification_key.
signed_message sign_message(const scalar& priv, const certificate& signer, byte_view payload);

/// Signature check only; chain and revocation checks are the trust store's job.
bool verify_message(const signed_message& msg);

/// Verifies `msg` as if it had been sent with `claimed` attached instead.
bool verify_message_with(const signed_message& msg, const certificate& claimed);

} // namespace scms::cert
