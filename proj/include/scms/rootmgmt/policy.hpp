#pragma once

#include <scms/cert/certificate.hpp>
#include <scms/cert/trust_store.hpp>

#include <map>

namespace scms::rootmgmt {

enum class policy_kind : std::uint8_t {
    global_policy = 1,     // GPF
    global_chain = 2,      // GCCF
};

std::string_view to_string(policy_kind k);

/// Signed, versioned file published by the Policy Generator.
struct policy_file
{
    policy_kind kind = policy_kind::global_policy;
    std::uint32_t version = 0;
    byte_buffer content;
    cert::cert_id signer{};
    crypto::signature signature;

    byte_buffer to_be_signed() const;
    byte_buffer encode() const;
    static policy_file decode(byte_view data);
};

/// System-wide configuration carried in the GPF.
struct global_policy
{
    std::uint32_t batch_size = 20;
    std::uint32_t rotation_minutes = 5;
    std::uint32_t crl_capacity = 10000;
    std::uint32_t lookahead_periods = 4;

    byte_buffer encode() const;
    static global_policy decode(byte_view data);
    friend bool operator==(const global_policy&, const global_policy&) = default;
};

/// GCCF body: every certificate chain installed at bootstrap.
byte_buffer encode_chain_file(const std::vector<cert::certificate>& certs);
std::vector<cert::certificate> decode_chain_file(byte_view data);

policy_file pg_publish(policy_kind kind, std::uint32_t version, byte_view content, const cert::certificate& pg,
                       const crypto::scalar& pg_private);

enum class policy_result : std::uint8_t { accepted, stale_version, bad_signature, untrusted_signer };

std::string_view to_string(policy_result r);

/// Device-side intake: accepts only newer versions signed by a PG whose chain verifies.
class policy_tracker
{
public:
    policy_result accept(const policy_file& f, const cert::trust_store& trust, std::uint32_t period);

    /// Reinstates a file from a trusted local snapshot, skipping verification.
    void adopt(policy_file f);

    std::uint32_t version(policy_kind k) const;
    const policy_file* current(policy_kind k) const;

private:
    std::map<policy_kind, policy_file> files_;
};

} // namespace scms::rootmgmt
