#pragma once

#include <scms/cert/crl.hpp>

#include <map>
#include <mutex>
#include <set>

namespace scms::cert {

enum class chain_status : std::uint8_t {
    ok,
    unknown_issuer,
    invalid_issuer, // issuer is not a CA
    bad_signature,
    expired,
    untrusted_root,
    revoked,
    profile_violation,
    too_long,
};

std::string_view to_string(chain_status s);

/// Known CA/component certificates plus the set of currently trusted roots.
/// Root trust is decided elsewhere (elector ballots) and pushed in.
class trust_store
{
public:
    static constexpr int max_depth = 6;

    trust_store() = default;
    trust_store(const trust_store& other);
    trust_store& operator=(const trust_store& other);

    void add(const certificate& c);
    void set_trusted_roots(const std::vector<certificate>& roots);
    bool is_trusted_root(const cert_id& id) const { return roots_.count(id) != 0; }

    const certificate* find(const cert_id& id) const;
    std::vector<certificate> all() const;

    /// Walks issuer links to a trusted root, checking signatures, profiles,
    /// validity at `period` and, when `crls` is given, revocation of every link.
    chain_status verify_chain(const certificate& c, std::uint32_t period, const crl_store* crls = nullptr) const;

    /// CRL acceptance: its generator's chain verifies and crl_signed_by holds.
    bool verify_crl(const crl& list, std::uint32_t period) const;

private:
    bool signature_ok(const certificate& subject, const certificate& issuer) const;

    std::map<cert_id, certificate> certs_;
    std::set<cert_id> roots_;

    mutable std::mutex cache_mutex_;
    mutable std::set<std::pair<crypto::digest256, cert_id>> verified_;
};

bool is_ca_role(authority_role r);

} // namespace scms::cert
