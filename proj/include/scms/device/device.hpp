#pragma once

#include <scms/authorities/edge.hpp>
#include <scms/butterfly.hpp>
#include <scms/cert/crl.hpp>
#include <scms/cert/signed_message.hpp>
#include <scms/cert/trust_store.hpp>
#include <scms/rootmgmt/electors.hpp>
#include <scms/rootmgmt/policy.hpp>

#include <map>
#include <memory>

namespace scms::ee {

using authorities::component_id;
using cert::certificate;
using crypto::scalar;

/// Placeholder safety-message content; the values carry no semantics here.
struct bsm_payload
{
    std::uint32_t period = 0;
    std::uint32_t minute = 0;
    std::int32_t latitude = 0;
    std::int32_t longitude = 0;
    std::uint16_t speed = 0;

    byte_buffer encode() const;
    static bsm_payload decode(byte_view data);
};

enum class bsm_verdict : std::uint8_t {
    accepted,
    malformed,
    wrong_certificate_type,
    stale,
    outside_validity,
    unknown_issuer,
    invalid_issuer,
    bad_chain_signature,
    untrusted_root,
    chain_revoked,
    profile_violation,
    revoked,
    bad_signature,
};

std::string_view to_string(bsm_verdict v);

/// Picks which of the current period's certificates signs at time t.
class rotation_policy
{
public:
    virtual ~rotation_policy() = default;
    virtual std::size_t select(std::size_t available, const sim::sim_time& t) const = 0;
};

/// Changes certificate every `minutes` simulated minutes.
class fixed_interval_rotation final : public rotation_policy
{
public:
    explicit fixed_interval_rotation(std::uint32_t minutes) : minutes_(minutes ? minutes : 1) {}
    std::size_t select(std::size_t available, const sim::sim_time& t) const override
    {
        return (t.minute / minutes_) % available;
    }

private:
    std::uint32_t minutes_;
};

struct device_settings
{
    std::string model = "obu-model-a";
    cert::cert_type enrollment_type = cert::cert_type::obe_enrollment;
    std::string subject; // RSE name
    std::uint32_t psid = 0x20;
    std::uint32_t enrollment_periods = 3 * 53;
    std::uint32_t rotation_minutes = 5;
    std::size_t crl_capacity = 10000;
};

struct held_cert
{
    certificate cert;
    scalar signing_private;
    std::optional<scalar> encryption_private;
};

struct install_report
{
    std::size_t installed = 0;
    std::size_t duplicates = 0;
    std::size_t wrong_recipient = 0;   // response key not one of ours: substitution
    std::size_t bad_pca_signature = 0; // ciphertext or key altered after signing
    std::size_t undecryptable = 0;
    std::size_t invalid_certificate = 0;
    std::size_t key_mismatch = 0;      // reconstructed b'G differs from the certificate key

    std::size_t rejected() const
    {
        return wrong_recipient + bad_pca_signature + undecryptable + invalid_certificate + key_mismatch;
    }
};

/// End entity: one state machine per OBE or RSE.
class device
{
public:
    device(component_id id, device_settings settings, crypto::seeded_random rng);

    const component_id& id() const { return id_; }
    const device_settings& settings() const { return settings_; }

    // --- bootstrap and enrollment ---
    void bootstrap(authorities::device_config_manager& dcm, std::uint32_t period);
    bool bootstrapped() const { return bundle_.has_value(); }
    const certificate& enrollment() const;
    /// Roll-over: new key pair, request signed with the current enrollment certificate.
    void reestablish(sim::bus& bus, std::uint32_t period);

    // --- provisioning ---
    authorities::provision_ack request_certificates(sim::bus& bus, std::uint32_t start, std::uint32_t end,
                                                    cert::cert_type kind = cert::cert_type::obe_pseudonym);
    install_report download(sim::bus& bus, std::uint32_t period);
    install_report install_batch(const authorities::batch& b);
    std::optional<cert::cert_id> handle() const { return handle_; }
    /// Drops held certificates from `period` on whose chain no longer verifies
    /// (e.g. after a root change) so they can be downloaded again. Returns the count.
    std::size_t discard_unverifiable(std::uint32_t period);

    // --- operation ---
    /// Nothing to sign with in this period: no message.
    std::optional<cert::signed_message> sign_bsm(const sim::sim_time& now, bsm_payload payload);
    bsm_verdict validate_bsm(const cert::signed_message& msg, const sim::sim_time& now) const;
    void report_misbehavior(sim::bus& bus, const cert::signed_message& evidence, const sim::sim_time& now);
    void set_rotation(std::unique_ptr<rotation_policy> policy) { rotation_ = std::move(policy); }

    // --- trust and revocation ---
    /// Pulls CRLs, ballots and policy files from the repository. Returns CRLs installed.
    std::size_t sync(sim::bus& bus, std::uint32_t period);
    /// Bad signature or jurisdiction: the whole CRL is discarded.
    bool store_crl(const cert::crl& list, std::uint32_t period);
    rootmgmt::verdict accept_ballot(const rootmgmt::ballot& b);
    rootmgmt::policy_result accept_policy(const rootmgmt::policy_file& f, std::uint32_t period);

    // --- introspection ---
    const std::map<std::uint32_t, std::vector<held_cert>>& certificates() const { return certs_; }
    std::vector<certificate> certificates_for(std::uint32_t period) const;
    std::size_t quarantined() const { return quarantined_; }
    std::size_t mitm_detected() const { return mitm_detected_; }
    const cert::crl_store& crls() const { return crls_; }
    const cert::trust_store& trust() const { return trust_; }
    const rootmgmt::trust_state& electorate() const { return electorate_; }
    const rootmgmt::policy_tracker& policies() const { return policies_; }

    /// Canonical binary snapshot. Restoring needs a fresh random stream.
    byte_buffer snapshot() const;
    static device restore(byte_view data, crypto::seeded_random rng);

private:
    struct grant
    {
        cert::cert_type kind = cert::cert_type::obe_pseudonym;
        std::uint32_t start = 0;
        std::uint32_t end = 0;
        std::uint16_t per_period = 0;
        butterfly::caterpillar_secrets secrets;
    };

    void require_bootstrapped() const;
    byte_buffer via_proxy(sim::bus& bus, const component_id& dst, authorities::msg type, byte_view payload);
    const certificate& authority_cert(cert::authority_role role) const;
    void absorb_authorities(const std::vector<certificate>& certs);
    void refresh_trust();
    const grant* grant_for(std::uint32_t period, cert::cert_type kind) const;
    void send_provisioning_report(sim::bus& bus, const authorities::pca_response& resp);

    component_id id_;
    device_settings settings_;
    crypto::seeded_random rng_;
    std::unique_ptr<rotation_policy> rotation_;

    std::optional<authorities::bootstrap_bundle> bundle_;
    std::optional<scalar> enrollment_private_;
    std::optional<cert::cert_id> handle_;
    std::vector<grant> grants_;
    std::map<std::uint32_t, std::vector<held_cert>> certs_;
    std::map<cert::authority_role, certificate> directory_;

    rootmgmt::trust_state electorate_;
    rootmgmt::policy_tracker policies_;
    cert::trust_store trust_;
    cert::crl_store crls_;

    std::size_t quarantined_ = 0;
    std::size_t mitm_detected_ = 0;
    std::vector<authorities::pca_response> pending_anomalies_;
};

} // namespace scms::ee
