#pragma once

#include <scms/authorities/messages.hpp>
#include <scms/cert/crl.hpp>
#include <scms/cert/trust_store.hpp>
#include <scms/crypto/random.hpp>
#include <scms/persistence/store.hpp>
#include <scms/sim/bus.hpp>

#include <map>
#include <mutex>
#include <set>

namespace scms::authorities {

/// A component's certificate with its signing key and, for components that
/// receive encrypted traffic, the private half of the certificate's encryption key.
struct credentials
{
    certificate cert;
    scalar signing_private;
    std::optional<scalar> encryption_private;
};

/// What every component is wired to.
struct environment
{
    sim::bus& bus;
    const sim::clock& clock;
    persistence::database& db;
};

/// Base for SCMS authorities: one message at a time under the component's own
/// mutex, a private store namespace, and its own view of trust and revocation.
class authority : public sim::endpoint
{
public:
    authority(component_id id, credentials creds, environment env, crypto::seeded_random rng);

    const component_id& id() const override { return id_; }
    byte_buffer handle(const sim::envelope& request) final;

    certificate cert() const;
    void set_credentials(credentials creds);
    void set_trust(const cert::trust_store& trust);
    /// Callers verify the CRL first.
    void install_crl(const cert::crl& list);

protected:
    virtual byte_buffer dispatch(const sim::envelope& request) = 0;

    const scalar& encryption_private() const;
    sim::sim_time now() const { return env_.clock.now(); }
    void require_source(const sim::envelope& e, const component_id& expected) const;

    mutable std::recursive_mutex mutex_;
    component_id id_;
    credentials creds_;
    environment env_;
    persistence::store_namespace& store_;
    crypto::seeded_random rng_;
    cert::trust_store trust_;
    cert::crl_store crls_;
};

/// Append-only log line: {period, requester, operation, object hash, outcome}.
struct audit_entry
{
    std::uint32_t period = 0;
    component_id requester;
    std::string operation;
    crypto::digest256 object{};
    std::string outcome;

    std::string line() const;
    static audit_entry parse(const std::string& line);
};

/// Audit records live in the owning component's namespace under kind "audit".
class audit_log
{
public:
    audit_log(persistence::store_namespace& ns, component_id owner) : ns_(ns), owner_(std::move(owner)) {}

    void append(const audit_entry& e);
    std::vector<audit_entry> entries() const;

private:
    persistence::store_namespace& ns_;
    component_id owner_;
};

/// Admission check for MA requests at the PCA, the LAs and the RA: MA role,
/// chain, signature, no replay, and a per-day quota. Every decision is logged.
class ma_gate
{
public:
    ma_gate(persistence::store_namespace& ns, component_id owner, std::uint32_t daily_cap) :
        log_(ns, std::move(owner)), daily_cap_(daily_cap)
    {
    }

    /// Returns the decoded request; throws refused after logging the refusal.
    ma_request admit(byte_view signed_request, const component_id& requester, const cert::trust_store& trust,
                     const sim::sim_time& now, ma_op expected);

    void set_daily_cap(std::uint32_t cap) { daily_cap_ = cap; }
    const audit_log& log() const { return log_; }

private:
    audit_log log_;
    std::uint32_t daily_cap_;
    std::map<std::uint64_t, std::uint32_t> per_day_;
    std::set<crypto::digest256> seen_;
};

} // namespace scms::authorities
