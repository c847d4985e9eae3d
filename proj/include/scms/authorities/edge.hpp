#pragma once

#include <scms/authorities/component.hpp>
#include <scms/rootmgmt/policy.hpp>

#include <atomic>
#include <set>

namespace scms::authorities {

/// Location Obscurer Proxy: re-sends a device's inner message under its own
/// source id. The payload is passed through byte for byte.
class location_obscurer : public sim::endpoint
{
public:
    location_obscurer(component_id id, sim::bus& bus, std::set<component_id> destinations) :
        id_(std::move(id)), bus_(bus), destinations_(std::move(destinations))
    {
    }

    const component_id& id() const override { return id_; }
    byte_buffer handle(const sim::envelope& request) override;

    std::uint64_t forwarded() const { return forwarded_; }

private:
    component_id id_;
    sim::bus& bus_;
    std::set<component_id> destinations_;
    std::atomic<std::uint64_t> forwarded_{0};
};

/// Pull-model distribution point for CRLs, ballots and policy files. Each
/// publication name has one authorised publisher.
class repository : public sim::endpoint
{
public:
    explicit repository(component_id id) : id_(std::move(id)) {}

    const component_id& id() const override { return id_; }
    byte_buffer handle(const sim::envelope& request) override;

    void authorise(const std::string& name, const component_id& publisher);
    /// Direct publication by the SCMS Manager (scenario script).
    void put(const std::string& name, byte_buffer content);
    std::optional<byte_buffer> get(const std::string& name) const;

private:
    component_id id_;
    mutable std::mutex mutex_;
    std::map<std::string, component_id> publishers_;
    std::map<std::string, byte_buffer> content_;
};

struct eca_config
{
    component_id dcm = "dcm";
    component_id ra = "ra";
    cert_id craca{};
};

/// Enrollment CA: issues enrollment certificates for the DCM at bootstrap and
/// for the RA on roll-over (re-establishment).
class enrollment_ca : public authority
{
public:
    enrollment_ca(component_id id, credentials creds, environment env, crypto::seeded_random rng, eca_config cfg);

    /// New certificate for this ECA (e.g. under a new root). Earlier ECA
    /// certificates stay recognised for roll-over requests.
    void recertify(credentials fresh, const cert_id& craca);
    std::size_t issued() const;

protected:
    byte_buffer dispatch(const sim::envelope& request) override;

private:
    certificate issue_enrollment(cert_type type, const std::string& subject, const group_element& key,
                                 cert::validity valid, std::uint32_t psid);

    eca_config cfg_;
    std::set<cert_id> history_;
};

/// What a device leaves the secure bootstrap environment with.
struct bootstrap_bundle
{
    certificate enrollment;
    std::vector<certificate> electors;
    std::vector<certificate> authorities; // roots, ICAs, ECA, PCA, RA, LAs, MA, CRLG, PG, ...
    std::vector<byte_buffer> ballots;     // root endorsements
    rootmgmt::policy_file gpf;
    rootmgmt::policy_file gccf;
    component_id ra;
    component_id ma;
    component_id repo;
    component_id lop;

    byte_buffer encode() const;
    static bootstrap_bundle decode(byte_view data);
};

struct dcm_config
{
    component_id eca = "eca";
    std::set<std::string> certified_models;
};

/// Device Configuration Manager. Not reachable over the bus by devices:
/// bootstrapping happens in a secure environment, the DCM then talks to the ECA.
class device_config_manager
{
public:
    device_config_manager(component_id id, credentials creds, sim::bus& bus, dcm_config cfg);

    const component_id& id() const { return id_; }

    /// Everything but the enrollment certificate is the same for every device.
    void set_template(bootstrap_bundle common);
    void certify_model(const std::string& model);
    void set_credentials(credentials creds);

    /// Throws refused for a model not on the certification allowlist.
    bootstrap_bundle bootstrap(const enroll_request& req);

private:
    component_id id_;
    credentials creds_;
    sim::bus& bus_;
    dcm_config cfg_;
    mutable std::mutex mutex_;
    bootstrap_bundle template_;
};

} // namespace scms::authorities
