#pragma once

#include <scms/authorities/component.hpp>
#include <scms/ma/report.hpp>

#include <memory>

namespace scms::ma {

using authorities::component_id;
using linkage::linkage_value;

struct ma_config
{
    component_id pca = "pca";
    component_id ra = "ra";
    component_id repo = "repo";
    std::map<linkage::la_id, component_id> la_hosts;
    std::uint16_t batch_size = 20; // j_max written into CRL linkage groups
    cert::crl_series_table series;
};

struct revocation_outcome
{
    bool newly_revoked = false;
    std::size_t entries_added = 0;
    std::uint32_t period = 0;
};

/// Misbehavior Authority with its CRL Generator. Learns which certificates
/// belong together only through the PCA/LA/RA queries below, each signed and
/// logged on both ends.
class misbehavior_authority : public authorities::authority
{
public:
    misbehavior_authority(component_id id, authorities::credentials creds, authorities::environment env,
                          crypto::seeded_random rng, ma_config cfg, authorities::credentials crlg,
                          std::unique_ptr<detector> det);

    std::vector<linkage_value> detect();

    /// Groups linkage values by device: plv pairs from the PCA, then one-bit LA queries.
    std::vector<std::vector<linkage_value>> investigate(const std::vector<linkage_value>& lvs);
    bool same_device(const linkage_value& a, const linkage_value& b);

    /// Revocation of the device behind `lv` from the current period on.
    revocation_outcome revoke_pseudonym(const linkage_value& lv);
    /// Non-pseudonym revocation: every non-expired certificate of the device goes on the CRL by CertId.
    revocation_outcome revoke_other(const certificate& c);
    /// SCMS Manager path for component or enrollment certificates.
    revocation_outcome revoke_certificate(const certificate& c, cert::crl_priority priority);

    /// Re-certified (or replaced) CRL generator, e.g. after a root change.
    void set_crl_generator(authorities::credentials crlg);

    /// Signs the next CRL of every permitted series and publishes the composite file.
    std::vector<cert::crl> publish();

    std::vector<cert::crl> current_crls() const;
    std::vector<report_record> reports() const;
    std::size_t discarded_reports() const;
    std::size_t provisioning_anomalies() const;
    const authorities::audit_log& audit() const { return audit_; }
    std::vector<linkage_value> investigated() const;
    std::vector<linkage_value> revoked() const;

protected:
    byte_buffer dispatch(const sim::envelope& request) override;

private:
    byte_buffer ask(const component_id& dst, authorities::msg type, authorities::ma_op op, byte_view body);
    std::vector<authorities::plv_pair_record> plv_pairs(const std::vector<linkage_value>& lvs);
    bool linked(const authorities::plv_pair_record& a, const authorities::plv_pair_record& b);
    void intake(byte_view payload);
    cert::crl& draft(std::uint16_t series);
    void save_draft(const cert::crl& list);
    void note(const std::string& kind, const linkage_value& lv);

    ma_config cfg_;
    authorities::credentials crlg_;
    std::unique_ptr<detector> detector_;
    authorities::audit_log audit_;
    std::uint64_t nonce_ = 0;
    std::size_t discarded_ = 0;
    std::map<std::uint16_t, cert::crl> drafts_;
};

} // namespace scms::ma
