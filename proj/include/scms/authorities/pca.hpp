#pragma once

#include <scms/authorities/component.hpp>

#include <set>

namespace scms::authorities {

struct pca_config
{
    std::set<component_id> ras{"ra"};
    component_id ma = "ma";
    cert_id craca{};
    std::uint32_t daily_ma_cap = 1000;
};

/// What the PCA keeps per issued certificate.
struct pca_record
{
    certificate cert;
    crypto::digest256 request_hash{};
    component_id ra;
    std::optional<linkage_value> lv;
    la_id la1;
    byte_buffer sealed1;
    la_id la2;
    byte_buffer sealed2;

    byte_buffer encode() const;
    static pca_record decode(byte_view data);
};

/// Pseudonym CA (also issues identification and RSE application certificates).
/// Sees single-certificate requests from the RA, never an enrollment certificate.
class pseudonym_ca : public authority
{
public:
    pseudonym_ca(component_id id, credentials creds, environment env, crypto::seeded_random rng, pca_config cfg);

    std::size_t issued() const;
    std::size_t rejected() const;
    const ma_gate& gate() const { return gate_; }
    void set_daily_cap(std::uint32_t cap);
    void set_craca(const cert_id& craca);

    /// White-box accessor for tests and audits: the record stored for `lv`.
    std::optional<pca_record> record_for(const linkage_value& lv) const;

protected:
    byte_buffer dispatch(const sim::envelope& request) override;

private:
    byte_buffer issue(const sim::envelope& e);
    std::optional<pca_record> find(const std::string& index, byte_view key) const;

    pca_config cfg_;
    ma_gate gate_;
    std::size_t rejected_ = 0;
};

} // namespace scms::authorities
