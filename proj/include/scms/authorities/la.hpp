#pragma once

#include <scms/authorities/component.hpp>

namespace scms::authorities {

struct la_config
{
    la_id la;
    component_id ra = "ra";
    component_id ma = "ma";
    group_element pca_encryption_key;
    std::uint32_t daily_ma_cap = 1000;
};

/// Linkage Authority. Keeps, per chain, the initial seed and every pre-linkage
/// value it has handed out; answers the MA with one bit (link query) or with
/// ls(i) for a revocation.
class linkage_authority : public authority
{
public:
    linkage_authority(component_id id, credentials creds, environment env, crypto::seeded_random rng, la_config cfg);

    la_id la() const { return cfg_.la; }
    std::size_t chains() const;
    const ma_gate& gate() const { return gate_; }
    void set_daily_cap(std::uint32_t cap);

protected:
    byte_buffer dispatch(const sim::envelope& request) override;

private:

    byte_buffer open_chain();
    byte_buffer plv_batch_for(const plv_batch_request& req);
    bool link(const link_query& q);
    seed_result seed_for(const seed_query& q);

    byte_buffer chain_key(const linkage_chain_id& lci) const;
    linkage::linkage_seed chain_seed(const linkage_chain_id& lci) const;
    crypto::symmetric_key seal_key() const;
    byte_buffer seal(const linkage::pre_linkage_value& plv);
    std::optional<linkage::pre_linkage_value> unseal(byte_view sealed) const;

    la_config cfg_;
    ma_gate gate_;
};

} // namespace scms::authorities
