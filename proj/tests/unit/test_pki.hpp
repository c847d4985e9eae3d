#pragma once

#include <scms/cert/certificate.hpp>
#include <scms/crypto/random.hpp>

// Small hierarchy for unit tests: root -> ICA -> PCA, root -> CRLG.
struct test_pki
{
    scms::crypto::seeded_random rng{0x5eed};
    scms::crypto::key_pair root_keys = scms::crypto::key_pair::generate(rng);
    scms::crypto::key_pair ica_keys = scms::crypto::key_pair::generate(rng);
    scms::crypto::key_pair pca_keys = scms::crypto::key_pair::generate(rng);
    scms::crypto::key_pair crlg_keys = scms::crypto::key_pair::generate(rng);
    scms::cert::certificate root, ica, pca, crlg;

    test_pki()
    {
        using namespace scms::cert;
        root = self_sign(authority(authority_role::root_ca, "root", root_keys), root_keys.private_key);
        ica = issue(authority(authority_role::intermediate_ca, "ica", ica_keys), root, root_keys.private_key);
        pca = issue(authority(authority_role::pseudonym_ca, "pca", pca_keys), ica, ica_keys.private_key);
        auto g = authority(authority_role::crl_generator, "crlg", crlg_keys);
        g.crl_permissions = {series::pseudonym, series::components, series::identification_application};
        crlg = issue(g, root, root_keys.private_key);
    }

    scms::cert::certificate authority(scms::cert::authority_role role, const std::string& name,
                                      const scms::crypto::key_pair& keys) const
    {
        scms::cert::certificate c;
        c.type = scms::cert::cert_type::authority;
        c.role = role;
        c.subject = name;
        c.verification_key = keys.public_key;
        c.valid = {0, 1000};
        c.crl_series = scms::cert::series::components;
        if (role != scms::cert::authority_role::root_ca) c.craca_id = root.id();
        return c;
    }

    scms::cert::certificate pseudonym(const scms::crypto::key_pair& keys, scms::linkage::linkage_value lv)
    {
        scms::cert::certificate c;
        c.type = scms::cert::cert_type::obe_pseudonym;
        c.verification_key = keys.public_key;
        c.linkage = lv;
        c.valid = {lv.index.i, lv.index.i};
        c.psid = 0x20;
        c.craca_id = root.id();
        c.crl_series = scms::cert::series::pseudonym;
        return scms::cert::issue(c, pca, pca_keys.private_key);
    }
};
