#include <scms/cert/certificate.hpp>
#include <scms/crypto/serialize.hpp>
#include <scms/errors.hpp>

#include <algorithm>

namespace scms::cert {

namespace {

constexpr std::uint8_t flag_encryption = 0x01;
constexpr std::uint8_t flag_linkage = 0x02;

bool is_pseudonymous(cert_type t)
{
    return t == cert_type::obe_pseudonym || t == cert_type::obe_enrollment;
}

void write_tbs(writer& w, const certificate& c)
{
    w.u8(certificate::format_version);
    w.u8(static_cast<std::uint8_t>(c.type));
    w.u8(static_cast<std::uint8_t>(c.role));
    w.str(c.subject);
    crypto::write(w, c.verification_key);
    std::uint8_t flags = 0;
    if (c.encryption_key) flags |= flag_encryption;
    if (c.linkage) flags |= flag_linkage;
    w.u8(flags);
    if (c.encryption_key) {
        crypto::write(w, *c.encryption_key);
    }
    if (c.linkage) {
        w.raw(c.linkage->value);
        w.u32(c.linkage->index.i);
        w.u32(c.linkage->index.j);
    }
    w.u32(c.valid.start);
    w.u32(c.valid.end);
    w.u32(c.psid);
    w.raw(c.craca_id);
    w.u16(c.crl_series);
    w.raw(c.issuer);
    w.u16(static_cast<std::uint16_t>(c.crl_permissions.size()));
    for (auto s : c.crl_permissions) {
        w.u16(s);
    }
}

} // namespace

std::string_view to_string(cert_type t)
{
    switch (t) {
    case cert_type::obe_enrollment: return "obe-enrollment";
    case cert_type::obe_pseudonym: return "obe-pseudonym";
    case cert_type::obe_identification: return "obe-identification";
    case cert_type::rse_enrollment: return "rse-enrollment";
    case cert_type::rse_application: return "rse-application";
    case cert_type::authority: return "authority";
    }
    return "unknown";
}

std::string_view to_string(authority_role r)
{
    switch (r) {
    case authority_role::none: return "none";
    case authority_role::root_ca: return "root-ca";
    case authority_role::intermediate_ca: return "ica";
    case authority_role::enrollment_ca: return "eca";
    case authority_role::pseudonym_ca: return "pca";
    case authority_role::registration: return "ra";
    case authority_role::linkage: return "la";
    case authority_role::misbehavior: return "ma";
    case authority_role::crl_generator: return "crlg";
    case authority_role::policy_generator: return "pg";
    case authority_role::elector: return "elector";
    case authority_role::device_config: return "dcm";
    case authority_role::location_proxy: return "lop";
    }
    return "unknown";
}

std::uint16_t crl_series_table::for_type(cert_type t, authority_role role) const
{
    switch (t) {
    case cert_type::obe_pseudonym: return pseudonym;
    case cert_type::obe_identification:
    case cert_type::rse_application: return identification_application;
    case cert_type::obe_enrollment:
    case cert_type::rse_enrollment: return enrollment;
    case cert_type::authority:
        if (role == authority_role::policy_generator || role == authority_role::crl_generator ||
            role == authority_role::misbehavior) {
            return root_managed;
        }
        return components;
    }
    return components;
}

byte_buffer certificate::to_be_signed() const
{
    writer w;
    write_tbs(w, *this);
    return std::move(w).buffer();
}

crypto::digest256 certificate::tbs_digest() const
{
    return crypto::sha256(to_be_signed());
}

void certificate::write(writer& w) const
{
    write_tbs(w, *this);
    crypto::write(w, signature);
}

certificate certificate::read(reader& r)
{
    certificate c;
    if (r.u8() != format_version) {
        r.fail("unsupported certificate version");
    }
    const auto type = r.u8();
    if (type < 1 || type > 6) {
        r.fail("unknown certificate type");
    }
    c.type = static_cast<cert_type>(type);
    const auto role = r.u8();
    if (role > static_cast<std::uint8_t>(authority_role::location_proxy)) {
        r.fail("unknown authority role");
    }
    c.role = static_cast<authority_role>(role);
    c.subject = r.str();
    c.verification_key = crypto::read_element(r);
    const auto flags = r.u8();
    if (flags & ~(flag_encryption | flag_linkage)) {
        r.fail("unknown certificate flags");
    }
    if (flags & flag_encryption) {
        c.encryption_key = crypto::read_element(r);
    }
    if (flags & flag_linkage) {
        linkage::linkage_value lv;
        lv.value = r.array<linkage::value_size>();
        lv.index.i = r.u32();
        lv.index.j = r.u32();
        c.linkage = lv;
    }
    c.valid.start = r.u32();
    c.valid.end = r.u32();
    c.psid = r.u32();
    c.craca_id = r.array<8>();
    c.crl_series = r.u16();
    c.issuer = r.array<8>();
    const auto n = r.u16();
    c.crl_permissions.reserve(n);
    for (std::uint16_t k = 0; k < n; ++k) {
        c.crl_permissions.push_back(r.u16());
    }
    c.signature = crypto::read_signature(r);
    return c;
}

byte_buffer certificate::encode() const
{
    writer w;
    write(w);
    return std::move(w).buffer();
}

certificate certificate::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) { return certificate::read(r); });
}

crypto::digest256 certificate::digest() const
{
    return crypto::sha256(encode());
}

cert_id cert_id_of(byte_view encoded)
{
    const auto d = crypto::sha256(encoded);
    cert_id id{};
    std::copy_n(d.begin(), id.size(), id.begin());
    return id;
}

cert_id certificate::id() const
{
    return cert_id_of(encode());
}

bool certificate::self_signed() const
{
    return issuer == cert_id{};
}

void certificate::check_profile() const
{
    auto reject = [this](const std::string& why) {
        throw profile_error(std::string(to_string(type)) + " certificate: " + why);
    };
    if (valid.end < valid.start) reject("validity ends before it starts");
    if (verification_key.is_identity()) reject("identity verification key");

    const bool needs_linkage = type == cert_type::obe_pseudonym;
    if (needs_linkage && !linkage) reject("linkage value required");
    if (!needs_linkage && linkage) reject("linkage value not permitted");

    if (encryption_key && type != cert_type::rse_application && type != cert_type::authority) {
        reject("encryption key not permitted");
    }
    if (is_pseudonymous(type) && !subject.empty()) reject("real-world identifier not permitted");

    if (type == cert_type::authority) {
        if (role == authority_role::none) reject("authority role required");
    } else if (role != authority_role::none) {
        reject("end-entity certificate with authority role");
    }
    if (!crl_permissions.empty() && role != authority_role::crl_generator) {
        reject("CRL permissions only for CRL generators");
    }
    if (type == cert_type::obe_pseudonym && linkage && !valid.covers(linkage->index.i)) {
        reject("linkage period outside validity");
    }
}

certificate issue(certificate tbs, const certificate& issuer, const scalar& issuer_private,
                  crypto::signature_algorithm alg)
{
    tbs.issuer = issuer.id();
    tbs.check_profile();
    tbs.signature = crypto::sign(issuer_private, tbs.tbs_digest(), alg);
    return tbs;
}

certificate self_sign(certificate tbs, const scalar& priv, crypto::signature_algorithm alg)
{
    tbs.issuer = cert_id{};
    tbs.check_profile();
    tbs.signature = crypto::sign(priv, tbs.tbs_digest(), alg);
    return tbs;
}

bool signed_by(const certificate& subject, const certificate& issuer)
{
    return crypto::verify(issuer.verification_key, subject.tbs_digest(), subject.signature);
}

} // namespace scms::cert
