#pragma once

#include <scms/codec.hpp>
#include <scms/crypto/group.hpp>
#include <scms/crypto/hash.hpp>
#include <scms/crypto/signature.hpp>
#include <scms/linkage.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scms::cert {

using crypto::group_element;
using crypto::scalar;

enum class cert_type : std::uint8_t {
    obe_enrollment = 1,
    obe_pseudonym = 2,
    obe_identification = 3,
    rse_enrollment = 4,
    rse_application = 5,
    authority = 6, // CA and SCMS component certificates, electors included
};

enum class authority_role : std::uint8_t {
    none = 0,
    root_ca = 1,
    intermediate_ca = 2,
    enrollment_ca = 3,
    pseudonym_ca = 4,
    registration = 5,
    linkage = 6,
    misbehavior = 7,
    crl_generator = 8,
    policy_generator = 9,
    elector = 10,
    device_config = 11,
    location_proxy = 12,
};

std::string_view to_string(cert_type t);
std::string_view to_string(authority_role r);

/// Truncated certificate hash: leading 8 bytes of SHA-256 over the full encoding.
using cert_id = byte_array<8>;

/// CRL series defaults. The mapping lives in crl_series_table so deployments can change it.
namespace series {
inline constexpr std::uint16_t pseudonym = 1;
inline constexpr std::uint16_t components = 2;
inline constexpr std::uint16_t identification_application = 3;
inline constexpr std::uint16_t enrollment = 4;
inline constexpr std::uint16_t root_managed = 256;
} // namespace series

struct crl_series_table
{
    std::uint16_t pseudonym = series::pseudonym;
    std::uint16_t components = series::components;
    std::uint16_t identification_application = series::identification_application;
    std::uint16_t enrollment = series::enrollment;
    std::uint16_t root_managed = series::root_managed;

    /// PG, CRLG and MA certificates sit on the root-managed series; other authorities on components.
    std::uint16_t for_type(cert_type t, authority_role role = authority_role::none) const;
};

/// Inclusive range of period indices (weeks).
struct validity
{
    std::uint32_t start = 0;
    std::uint32_t end = 0;

    bool covers(std::uint32_t period) const { return start <= period && period <= end; }
    friend bool operator==(const validity&, const validity&) = default;
};

struct certificate
{
    static constexpr std::uint8_t format_version = 1;

    cert_type type = cert_type::authority;
    authority_role role = authority_role::none;
    std::string subject; // empty for pseudonymous types
    group_element verification_key;
    std::optional<group_element> encryption_key;
    std::optional<linkage::linkage_value> linkage;
    cert::validity valid;
    std::uint32_t psid = 0;
    cert_id craca_id{};
    std::uint16_t crl_series = 0;
    cert_id issuer{}; // all-zero for self-signed
    std::vector<std::uint16_t> crl_permissions; // series a CRL generator may sign
    crypto::signature signature;

    /// Everything but the signature.
    byte_buffer to_be_signed() const;
    crypto::digest256 tbs_digest() const;

    void write(writer& w) const;
    static certificate read(reader& r);
    byte_buffer encode() const;
    static certificate decode(byte_view data);

    crypto::digest256 digest() const;
    cert_id id() const;

    bool self_signed() const;

    /// Throws profile_error when the feature flags contradict the certificate type.
    void check_profile() const;

    friend bool operator==(const certificate&, const certificate&) = default;
};

/// Fills issuer, signs with the issuer's key. The profile is checked first.
certificate issue(certificate tbs, const certificate& issuer, const scalar& issuer_private,
                  crypto::signature_algorithm alg = crypto::signature_algorithm::ecdsa_p256_sha256);

certificate self_sign(certificate tbs, const scalar& priv,
                      crypto::signature_algorithm alg = crypto::signature_algorithm::ecdsa_p256_sha256);

/// Checks the signature of `subject` against `issuer`'s verification key.
bool signed_by(const certificate& subject, const certificate& issuer);

cert_id cert_id_of(byte_view encoded_certificate);

} // namespace scms::cert
