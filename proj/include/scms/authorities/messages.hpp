#pragma once

#include <scms/butterfly.hpp>
#include <scms/cert/certificate.hpp>
#include <scms/cert/signed_message.hpp>
#include <scms/crypto/hybrid.hpp>
#include <scms/linkage.hpp>
#include <scms/sim/bus.hpp>

#include <optional>
#include <string>
#include <vector>

namespace scms::authorities {

using butterfly::time_index;
using cert::cert_id;
using cert::cert_type;
using cert::certificate;
using crypto::group_element;
using crypto::scalar;
using linkage::la_id;
using linkage::linkage_chain_id;
using linkage::linkage_value;
using sim::component_id;

enum class msg : std::uint16_t {
    lop_forward = 0x0001,
    eca_enroll = 0x0101,
    eca_reestablish = 0x0102,
    ra_provision = 0x0201,
    ra_download = 0x0202,
    ra_report = 0x0203,
    ra_reenroll = 0x0204,
    ra_blacklist = 0x0205,
    la_open_chain = 0x0301,
    la_plv_batch = 0x0302,
    la_link_query = 0x0303,
    la_seed = 0x0304,
    pca_issue = 0x0401,
    pca_lookup = 0x0402,
    pca_plv_pairs = 0x0403,
    pca_cert_ids = 0x0404,
    ma_reports = 0x0501,
    repo_publish = 0x0601,
    repo_fetch = 0x0602,
};

constexpr std::uint16_t tag(msg m) { return static_cast<std::uint16_t>(m); }

/// Name used in traces; unknown tags print as numbers.
std::string msg_name(std::uint16_t type);

void write_lv(writer& w, const linkage_value& lv);
linkage_value read_lv(reader& r);
byte_buffer lv_key(const linkage_value& lv);

/// Signs `payload` under `signer`, then hybrid-encrypts the signed message to `recipient`.
byte_buffer seal_signed(byte_view payload, const certificate& signer, const scalar& signer_private,
                        const group_element& recipient, crypto::random_source& rng);
cert::signed_message open_signed(const scalar& recipient_private, byte_view sealed);

/// Device -> LOP: where the proxy should deliver the inner message.
struct forward_request
{
    component_id dst;
    std::uint16_t type = 0;
    byte_buffer payload;

    byte_buffer encode() const;
    static forward_request decode(byte_view data);
};

/// DCM -> ECA, signed by the DCM.
struct enroll_request
{
    cert_type type = cert_type::obe_enrollment;
    std::string model;
    std::string subject; // RSEs only
    group_element verification_key;
    cert::validity valid;
    std::uint32_t psid = 0;

    byte_buffer encode() const;
    static enroll_request decode(byte_view data);
};

/// Device -> RA (step 1): butterfly seeds for the periods [start, end].
struct provision_request
{
    cert_type kind = cert_type::obe_pseudonym;
    butterfly::caterpillar_request caterpillar;
    std::uint32_t start = 0;
    std::uint32_t end = 0;
    std::uint32_t psid = 0;
    std::string subject; // identification and application certificates only

    byte_buffer encode() const;
    static provision_request decode(byte_view data);
};

struct provision_ack
{
    cert_id handle{};
    std::uint32_t start = 0;
    std::uint32_t end = 0;
    std::uint16_t per_period = 0;

    byte_buffer encode() const;
    static provision_ack decode(byte_view data);
};

struct download_request
{
    std::uint32_t period = 0;

    byte_buffer encode() const;
    static download_request decode(byte_view data);
};

/// Device -> RA: roll-over to a new enrollment key, signed with the old enrollment certificate.
struct reenroll_request
{
    group_element new_key;

    byte_buffer encode() const;
    static reenroll_request decode(byte_view data);
};

/// RA -> ECA, after the RA has checked the roll-over request.
struct reestablish_request
{
    certificate old_enrollment;
    group_element new_key;

    byte_buffer encode() const;
    static reestablish_request decode(byte_view data);
};

struct chain_opened
{
    la_id la;
    linkage_chain_id lci;

    byte_buffer encode() const;
    static chain_opened decode(byte_view data);
};

struct plv_batch_request
{
    linkage_chain_id lci;
    std::uint32_t period = 0;
    std::uint16_t count = 0;

    byte_buffer encode() const;
    static plv_batch_request decode(byte_view data);
};

/// One pre-linkage value in two wrappings: for the PCA, and sealed by the LA to itself
/// so the MA can later present it back during an investigation.
struct plv_item
{
    std::uint32_t j = 0;
    crypto::hybrid_ciphertext for_pca;
    byte_buffer la_sealed;
};

struct plv_batch
{
    la_id la;
    std::vector<plv_item> items;

    byte_buffer encode() const;
    static plv_batch decode(byte_view data);
};

struct linkage_material
{
    la_id la1;
    la_id la2;
    crypto::hybrid_ciphertext enc1;
    crypto::hybrid_ciphertext enc2;
    byte_buffer sealed1;
    byte_buffer sealed2;
};

/// RA -> PCA (step 3): one certificate per request.
struct pca_request
{
    cert_type kind = cert_type::obe_pseudonym;
    time_index index;
    cert::validity valid;
    std::uint32_t psid = 0;
    std::string subject;
    group_element signing_cocoon;
    group_element response_key;
    std::optional<group_element> encryption_cocoon; // RSE application certificates
    std::optional<linkage_material> linkage;        // pseudonym certificates

    byte_buffer encode() const;
    static pca_request decode(byte_view data);
};

/// PCA -> RA -> device (step 5). The signature covers the recipient key and the
/// ciphertext, so a substituted response key shows up at the device.
struct pca_response
{
    group_element recipient_key;
    crypto::hybrid_ciphertext ciphertext;
    crypto::signature signature;

    void write(writer& w) const;
    static pca_response read(reader& r);
    byte_buffer encode() const;
    static pca_response decode(byte_view data);
};

crypto::digest256 response_digest(const group_element& recipient, const crypto::hybrid_ciphertext& ct,
                                  const certificate& pca);

/// Plaintext inside a pca_response.
struct issued_payload
{
    time_index index;
    certificate cert;
    scalar c_sign;
    std::optional<scalar> c_enc;

    byte_buffer encode() const;
    static issued_payload decode(byte_view data);
};

/// Step 6: everything issued for one device and one period.
struct batch
{
    cert_id handle{};
    std::uint32_t period = 0;
    std::vector<pca_response> responses;

    byte_buffer encode() const;
    static batch decode(byte_view data);
    /// `<device-handle>_<period>.batch`
    std::string file_name() const;
};

// --- MA requests ---------------------------------------------------------

enum class ma_op : std::uint8_t {
    plv_pairs = 1,  // PCA: lv -> LA-sealed plv pair
    link_query = 2, // LA: do two sealed plvs belong to one chain?
    lookup = 3,     // PCA: lv or CertId -> request hash + RA
    blacklist = 4,  // RA: blacklist the device behind a request hash
    seed = 5,       // LA: LCI -> ls(i)
    cert_ids = 6,   // PCA: request hashes -> non-expired CertIds
};

std::string_view to_string(ma_op op);

/// Body of every MA request; it travels inside a signed_message from the MA certificate.
struct ma_request
{
    ma_op op = ma_op::lookup;
    std::uint32_t period = 0;
    std::uint64_t nonce = 0;
    byte_buffer body;

    byte_buffer encode() const;
    static ma_request decode(byte_view data);
};

struct plv_pair_record
{
    linkage_value lv;
    la_id la1;
    byte_buffer sealed1;
    la_id la2;
    byte_buffer sealed2;
};

byte_buffer encode_lvs(const std::vector<linkage_value>& lvs);
std::vector<linkage_value> decode_lvs(byte_view data);
byte_buffer encode_plv_pairs(const std::vector<plv_pair_record>& pairs);
std::vector<plv_pair_record> decode_plv_pairs(byte_view data);

struct link_query
{
    byte_buffer sealed_a;
    byte_buffer sealed_b;

    byte_buffer encode() const;
    static link_query decode(byte_view data);
};

enum class lookup_key : std::uint8_t { linkage_value = 0, certificate_id = 1 };

struct lookup_query
{
    lookup_key by = lookup_key::linkage_value;
    byte_buffer key;

    byte_buffer encode() const;
    static lookup_query decode(byte_view data);
};

struct lookup_result
{
    crypto::digest256 request_hash{};
    component_id ra;
    cert_id id{};
    cert::validity valid;

    byte_buffer encode() const;
    static lookup_result decode(byte_view data);
};

enum class blacklist_mode : std::uint8_t { pseudonym = 0, other = 1 };

struct blacklist_order
{
    crypto::digest256 request_hash{};
    blacklist_mode mode = blacklist_mode::pseudonym;

    byte_buffer encode() const;
    static blacklist_order decode(byte_view data);
};

struct chain_ref
{
    component_id la_host;
    la_id la;
    linkage_chain_id lci;
};

/// RA answer: LA hosts and LCIs (pseudonym mode) or the hashes of the device's
/// still-valid requests (other mode). Never the enrollment certificate.
struct blacklist_result
{
    std::vector<chain_ref> chains;
    std::vector<crypto::digest256> open_requests;

    byte_buffer encode() const;
    static blacklist_result decode(byte_view data);
};

struct seed_query
{
    linkage_chain_id lci;
    std::uint32_t period = 0;

    byte_buffer encode() const;
    static seed_query decode(byte_view data);
};

struct seed_result
{
    la_id la;
    linkage::linkage_seed seed;

    byte_buffer encode() const;
    static seed_result decode(byte_view data);
};

byte_buffer encode_hashes(const std::vector<crypto::digest256>& hashes);
std::vector<crypto::digest256> decode_hashes(byte_view data);
byte_buffer encode_ids(const std::vector<cert_id>& ids);
std::vector<cert_id> decode_ids(byte_view data);

struct publication
{
    std::string name;
    byte_buffer content;

    byte_buffer encode() const;
    static publication decode(byte_view data);
};

} // namespace scms::authorities
