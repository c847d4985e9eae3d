#pragma once

#include <scms/cert/certificate.hpp>

#include <limits>
#include <map>
#include <mutex>
#include <set>

namespace scms::cert {

enum class crl_priority : std::uint8_t { normal = 0, high = 1, key_compromise = 2 };

std::string_view to_string(crl_priority p);

/// Per-entry tag byte: bits 0-1 priority, bit 7 set when a 2-byte region hint follows.
struct entry_tag
{
    crl_priority priority = crl_priority::normal;
    std::optional<std::uint16_t> region;

    friend bool operator==(const entry_tag&, const entry_tag&) = default;
};

struct seed_pair
{
    byte_array<linkage::seed_size> seed1{};
    byte_array<linkage::seed_size> seed2{};
    entry_tag tag;

    friend bool operator==(const seed_pair&, const seed_pair&) = default;
};

/// Devices sharing an LA-id pair, revocation period and batch size share one header.
struct linkage_group
{
    linkage::la_id la1;
    linkage::la_id la2;
    std::uint32_t period = 0;
    std::uint16_t j_max = 0;
    std::vector<seed_pair> entries;

    friend bool operator==(const linkage_group&, const linkage_group&) = default;
};

struct id_entry
{
    cert_id id{};
    entry_tag tag;

    friend bool operator==(const id_entry&, const id_entry&) = default;
};

struct crl
{
    std::uint16_t series = 0;
    cert_id craca_id{};
    std::uint32_t issue_period = 0;
    std::uint32_t sequence = 0;
    std::vector<linkage_group> groups;
    std::vector<id_entry> ids;
    cert_id signer{};
    crypto::signature signature;

    /// Appends to the matching group or opens a new one. Returns false if the
    /// identical seed pair is already listed.
    bool add(const linkage::revocation_entry& entry, entry_tag tag = {});
    bool add(const cert_id& id, entry_tag tag = {});

    std::size_t entry_count() const;
    std::vector<linkage::revocation_entry> revocation_entries() const;

    byte_buffer to_be_signed() const;
    void write(writer& w) const;
    static crl read(reader& r);
    byte_buffer encode() const;
    static crl decode(byte_view data);

    friend bool operator==(const crl&, const crl&) = default;
};

void sign_crl(crl& list, const certificate& generator, const scalar& generator_private);

/// Signature check plus jurisdiction: the generator must hold a permission for
/// the CRL's series and be issued directly by the CRACA the CRL names.
bool crl_signed_by(const crl& list, const certificate& generator);

/// All current CRLs in one file: magic, count, then length-prefixed CRLs.
byte_buffer encode_composite(const std::vector<crl>& lists);
std::vector<crl> decode_composite(byte_view data);

enum class crl_status : std::uint8_t { valid, revoked, no_crl };

std::string_view to_string(crl_status s);

/// Latest CRL per (CRACA, series) with an optional cap on the total number of
/// entries. Over the cap, lowest-priority entries are dropped first; ties drop
/// the entries listed earliest. Callers verify signatures before installing.
class crl_store
{
public:
    static constexpr std::size_t unlimited = std::numeric_limits<std::size_t>::max();

    explicit crl_store(std::size_t capacity = unlimited) : capacity_(capacity) {}
    crl_store(const crl_store& other);
    crl_store& operator=(const crl_store& other);

    /// Returns false for a CRL that is not newer than the one held.
    bool install(const crl& list);

    crl_status check(const certificate& c) const;

    const crl* latest(const cert_id& craca, std::uint16_t series) const;
    std::vector<crl> lists() const;
    std::size_t entry_count() const;
    std::size_t evicted() const { return evicted_; }
    std::size_t capacity() const { return capacity_; }

    byte_buffer encode() const;
    static crl_store decode(byte_view data, std::size_t capacity = unlimited);

private:
    using key = std::pair<cert_id, std::uint16_t>;
    using value_set = std::set<byte_array<linkage::value_size>>;

    void enforce_capacity();
    const value_set& revoked_values(const crl& list, std::uint32_t period) const;

    std::size_t capacity_;
    std::size_t evicted_ = 0;
    std::map<key, crl> lists_;

    mutable std::mutex cache_mutex_;
    mutable std::map<std::tuple<cert_id, std::uint16_t, std::uint32_t, std::uint32_t>, value_set> cache_;
};

} // namespace scms::cert
