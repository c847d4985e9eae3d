#pragma once

#include <scms/authorities/component.hpp>

#include <memory>
#include <set>

namespace scms::authorities {

struct ra_config
{
    component_id eca = "eca";
    component_id pca = "pca";
    component_id ma = "ma";
    component_id la1 = "la1";
    component_id la2 = "la2";
    component_id lop = "lop";
    std::uint16_t batch_size = 20;        // pseudonym certificates per period
    std::uint16_t other_per_period = 1;   // identification / application certificates per period
    std::uint32_t lookahead_periods = 4;  // periods pre-generated ahead of the current one
    std::uint32_t pickup_cutoff_periods = 8;
    std::size_t shuffle_max = 10000;
    std::uint32_t shuffle_days = 1;
    std::uint32_t max_span_periods = 3 * 53;
    std::uint32_t daily_ma_cap = 1000;
};

/// Hooks for an insider at the RA; used to stage the response-key substitution attack.
class ra_insider
{
public:
    virtual ~ra_insider() = default;
    virtual void before_pca(pca_request&) {}
    virtual void after_pca(const pca_request&, pca_response&) {}
};

/// One accepted provisioning request: what to generate and up to which period.
struct ra_grant
{
    cert_type kind = cert_type::obe_pseudonym;
    butterfly::caterpillar_request caterpillar;
    std::uint32_t start = 0;
    std::uint32_t end = 0;
    std::uint32_t next = 0; // first period not yet generated
    std::uint32_t psid = 0;
    std::string subject;
};

/// RA-side state per device, keyed by the device handle (id of the first enrollment certificate).
struct enrollment_record
{
    certificate enrollment;
    bool blacklisted = false;
    std::uint32_t last_pickup = 0;
    std::vector<chain_ref> chains; // LA1, LA2 pairs in order
    std::vector<ra_grant> grants;

    byte_buffer encode() const;
    static enrollment_record decode(byte_view data);
};

/// Registration Authority: authenticates devices, expands butterfly seeds,
/// gathers pre-linkage values, shuffles single-certificate requests toward the
/// PCA and assembles per-period batches.
class registration_authority : public authority
{
public:
    registration_authority(component_id id, credentials creds, environment env, crypto::seeded_random rng,
                           ra_config cfg);

    /// Timer event: pre-generation, shuffle-buffer flush when due, report forwarding.
    void tick();
    /// Flushes the shuffle buffer regardless of thresholds.
    void flush();
    /// Forwards buffered misbehavior reports, shuffled, to the MA.
    void flush_reports();
    /// Drops batches for `period` onwards and generates them again on the next
    /// tick, e.g. after the PCA was re-certified under a new root.
    void regenerate_from(std::uint32_t period);

    void set_insider(std::shared_ptr<ra_insider> insider);
    /// Devices enrolled under this (earlier) ECA certificate may roll over even
    /// though their chain no longer verifies.
    void accept_recertified_eca(const cert_id& old_eca);
    void set_daily_cap(std::uint32_t cap);

    std::size_t buffered() const;
    std::size_t pca_failures() const;
    bool blacklisted(const cert_id& handle) const;
    std::optional<enrollment_record> record(const cert_id& handle) const;
    /// Device handle of every request in the order it was sent to the PCA.
    std::vector<cert_id> emitted_order() const;
    const ma_gate& gate() const { return gate_; }
    const ra_config& config() const { return cfg_; }

protected:
    byte_buffer dispatch(const sim::envelope& request) override;

private:
    struct pending
    {
        pca_request request;
        cert_id handle{};
    };

    cert::signed_message open_device_request(byte_view sealed) const;
    void check_enrollment(const certificate& enrollment) const;
    std::optional<cert_id> handle_of(const certificate& enrollment) const;
    std::optional<enrollment_record> load(const cert_id& handle) const;
    void save(const cert_id& handle, const enrollment_record& rec);

    byte_buffer provision(const sim::envelope& e);
    byte_buffer download(const sim::envelope& e);
    byte_buffer reenroll(const sim::envelope& e);
    byte_buffer blacklist(const sim::envelope& e);

    bool ensure_chains(enrollment_record& rec);
    void generate(const cert_id& handle, const enrollment_record& rec, const ra_grant& g, std::uint32_t period);
    void flush_locked();

    ra_config cfg_;
    ma_gate gate_;
    std::shared_ptr<ra_insider> insider_;
    std::set<cert_id> recertified_;
    std::vector<pending> buffer_;
    std::uint64_t buffer_open_day_ = 0;
    std::size_t pca_failures_ = 0;
    std::vector<cert_id> emitted_;
    std::mutex reports_mutex_;
    std::vector<byte_buffer> reports_;
};

} // namespace scms::authorities
