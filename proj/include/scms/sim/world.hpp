#pragma once

#include <scms/authorities/edge.hpp>
#include <scms/authorities/la.hpp>
#include <scms/authorities/pca.hpp>
#include <scms/authorities/ra.hpp>
#include <scms/device/device.hpp>
#include <scms/ma/ma.hpp>
#include <scms/rootmgmt/electors.hpp>
#include <scms/sim/scenario.hpp>

#include <chrono>
#include <functional>
#include <memory>
#include <ostream>
#include <set>

namespace scms::sim {

using authorities::credentials;

/// Key pairs and certificates of the SCMS components, plus the elector set.
struct pki
{
    struct elector
    {
        crypto::key_pair keys;
        crypto::signature_algorithm alg = crypto::signature_algorithm::ecdsa_p256_sha256;
        cert::certificate cert;
    };

    std::vector<elector> electors;
    credentials root, ica, eca, pca, ra, la1, la2, ma, crlg, pg, dcm;

    /// Every certificate a device should know, in chain-file order.
    std::vector<cert::certificate> chain() const;
};

struct bsm_tally
{
    std::uint64_t sent = 0;
    std::uint64_t not_sent = 0; // no usable certificate this period
    std::map<std::string, std::uint64_t> verdicts;

    std::uint64_t accepted() const;
    std::uint64_t rejected() const;
};

/// One revoked device and when.
struct revocation
{
    std::size_t device = 0;
    std::uint32_t period = 0;
    std::uint32_t misbehaved = 0;
    cert::cert_id handle{};

    // Held certificates judged against a peer's CRL store right after publication.
    std::size_t held = 0;
    std::size_t flagged = 0;
    std::size_t due = 0;            // held certificates valid at or after `period`
    std::size_t flagged_before = 0; // flagged although only valid before `period`
};

/// Counters a run exposes as JSON and checks against the scenario's `expect`.
struct metrics
{
    std::map<std::string, double> values;
    std::map<std::string, std::string> labels;
    std::vector<std::string> violations;

    double at(const std::string& key) const;
    void set(const std::string& key, double v) { values[key] = v; }
    void add(const std::string& key, double v) { values[key] += v; }
    std::string json() const;
};

class substitution_insider;

/// The whole system in one process: clock, bus, stores, every authority and
/// the device fleet, wired as in a deployment. The scenario script plays the
/// SCMS Manager.
class world
{
public:
    explicit world(scenario s);
    ~world();

    world(const world&) = delete;
    world& operator=(const world&) = delete;

    const scenario& config() const { return cfg_; }
    sim::clock& clk() { return clock_; }
    sim::bus& net() { return *bus_; }
    persistence::database& db() { return db_; }
    const persistence::database& db() const { return db_; }
    const sim::pki& keys() const { return pki_; }

    authorities::registration_authority& ra() { return *ra_; }
    authorities::pseudonym_ca& pca() { return *pca_; }
    authorities::linkage_authority& la1() { return *la1_; }
    authorities::linkage_authority& la2() { return *la2_; }
    authorities::enrollment_ca& eca() { return *eca_; }
    ma::misbehavior_authority& ma() { return *ma_; }
    authorities::repository& repo() { return *repo_; }
    authorities::location_obscurer& lop() { return *lop_; }
    authorities::device_config_manager& dcm() { return *dcm_; }

    std::size_t device_count() const { return devices_.size(); }
    ee::device& device(std::size_t k) { return *devices_.at(k); }
    bool is_rse(std::size_t k) const { return k >= cfg_.devices; }
    const std::vector<revocation>& revocations() const { return revocations_; }
    bool revoked(std::size_t k) const;

    void set_trace(std::ostream* out) { bus_->set_trace_sink(out); }

    // --- scenario steps -----------------------------------------------------------
    void bootstrap_all();
    void provision_all();
    /// Start of period p: pre-generation, a day of shuffling, CRL publication, sync.
    void open_period(std::uint32_t p);
    /// Downloads every batch the device lacks from p up to the RA's horizon.
    void download_all(std::uint32_t p);
    void sync_all();
    /// Every device signs its BSMs; the next device in the fleet validates them.
    void operate(std::uint32_t p);
    void run_event(const scenario_event& e);
    /// Publishes the current CRLs, installs them at the authorities, devices pull.
    void publish_crls();

    /// Whole scenario: bootstrap, provisioning, weekly operation, events, audits.
    metrics run();

    /// Post-run checks that feed the metrics.
    void evaluate(metrics& m);

    /// Fresh certificate for `subject` under `issuer`, same keys as before.
    credentials recertify(const credentials& subject, const credentials& issuer);

private:
    void build_pki();
    void wire_components();
    void refresh_authority_trust();
    void publish_manager_files();
    void add_ballot(rootmgmt::action_kind kind, const cert::certificate& object, const std::vector<std::size_t>& voters);
    void for_each_device(const std::function<void(std::size_t)>& fn);
    std::size_t validator_for(std::size_t k) const;

    std::vector<std::size_t> active_electors() const;
    void judge(revocation& r);

    void misbehave(const scenario_event& e);
    void revoke_other(const scenario_event& e);
    void mitm(const scenario_event& e);
    void eca_recertify(const scenario_event& e);
    void root_rotation();
    void elector_replace();
    void reestablish(const scenario_event& e);
    void rebootstrap(const scenario_event& e);

    scenario cfg_;
    crypto::seeded_random rng_;
    sim::clock clock_;
    persistence::database db_;
    std::unique_ptr<sim::bus> bus_;
    sim::pki pki_;

    rootmgmt::trust_state electorate_;
    cert::trust_store trust_;
    rootmgmt::ballot ballot_feed_;
    std::uint32_t gccf_version_ = 0;
    std::uint32_t gpf_version_ = 0;

    std::unique_ptr<authorities::location_obscurer> lop_;
    std::unique_ptr<authorities::repository> repo_;
    std::unique_ptr<authorities::enrollment_ca> eca_;
    std::unique_ptr<authorities::pseudonym_ca> pca_;
    std::unique_ptr<authorities::registration_authority> ra_;
    std::unique_ptr<authorities::linkage_authority> la1_;
    std::unique_ptr<authorities::linkage_authority> la2_;
    std::unique_ptr<ma::misbehavior_authority> ma_;
    std::unique_ptr<authorities::device_config_manager> dcm_;
    std::vector<std::unique_ptr<ee::device>> devices_;

    std::shared_ptr<substitution_insider> insider_;
    std::set<std::size_t> retired_electors_;
    std::set<std::size_t> rebootstrapped_;
    std::vector<revocation> revocations_;
    bsm_tally bsms_;
    metrics live_;
};

} // namespace scms::sim
