#include <scms/sim/audit.hpp>
#include <scms/sim/world.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace scms::sim {

using namespace authorities;
using cert::authority_role;
using cert::cert_type;
using cert::certificate;
using crypto::key_pair;

namespace {

constexpr std::uint32_t authority_lifetime = 20 * 53;
constexpr const char* obe_model = "obu-model-a";
constexpr const char* rse_model = "rsu-model-a";

credentials make_authority(authority_role role, const std::string& name, const credentials* issuer, bool with_enc,
                           crypto::random_source& rng)
{
    const auto sign = key_pair::generate(rng);
    certificate c;
    c.type = cert_type::authority;
    c.role = role;
    c.subject = name;
    c.verification_key = sign.public_key;
    std::optional<crypto::scalar> enc_private;
    if (with_enc) {
        const auto enc = key_pair::generate(rng);
        c.encryption_key = enc.public_key;
        enc_private = enc.private_key;
    }
    c.valid = {0, authority_lifetime};
    c.crl_series = cert::crl_series_table{}.for_type(cert_type::authority, role);
    if (role == authority_role::crl_generator) {
        c.crl_permissions = {cert::series::pseudonym, cert::series::components,
                             cert::series::identification_application, cert::series::enrollment};
    }
    if (issuer) {
        c.craca_id = issuer->cert.self_signed() ? issuer->cert.id() : issuer->cert.craca_id;
        c = cert::issue(std::move(c), issuer->cert, issuer->signing_private);
    } else {
        c = cert::self_sign(std::move(c), sign.private_key);
    }
    return {c, sign.private_key, enc_private};
}

std::string device_name(const char* prefix, std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%04zu", prefix, k);
    return buf;
}

} // namespace

/// An insider at the RA swaps the response encryption key so that it can read
/// the PCA's answer. Odd attempts leave the attacker's key in place; even ones
/// re-encrypt to the device's own key and restore it, which the PCA signature
/// no longer covers.
class substitution_insider final : public ra_insider
{
public:
    substitution_insider(std::size_t budget, crypto::seeded_random rng) :
        budget_(budget), rng_(std::move(rng)), attacker_(key_pair::generate(rng_))
    {
    }

    void before_pca(pca_request& req) override
    {
        active_ = false;
        if (budget_ == 0) return;
        --budget_;
        ++attempts_;
        original_ = req.response_key;
        req.response_key = attacker_.public_key;
        active_ = true;
    }

    void after_pca(const pca_request&, pca_response& resp) override
    {
        if (!active_) return;
        active_ = false;
        const auto plain = crypto::hybrid_decrypt(attacker_.private_key, resp.ciphertext);
        ++read_;
        if (attempts_ % 2 == 0) {
            resp.ciphertext = crypto::hybrid_encrypt(original_, plain, rng_);
            resp.recipient_key = original_;
        }
    }

    std::size_t attempts() const { return attempts_; }
    std::size_t read() const { return read_; }

private:
    std::size_t budget_;
    crypto::seeded_random rng_;
    key_pair attacker_;
    crypto::group_element original_;
    bool active_ = false;
    std::size_t attempts_ = 0;
    std::size_t read_ = 0;
};

// --- small types -----------------------------------------------------------------

std::vector<certificate> pki::chain() const
{
    return {root.cert, ica.cert, eca.cert, pca.cert, ra.cert, la1.cert, la2.cert,
            ma.cert,   crlg.cert, pg.cert, dcm.cert};
}

std::uint64_t bsm_tally::accepted() const
{
    const auto it = verdicts.find("accepted");
    return it == verdicts.end() ? 0 : it->second;
}

std::uint64_t bsm_tally::rejected() const
{
    std::uint64_t n = 0;
    for (const auto& [verdict, count] : verdicts) {
        if (verdict != "accepted") n += count;
    }
    return n;
}

double metrics::at(const std::string& key) const
{
    const auto it = values.find(key);
    if (it == values.end()) throw std::out_of_range("no metric " + key);
    return it->second;
}

std::string metrics::json() const
{
    nlohmann::ordered_json j;
    for (const auto& [k, v] : labels) j[k] = v;
    auto& vals = j["metrics"];
    vals = nlohmann::ordered_json::object();
    for (const auto& [k, v] : values) {
        if (std::floor(v) == v && std::fabs(v) < 9e15) {
            vals[k] = static_cast<std::int64_t>(v);
        } else {
            vals[k] = v;
        }
    }
    j["violations"] = violations;
    j["passed"] = violations.empty();
    return j.dump(2);
}

// --- construction -------------------------------------------------------------------

world::world(scenario s) : cfg_(std::move(s)), rng_(cfg_.seed)
{
    bus_ = std::make_unique<sim::bus>(clock_, &authorities::msg_name);
    bus_->set_unordered_digest(cfg_.stress && cfg_.threads > 1);
    build_pki();
    wire_components();
    publish_manager_files();

    for (std::size_t k = 0; k < cfg_.devices + cfg_.rses; ++k) {
        ee::device_settings settings;
        std::string id;
        if (k < cfg_.devices) {
            id = device_name("obe", k);
            settings.model = obe_model;
        } else {
            id = device_name("rse", k - cfg_.devices);
            settings.model = rse_model;
            settings.enrollment_type = cert_type::rse_enrollment;
            settings.subject = id;
        }
        settings.rotation_minutes = cfg_.rotation_minutes;
        bus_->register_device(id);
        devices_.push_back(std::make_unique<ee::device>(id, settings, rng_.fork("device/" + id)));
    }
}

world::~world() = default;

void world::build_pki()
{
    auto rng = rng_.fork("pki");
    const crypto::signature_algorithm algs[] = {crypto::signature_algorithm::ecdsa_p256_sha256,
                                                crypto::signature_algorithm::schnorr_p256_sha256,
                                                crypto::signature_algorithm::ecdsa_p256_sha256};
    for (std::size_t k = 0; k < 3; ++k) {
        pki::elector e;
        e.keys = key_pair::generate(rng);
        e.alg = algs[k];
        e.cert = rootmgmt::make_elector("elector-" + std::to_string(k), e.keys, e.alg, {0, authority_lifetime});
        pki_.electors.push_back(e);
    }
    std::vector<certificate> elector_certs;
    for (const auto& e : pki_.electors) elector_certs.push_back(e.cert);
    electorate_ = rootmgmt::trust_state::initial(elector_certs);

    pki_.root = make_authority(authority_role::root_ca, "root", nullptr, false, rng);
    pki_.ica = make_authority(authority_role::intermediate_ca, "ica", &pki_.root, false, rng);
    pki_.eca = make_authority(authority_role::enrollment_ca, "eca", &pki_.ica, false, rng);
    pki_.pca = make_authority(authority_role::pseudonym_ca, "pca", &pki_.ica, true, rng);
    pki_.ra = make_authority(authority_role::registration, "ra", &pki_.ica, true, rng);
    pki_.la1 = make_authority(authority_role::linkage, "la1", &pki_.ica, true, rng);
    pki_.la2 = make_authority(authority_role::linkage, "la2", &pki_.ica, true, rng);
    pki_.dcm = make_authority(authority_role::device_config, "dcm", &pki_.ica, false, rng);
    pki_.ma = make_authority(authority_role::misbehavior, "ma", &pki_.root, true, rng);
    pki_.crlg = make_authority(authority_role::crl_generator, "crlg", &pki_.root, false, rng);
    pki_.pg = make_authority(authority_role::policy_generator, "pg", &pki_.root, false, rng);

    add_ballot(rootmgmt::action_kind::endorse_root, pki_.root.cert, {0, 1});
    for (const auto& c : pki_.chain()) trust_.add(c);
    electorate_.install_into(trust_);
}

void world::wire_components()
{
    const environment env{*bus_, clock_, db_};
    const auto root_id = pki_.root.cert.id();

    lop_ = std::make_unique<location_obscurer>("lop", *bus_, std::set<component_id>{"ra", "repo"});
    bus_->attach(*lop_, endpoint_kind::proxy);
    repo_ = std::make_unique<repository>("repo");
    repo_->authorise("crl", "ma");
    bus_->attach(*repo_, endpoint_kind::authority);

    eca_ = std::make_unique<enrollment_ca>("eca", pki_.eca, env, rng_.fork("eca"), eca_config{"dcm", "ra", root_id});
    pca_ = std::make_unique<pseudonym_ca>("pca", pki_.pca, env, rng_.fork("pca"),
                                          pca_config{{"ra"}, "ma", root_id, cfg_.ma_daily_cap});
    ra_config rc;
    rc.batch_size = cfg_.batch_size;
    rc.lookahead_periods = cfg_.lookahead;
    rc.daily_ma_cap = cfg_.ma_daily_cap;
    ra_ = std::make_unique<registration_authority>("ra", pki_.ra, env, rng_.fork("ra"), rc);
    const auto pca_key = pki_.pca.cert.encryption_key.value();
    la1_ = std::make_unique<linkage_authority>("la1", pki_.la1, env, rng_.fork("la1"),
                                               la_config{{1}, "ra", "ma", pca_key, cfg_.ma_daily_cap});
    la2_ = std::make_unique<linkage_authority>("la2", pki_.la2, env, rng_.fork("la2"),
                                               la_config{{2}, "ra", "ma", pca_key, cfg_.ma_daily_cap});
    ma::ma_config mc;
    mc.la_hosts = {{linkage::la_id{1}, "la1"}, {linkage::la_id{2}, "la2"}};
    mc.batch_size = cfg_.batch_size;
    ma_ = std::make_unique<ma::misbehavior_authority>("ma", pki_.ma, env, rng_.fork("ma"), mc, pki_.crlg,
                                                      std::make_unique<ma::threshold_detector>(cfg_.threshold,
                                                                                               cfg_.window));
    dcm_ = std::make_unique<device_config_manager>("dcm", pki_.dcm, *bus_,
                                                   dcm_config{"eca", {obe_model, rse_model}});

    for (endpoint* e : std::initializer_list<endpoint*>{eca_.get(), pca_.get(), ra_.get(), la1_.get(), la2_.get(),
                                                        ma_.get()}) {
        bus_->attach(*e, endpoint_kind::authority);
    }
    refresh_authority_trust();
}

void world::refresh_authority_trust()
{
    for (authority* a : std::initializer_list<authority*>{eca_.get(), pca_.get(), ra_.get(), la1_.get(), la2_.get(),
                                                          ma_.get()}) {
        a->set_trust(trust_);
    }
}

void world::add_ballot(rootmgmt::action_kind kind, const certificate& object, const std::vector<std::size_t>& voters)
{
    rootmgmt::action a{kind, object, {}};
    for (const auto v : voters) {
        const auto& e = pki_.electors.at(v);
        a.votes.push_back(rootmgmt::cast_vote(kind, object, e.cert, e.keys.private_key));
    }
    const auto verdict = electorate_.process(rootmgmt::ballot{{a}});
    if (verdict.accepted.size() != 1) {
        throw error("manager ballot rejected: " +
                    (verdict.rejected.empty() ? std::string("?") : verdict.rejected.front().second));
    }
    ballot_feed_.actions.push_back(std::move(a));
}

std::vector<std::size_t> world::active_electors() const
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < pki_.electors.size(); ++k) {
        if (!retired_electors_.count(k)) out.push_back(k);
    }
    return out;
}

void world::publish_manager_files()
{
    rootmgmt::global_policy gp;
    gp.batch_size = cfg_.batch_size;
    gp.rotation_minutes = cfg_.rotation_minutes;
    gp.lookahead_periods = cfg_.lookahead;
    const auto gpf = rootmgmt::pg_publish(rootmgmt::policy_kind::global_policy, ++gpf_version_, gp.encode(),
                                          pki_.pg.cert, pki_.pg.signing_private);
    const auto gccf = rootmgmt::pg_publish(rootmgmt::policy_kind::global_chain, ++gccf_version_,
                                           rootmgmt::encode_chain_file(pki_.chain()), pki_.pg.cert,
                                           pki_.pg.signing_private);
    repo_->put("gpf", gpf.encode());
    repo_->put("gccf", gccf.encode());
    repo_->put("ballots", ballot_feed_.encode());

    bootstrap_bundle common;
    for (std::size_t k = 0; k < 3; ++k) common.electors.push_back(pki_.electors[k].cert);
    common.authorities = pki_.chain();
    common.ballots = {ballot_feed_.encode()};
    common.gpf = gpf;
    common.gccf = gccf;
    common.ra = "ra";
    common.ma = "ma";
    common.repo = "repo";
    common.lop = "lop";
    dcm_->set_template(std::move(common));
}

credentials world::recertify(const credentials& subject, const credentials& issuer)
{
    auto c = subject.cert;
    const auto start = clock_.now().period;
    c.valid = {start, start + authority_lifetime};
    c.craca_id = issuer.cert.self_signed() ? issuer.cert.id() : issuer.cert.craca_id;
    return {cert::issue(std::move(c), issuer.cert, issuer.signing_private), subject.signing_private,
            subject.encryption_private};
}

bool world::revoked(std::size_t k) const
{
    if (rebootstrapped_.count(k)) return false;
    return std::any_of(revocations_.begin(), revocations_.end(), [&](const revocation& r) { return r.device == k; });
}

void world::for_each_device(const std::function<void(std::size_t)>& fn)
{
    const auto n = devices_.size();
    if (!cfg_.stress || cfg_.threads < 2) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t t = 0; t < cfg_.threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t k = t; k < n; k += cfg_.threads) fn(k);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::size_t world::validator_for(std::size_t k) const
{
    return (k + 1) % devices_.size();
}

// --- scenario steps -------------------------------------------------------------------

void world::bootstrap_all()
{
    const auto p = clock_.now().period;
    for (auto& d : devices_) d->bootstrap(*dcm_, p);
}

void world::provision_all()
{
    const auto p = clock_.now().period;
    const auto last = cfg_.provisioned_span() - 1;
    std::atomic<std::size_t> denied{0};
    for_each_device([&](std::size_t k) {
        const auto kind = is_rse(k) ? cert_type::rse_application : cert_type::obe_pseudonym;
        try {
            devices_[k]->request_certificates(*bus_, p, std::max(p, last), kind);
        } catch (const refused&) {
            ++denied;
        }
    });
    live_.add("provisioning_denied", static_cast<double>(denied));
}

void world::open_period(std::uint32_t p)
{
    if (p > 0) clock_.start_period(p);
    ra_->tick();
    clock_.advance_days(1);
    ra_->tick();
    publish_crls();
}

void world::publish_crls()
{
    const auto p = clock_.now().period;
    for (const auto& list : ma_->publish()) {
        if (!trust_.verify_crl(list, p)) throw error("freshly published CRL does not verify");
        for (authority* a : std::initializer_list<authority*>{eca_.get(), pca_.get(), ra_.get(), la1_.get(),
                                                              la2_.get(), ma_.get()}) {
            a->install_crl(list);
        }
    }
    sync_all();
}

void world::sync_all()
{
    const auto p = clock_.now().period;
    for_each_device([&](std::size_t k) { devices_[k]->sync(*bus_, p); });
}

void world::download_all(std::uint32_t p)
{
    const auto last = std::min(p + cfg_.lookahead - 1, cfg_.provisioned_span() - 1);
    std::atomic<std::size_t> refusals{0}, installed{0}, rejected{0};
    for_each_device([&](std::size_t k) {
        auto& d = *devices_[k];
        for (auto q = p; q <= last; ++q) {
            if (d.certificates().count(q)) continue;
            try {
                const auto rep = d.download(*bus_, q);
                installed += rep.installed;
                rejected += rep.rejected();
            } catch (const refused&) {
                ++refusals;
            }
        }
    });
    live_.add("downloads_refused", static_cast<double>(refusals));
    live_.add("certs_installed", static_cast<double>(installed));
    live_.add("certs_rejected_at_install", static_cast<double>(rejected));
}

void world::operate(std::uint32_t p)
{
    std::mutex tally_mutex;
    for_each_device([&](std::size_t k) {
        for (std::size_t b = 0; b < cfg_.bsms_per_device; ++b) {
            const std::uint32_t span = minutes_per_period - minutes_per_day;
            const sim_time t{p, minutes_per_day + static_cast<std::uint32_t>((k * 131 + b * 977) % span)};
            ee::bsm_payload payload;
            payload.latitude = static_cast<std::int32_t>(k);
            payload.longitude = static_cast<std::int32_t>(b);
            payload.speed = 25;
            const auto msg = devices_[k]->sign_bsm(t, payload);
            if (!msg) {
                std::lock_guard lock(tally_mutex);
                ++bsms_.not_sent;
                continue;
            }
            const auto v = validator_for(k);
            const auto verdict = v == k ? ee::bsm_verdict::accepted : devices_[v]->validate_bsm(*msg, t);
            std::lock_guard lock(tally_mutex);
            ++bsms_.sent;
            ++bsms_.verdicts[std::string(ee::to_string(verdict))];
        }
    });
}

void world::run_event(const scenario_event& e)
{
    if (e.type == "misbehave") return misbehave(e);
    if (e.type == "revoke_other") return revoke_other(e);
    if (e.type == "mitm") return mitm(e);
    if (e.type == "eca_recertify") return eca_recertify(e);
    if (e.type == "root_rotation") return root_rotation();
    if (e.type == "elector_replace") return elector_replace();
    if (e.type == "reestablish") return reestablish(e);
    if (e.type == "rebootstrap") return rebootstrap(e);
    throw scenario_error("unknown event type '" + e.type + "'");
}

// --- events -------------------------------------------------------------------------

void world::judge(revocation& r)
{
    // Any device that is not the offender holds the fleet's view of the CRLs.
    const auto& judge_dev = *devices_.at((r.device + 1) % devices_.size());
    r.held = r.flagged = r.due = r.flagged_before = 0;
    for (const auto& [period, held] : devices_.at(r.device)->certificates()) {
        for (const auto& h : held) {
            const bool flagged = judge_dev.crls().check(h.cert) == cert::crl_status::revoked;
            const bool due = h.cert.valid.end >= r.period;
            ++r.held;
            r.due += due;
            r.flagged += flagged && due;
            r.flagged_before += flagged && !due;
        }
    }
}

void world::misbehave(const scenario_event& e)
{
    if (e.device >= devices_.size()) throw scenario_error("misbehave: no such device");
    auto& offender = *devices_[e.device];
    const auto now = clock_.now();
    const sim_time t{now.period, now.minute + 1};
    ee::bsm_payload bogus;
    bogus.latitude = 3; // "three meters to the left"
    bogus.speed = 999;
    const auto evidence = offender.sign_bsm(t, bogus);
    if (!evidence) {
        live_.violations.push_back("misbehave: offender holds no certificate for period " + std::to_string(t.period));
        return;
    }

    std::size_t reported = 0;
    for (std::size_t step = 1; step < devices_.size() && reported < e.reporters; ++step) {
        const auto k = (e.device + step) % devices_.size();
        if (revoked(k)) continue;
        auto& reporter = *devices_[k];
        if (reporter.validate_bsm(*evidence, t) != ee::bsm_verdict::accepted) continue;
        try {
            reporter.report_misbehavior(*bus_, *evidence, t);
            ++reported;
        } catch (const error&) {
            // no pseudonym certificate to report with
        }
    }
    live_.add("reports_sent", static_cast<double>(reported));
    ra_->flush_reports();

    const auto flagged = ma_->detect();
    live_.add("lvs_flagged", static_cast<double>(flagged.size()));
    if (flagged.empty()) return;
    const auto groups = ma_->investigate(flagged);
    live_.add("investigation_groups", static_cast<double>(groups.size()));
    std::vector<std::size_t> newly;
    for (const auto& group : groups) {
        const auto outcome = ma_->revoke_pseudonym(group.front());
        if (!outcome.newly_revoked) continue;
        // Which device was that? Only the harness can tell; the MA never learns it.
        for (std::size_t k = 0; k < devices_.size(); ++k) {
            const auto certs = devices_[k]->certificates_for(group.front().index.i);
            const bool match = std::any_of(certs.begin(), certs.end(), [&](const certificate& c) {
                return c.linkage && *c.linkage == group.front();
            });
            if (match) {
                revocation r;
                r.device = k;
                r.period = outcome.period;
                r.misbehaved = t.period;
                r.handle = devices_[k]->handle().value_or(cert::cert_id{});
                revocations_.push_back(r);
                newly.push_back(revocations_.size() - 1);
                rebootstrapped_.erase(k);
                break;
            }
        }
    }
    publish_crls();

    for (const auto idx : newly) {
        auto& r = revocations_[idx];
        judge(r);
        auto& dev = *devices_[r.device];

        // After propagation the fleet rejects the offender's next message.
        const sim_time later{t.period, t.minute + cfg_.rotation_minutes};
        if (const auto next = dev.sign_bsm(later, bogus)) {
            std::size_t accepted = 0, rejected = 0;
            for (std::size_t k = 0; k < devices_.size(); ++k) {
                if (k == r.device) continue;
                (devices_[k]->validate_bsm(*next, later) == ee::bsm_verdict::accepted ? accepted : rejected)++;
            }
            live_.add("post_revocation_bsm_accepted", static_cast<double>(accepted));
            live_.add("post_revocation_bsm_rejected", static_cast<double>(rejected));
        }
        // Blacklisted at the RA: new requests are denied, roll-over too.
        try {
            dev.request_certificates(*bus_, t.period, t.period + 1);
        } catch (const refused&) {
            live_.add("blacklist_denials", 1);
        }
        try {
            dev.reestablish(*bus_, t.period);
        } catch (const refused&) {
            live_.add("reestablish_refused", 1);
        }
        live_.values["revocation_latency_periods"] =
            std::max(live_.values["revocation_latency_periods"], static_cast<double>(r.period - r.misbehaved));
    }
}

void world::revoke_other(const scenario_event& e)
{
    const auto k = cfg_.devices + e.device;
    if (k >= devices_.size()) throw scenario_error("revoke_other: no such RSE");
    auto& dev = *devices_[k];
    const auto p = clock_.now().period;
    const auto held = dev.certificates_for(p);
    if (held.empty()) {
        live_.violations.push_back("revoke_other: RSE holds no certificate for period " + std::to_string(p));
        return;
    }
    const auto outcome = ma_->revoke_other(held.front());
    live_.add("certids_revoked", static_cast<double>(outcome.entries_added));
    revocation r;
    r.device = k;
    r.period = p;
    r.misbehaved = p;
    r.handle = dev.handle().value_or(cert::cert_id{});
    revocations_.push_back(r);
    publish_crls();
    judge(revocations_.back());
}

void world::mitm(const scenario_event& e)
{
    insider_ = std::make_shared<substitution_insider>(e.count, rng_.fork("insider"));
    ra_->set_insider(insider_);
}

void world::eca_recertify(const scenario_event& e)
{
    const auto p = clock_.now().period;
    const auto old = pki_.eca.cert;
    auto fresh = pki_.eca;
    if (e.revoke_old) {
        // Compromise: the old key is gone for good, the new certificate gets a new one.
        auto rng = rng_.fork("eca-rekey/" + std::to_string(p));
        fresh.signing_private = key_pair::generate(rng).private_key;
        fresh.cert.verification_key = crypto::group_element::mul_base(fresh.signing_private);
    }
    pki_.eca = recertify(fresh, pki_.ica);
    eca_->recertify(pki_.eca, pki_.root.cert.id());
    trust_.add(pki_.eca.cert);
    refresh_authority_trust();
    if (e.revoke_old) {
        ma_->revoke_certificate(old, cert::crl_priority::key_compromise);
    } else {
        ra_->accept_recertified_eca(old.id());
    }
    publish_manager_files();
    publish_crls();

    std::size_t ok = 0, refused_count = 0, rebooted = 0;
    for (std::size_t k = 0; k < devices_.size(); ++k) {
        if (revoked(k)) continue;
        auto& dev = *devices_[k];
        try {
            dev.reestablish(*bus_, p);
            ++ok;
            continue;
        } catch (const refused&) {
            ++refused_count;
        }
        // Only a trip back to the secure environment helps now.
        dev.bootstrap(*dcm_, p);
        dev.request_certificates(*bus_, p, std::max(p, cfg_.provisioned_span() - 1),
                                 is_rse(k) ? cert_type::rse_application : cert_type::obe_pseudonym);
        ++rebooted;
    }
    live_.add("reestablished", static_cast<double>(ok));
    live_.add("reestablish_refused", static_cast<double>(refused_count));
    live_.add("rebootstrapped", static_cast<double>(rebooted));
    if (rebooted) {
        ra_->tick();
        ra_->flush();
        download_all(p);
    }
}

void world::root_rotation()
{
    const auto p = clock_.now().period;
    auto rng = rng_.fork("root-rotation/" + std::to_string(p));
    const auto voters = active_electors();
    const std::vector<std::size_t> quorum(voters.begin(), voters.begin() + 2);
    const auto old_root = pki_.root.cert;
    const auto old_eca = pki_.eca.cert.id();

    // Electors first: the old root loses trust, the new one gains it.
    auto new_root = make_authority(authority_role::root_ca, "root-2", nullptr, false, rng);
    add_ballot(rootmgmt::action_kind::revoke_root, old_root, quorum);
    add_ballot(rootmgmt::action_kind::endorse_root, new_root.cert, quorum);
    pki_.root = new_root;

    // Everything below the root is re-certified with its existing keys.
    pki_.ica = recertify(pki_.ica, pki_.root);
    for (auto* c : {&pki_.eca, &pki_.pca, &pki_.ra, &pki_.la1, &pki_.la2, &pki_.dcm}) *c = recertify(*c, pki_.ica);
    for (auto* c : {&pki_.ma, &pki_.crlg, &pki_.pg}) *c = recertify(*c, pki_.root);
    trust_ = cert::trust_store{};
    for (const auto& c : pki_.chain()) trust_.add(c);
    electorate_.install_into(trust_);

    const auto root_id = pki_.root.cert.id();
    eca_->recertify(pki_.eca, root_id);
    pca_->set_credentials(pki_.pca);
    pca_->set_craca(root_id);
    ra_->set_credentials(pki_.ra);
    la1_->set_credentials(pki_.la1);
    la2_->set_credentials(pki_.la2);
    ma_->set_credentials(pki_.ma);
    ma_->set_crl_generator(pki_.crlg);
    dcm_->set_credentials(pki_.dcm);
    refresh_authority_trust();
    ra_->accept_recertified_eca(old_eca);
    ra_->regenerate_from(p);
    publish_manager_files();
    sync_all();

    std::size_t broken = 0, ok = 0, failed = 0, dropped = 0;
    for (std::size_t k = 0; k < devices_.size(); ++k) {
        auto& dev = *devices_[k];
        if (dev.trust().verify_chain(dev.enrollment(), p) != cert::chain_status::ok) ++broken;
        if (revoked(k)) continue;
        try {
            dev.reestablish(*bus_, p);
            ++ok;
        } catch (const error&) {
            ++failed;
        }
        dropped += dev.discard_unverifiable(p);
    }
    live_.add("root_rotation_broken_chains", static_cast<double>(broken));
    live_.add("reestablished", static_cast<double>(ok));
    live_.add("reestablish_failed", static_cast<double>(failed));
    live_.add("certs_discarded", static_cast<double>(dropped));

    ra_->tick();
    ra_->flush();
    publish_crls();
    download_all(p);
}

void world::elector_replace()
{
    auto voters = active_electors();
    if (voters.size() < 3) throw scenario_error("elector_replace needs three active electors");
    const auto leaving = voters.back();
    const std::vector<std::size_t> quorum{voters[0], voters[1]};

    auto rng = rng_.fork("elector/" + std::to_string(pki_.electors.size()));
    pki::elector e;
    e.keys = key_pair::generate(rng);
    e.alg = crypto::signature_algorithm::schnorr_p256_sha256;
    e.cert = rootmgmt::make_elector("elector-" + std::to_string(pki_.electors.size()), e.keys, e.alg,
                                    {0, authority_lifetime});
    pki_.electors.push_back(e);
    const auto joining = pki_.electors.size() - 1;

    add_ballot(rootmgmt::action_kind::revoke_elector, pki_.electors[leaving].cert, quorum);
    retired_electors_.insert(leaving);
    add_ballot(rootmgmt::action_kind::endorse_elector, e.cert, quorum);
    // The new set, replacement included, vouches for the root again.
    add_ballot(rootmgmt::action_kind::endorse_root, pki_.root.cert, {voters[1], joining});
    publish_manager_files();
    sync_all();

    std::size_t healthy = 0;
    for (auto& d : devices_) {
        const auto& el = d->electorate();
        if (el.active_electors() == 3 && el.elector_active(e.cert.id()) && el.root_trusted(pki_.root.cert.id())) {
            ++healthy;
        }
    }
    live_.add("electorate_updated_devices", static_cast<double>(healthy));
}

void world::reestablish(const scenario_event& e)
{
    if (e.device >= devices_.size()) throw scenario_error("reestablish: no such device");
    try {
        devices_[e.device]->reestablish(*bus_, clock_.now().period);
        live_.add("reestablished", 1);
    } catch (const refused&) {
        live_.add("reestablish_refused", 1);
    }
}

void world::rebootstrap(const scenario_event& e)
{
    if (e.device >= devices_.size()) throw scenario_error("rebootstrap: no such device");
    auto& dev = *devices_[e.device];
    const auto p = clock_.now().period;
    const auto old_handle = dev.handle();
    try {
        dev.reestablish(*bus_, p);
    } catch (const refused&) {
        live_.add("reestablish_refused", 1);
    }
    dev.bootstrap(*dcm_, p);
    dev.request_certificates(*bus_, p, std::max(p, cfg_.provisioned_span() - 1),
                             is_rse(e.device) ? cert_type::rse_application : cert_type::obe_pseudonym);
    rebootstrapped_.insert(e.device);
    live_.add("rebootstrapped", 1);
    if (old_handle && ra_->blacklisted(*old_handle)) live_.add("old_handle_still_blacklisted", 1);
    ra_->tick();
    ra_->flush();
    download_all(p);
}

// --- whole run ----------------------------------------------------------------------

metrics world::run()
{
    const auto started = std::chrono::steady_clock::now();
    bootstrap_all();
    provision_all();
    for (std::uint32_t p = 0; p < cfg_.weeks; ++p) {
        for (const auto& e : cfg_.events) {
            if (e.period == p && e.type == "mitm") run_event(e);
        }
        open_period(p);
        for (const auto& e : cfg_.events) {
            if (e.period == p && e.type != "mitm" && e.type != "misbehave" && e.type != "revoke_other") run_event(e);
        }
        download_all(p);
        operate(p);
        for (const auto& e : cfg_.events) {
            if (e.period == p && (e.type == "misbehave" || e.type == "revoke_other")) run_event(e);
        }
    }
    metrics m;
    evaluate(m);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    m.set("elapsed_seconds", elapsed.count());
    return m;
}

void world::evaluate(metrics& m)
{
    for (const auto& [k, v] : live_.values) m.values[k] = v;
    m.violations.insert(m.violations.end(), live_.violations.begin(), live_.violations.end());
    m.labels["scenario"] = cfg_.name;
    m.labels["mode"] = cfg_.stress ? "stress" : "deterministic";

    m.set("devices", static_cast<double>(cfg_.devices));
    m.set("rses", static_cast<double>(cfg_.rses));
    m.set("periods", cfg_.weeks);
    m.set("certs_issued", static_cast<double>(pca_->issued()));
    m.set("pca_rejected", static_cast<double>(pca_->rejected()));
    m.set("enrollment_certs_issued", static_cast<double>(eca_->issued()));
    m.set("la_chains", static_cast<double>(la1_->chains() + la2_->chains()));
    m.set("messages_delivered", static_cast<double>(bus_->delivered()));
    m.set("lop_forwarded", static_cast<double>(lop_->forwarded()));

    const auto crl_file = repo_->get("crl");
    m.set("crl_bytes", crl_file ? static_cast<double>(crl_file->size()) : 0.0);
    std::size_t entries = 0;
    const auto current = ma_->current_crls();
    for (const auto& l : current) entries += l.entry_count();
    m.set("crl_entries", static_cast<double>(entries));

    m.set("bsm_sent", static_cast<double>(bsms_.sent));
    m.set("bsm_not_sent", static_cast<double>(bsms_.not_sent));
    m.set("bsm_accepted", static_cast<double>(bsms_.accepted()));
    m.set("bsm_rejected", static_cast<double>(bsms_.rejected()));
    for (const auto& [verdict, count] : bsms_.verdicts) {
        if (verdict != "accepted") m.set("bsm_rejected_" + verdict, static_cast<double>(count));
    }

    std::size_t quarantined = 0, mitm_detected = 0, held = 0;
    for (const auto& d : devices_) {
        quarantined += d->quarantined();
        mitm_detected += d->mitm_detected();
        for (const auto& [p, list] : d->certificates()) held += list.size();
    }
    m.set("certs_held", static_cast<double>(held));
    m.set("quarantined", static_cast<double>(quarantined));
    m.set("mitm_detected", static_cast<double>(mitm_detected));
    m.set("mitm_attempts", insider_ ? static_cast<double>(insider_->attempts()) : 0.0);
    m.set("provisioning_anomalies", static_cast<double>(ma_->provisioning_anomalies()));
    m.set("reports_received", static_cast<double>(ma_->reports().size()));
    m.set("reports_discarded", static_cast<double>(ma_->discarded_reports()));
    if (insider_ && insider_->attempts() != mitm_detected) {
        m.violations.push_back("MITM: " + std::to_string(insider_->attempts()) + " substitutions, " +
                               std::to_string(mitm_detected) + " detected");
    }

    // CRL propagation: every device still in service holds the latest list per series.
    std::size_t in_service = 0, current_devices = 0;
    for (std::size_t k = 0; k < devices_.size(); ++k) {
        if (revoked(k)) continue;
        ++in_service;
        const bool all = std::all_of(current.begin(), current.end(), [&](const cert::crl& l) {
            const auto* held_list = devices_[k]->crls().latest(l.craca_id, l.series);
            return held_list && held_list->sequence == l.sequence;
        });
        current_devices += all;
    }
    const double propagation = in_service ? static_cast<double>(current_devices) / in_service : 1.0;
    m.set("crl_propagation", propagation);
    if (propagation < 1.0) m.violations.push_back("CRL propagation incomplete");

    // Revocation is forward-complete and backward-empty.
    std::size_t flagged = 0, due = 0, before = 0, revoked_held = 0;
    std::set<std::size_t> revoked_devices;
    for (auto& r : revocations_) {
        if (!rebootstrapped_.count(r.device)) judge(r);
        flagged += r.flagged;
        due += r.due;
        before += r.flagged_before;
        revoked_held += r.held;
        revoked_devices.insert(r.device);
    }
    m.set("revoked_devices", static_cast<double>(revoked_devices.size()));
    m.set("revoked_flagged_certs", static_cast<double>(flagged));
    m.set("revoked_due_certs", static_cast<double>(due));
    m.set("revoked_flagged_past_certs", static_cast<double>(before));
    m.set("revoked_past_certs", static_cast<double>(revoked_held - due));
    if (flagged != due) m.violations.push_back("revocation not forward-complete");
    if (before != 0) m.violations.push_back("revocation reaches back before the revocation period");

    // Nobody else is caught by the lists.
    std::size_t false_positive = 0;
    if (!devices_.empty()) {
        const auto& judge_dev = *devices_.front();
        for (std::size_t k = 0; k < devices_.size(); ++k) {
            if (revoked_devices.count(k)) continue;
            for (const auto& [p, list] : devices_[k]->certificates()) {
                for (const auto& h : list) {
                    false_positive += judge_dev.crls().check(h.cert) == cert::crl_status::revoked;
                }
            }
        }
    }
    m.set("false_positive_flags", static_cast<double>(false_positive));
    if (false_positive) m.violations.push_back("certificates of devices in good standing are on a CRL");

    // Shuffle: one device's requests for its first period arrive interleaved.
    const auto order = ra_->emitted_order();
    std::map<cert::cert_id, std::vector<std::size_t>> positions;
    for (std::size_t pos = 0; pos < order.size(); ++pos) positions[order[pos]].push_back(pos);
    std::size_t interleaved = 0;
    for (const auto& [handle, pos] : positions) {
        const auto n = std::min<std::size_t>(pos.size(), cfg_.batch_size);
        interleaved += n > 1 && pos[n - 1] - pos[0] != n - 1;
    }
    m.set("shuffle_interleaved_fraction",
          positions.empty() ? 0.0 : static_cast<double>(interleaved) / static_cast<double>(positions.size()));

    const auto sep = audit_separation(*this);
    m.set("separation_violations", static_cast<double>(sep.violations()));
    m.set("ma_revocation_seeds", static_cast<double>(sep.ma_revocation_seeds));
    for (const auto& f : sep.findings) m.violations.push_back("separation: " + f);

    const auto rec = reconcile_audit(*this);
    m.set("ma_requests_sent", static_cast<double>(rec.sent));
    m.set("ma_requests_served", static_cast<double>(rec.served));
    m.set("ma_requests_refused", static_cast<double>(rec.refused));
    m.set("audit_orphans", static_cast<double>(rec.orphans()));
    if (rec.orphans()) m.violations.push_back("audit reconciliation found orphans");

    m.labels["trace_digest"] = to_hex(bus_->trace_digest());

    for (const auto& [key, want] : cfg_.expect) {
        const auto it = m.values.find(key);
        if (it == m.values.end()) {
            m.violations.push_back("expect " + key + ": metric missing");
        } else if (std::fabs(it->second - want) > 1e-9) {
            m.violations.push_back("expect " + key + ": got " + std::to_string(it->second) + ", want " +
                                   std::to_string(want));
        }
    }
}

} // namespace scms::sim
