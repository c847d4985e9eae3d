#include <scms/ma/ma.hpp>

namespace scms::ma {

using namespace authorities;

misbehavior_authority::misbehavior_authority(component_id id, credentials creds, environment env,
                                             crypto::seeded_random rng, ma_config cfg, credentials crlg,
                                             std::unique_ptr<detector> det) :
    authority(std::move(id), std::move(creds), env, std::move(rng)), cfg_(std::move(cfg)), crlg_(std::move(crlg)),
    detector_(std::move(det)), audit_(store_, id_)
{
    encryption_private();
    if (crlg_.cert.role != cert::authority_role::crl_generator) {
        throw std::invalid_argument("CRLG credentials must carry the crl_generator role");
    }
}

// --- requests to PCA / LA / RA ----------------------------------------------------

byte_buffer misbehavior_authority::ask(const component_id& dst, msg type, ma_op op, byte_view body)
{
    ma_request req{op, now().period, nonce_++, byte_buffer(body.begin(), body.end())};
    const auto signed_req = cert::sign_message(creds_.signing_private, creds_.cert, req.encode()).encode();
    audit_.append({now().period, dst, std::string(to_string(op)), crypto::sha256(signed_req), "sent"});
    return env_.bus.call(id_, dst, tag(type), signed_req);
}

void misbehavior_authority::note(const std::string& kind, const linkage_value& lv)
{
    store_.put(id_, kind, lv_key(lv), {});
}

std::vector<plv_pair_record> misbehavior_authority::plv_pairs(const std::vector<linkage_value>& lvs)
{
    for (const auto& lv : lvs) note("investigated", lv);
    return decode_plv_pairs(ask(cfg_.pca, msg::pca_plv_pairs, ma_op::plv_pairs, encode_lvs(lvs)));
}

bool misbehavior_authority::linked(const plv_pair_record& a, const plv_pair_record& b)
{
    if (a.la1 != b.la1) return false; // different LA pairs cannot share a chain
    const auto host = cfg_.la_hosts.find(a.la1);
    if (host == cfg_.la_hosts.end()) throw refused("no host known for LA " + std::to_string(a.la1.value));
    const auto reply = ask(host->second, msg::la_link_query, ma_op::link_query,
                           link_query{a.sealed1, b.sealed1}.encode());
    return reply.size() == 1 && reply[0] == 1;
}

// --- detection and investigation ------------------------------------------------------

std::vector<report_record> misbehavior_authority::reports() const
{
    std::lock_guard lock(mutex_);
    std::vector<report_record> out;
    for (const auto& r : store_.scan(id_, "report")) out.push_back(report_record::decode(r.value));
    return out;
}

std::vector<linkage_value> misbehavior_authority::detect()
{
    std::lock_guard lock(mutex_);
    return detector_->detect(reports(), now().period);
}

std::vector<std::vector<linkage_value>> misbehavior_authority::investigate(const std::vector<linkage_value>& lvs)
{
    std::lock_guard lock(mutex_);
    const auto pairs = plv_pairs(lvs);
    std::vector<std::vector<plv_pair_record>> groups;
    for (const auto& p : pairs) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return linked(g.front(), p); });
        if (it == groups.end()) {
            groups.push_back({p});
        } else {
            it->push_back(p);
        }
    }
    std::vector<std::vector<linkage_value>> out;
    for (const auto& g : groups) {
        out.emplace_back();
        for (const auto& p : g) out.back().push_back(p.lv);
    }
    return out;
}

bool misbehavior_authority::same_device(const linkage_value& a, const linkage_value& b)
{
    std::lock_guard lock(mutex_);
    const auto pairs = plv_pairs({a, b});
    if (pairs.size() != 2) throw refused("linkage value unknown to the PCA");
    return linked(pairs[0], pairs[1]);
}

// --- revocation ------------------------------------------------------------------------

cert::crl& misbehavior_authority::draft(std::uint16_t series)
{
    auto it = drafts_.find(series);
    if (it == drafts_.end()) {
        cert::crl list;
        list.series = series;
        list.craca_id = crlg_.cert.issuer;
        it = drafts_.emplace(series, std::move(list)).first;
    }
    return it->second;
}

void misbehavior_authority::save_draft(const cert::crl& list)
{
    writer key;
    key.u16(list.series);
    store_.put(id_, "crl", key.buffer(), list.encode());
}

revocation_outcome misbehavior_authority::revoke_pseudonym(const linkage_value& lv)
{
    std::lock_guard lock(mutex_);
    const auto period = now().period;
    note("investigated", lv);
    const auto found = lookup_result::decode(ask(
        cfg_.pca, msg::pca_lookup, ma_op::lookup, lookup_query{lookup_key::linkage_value, lv_key(lv)}.encode()));
    const auto bl = blacklist_result::decode(
        ask(found.ra, msg::ra_blacklist, ma_op::blacklist, blacklist_order{found.request_hash, blacklist_mode::pseudonym}.encode()));
    if (bl.chains.empty() || bl.chains.size() % 2 != 0) {
        throw refused("RA returned no usable chain pair");
    }

    revocation_outcome out{false, 0, period};
    auto& list = draft(cfg_.series.pseudonym);
    for (std::size_t k = 0; k + 1 < bl.chains.size(); k += 2) {
        const auto& c1 = bl.chains[k];
        const auto& c2 = bl.chains[k + 1];
        const auto s1 = seed_result::decode(ask(c1.la_host, msg::la_seed, ma_op::seed, seed_query{c1.lci, period}.encode()));
        const auto s2 = seed_result::decode(ask(c2.la_host, msg::la_seed, ma_op::seed, seed_query{c2.lci, period}.encode()));
        const linkage::revocation_entry entry{s1.la, s2.la, period, cfg_.batch_size, s1.seed.value, s2.seed.value};
        if (list.add(entry)) ++out.entries_added;
    }
    out.newly_revoked = out.entries_added > 0;
    note("revoked", lv);
    save_draft(list);
    return out;
}

revocation_outcome misbehavior_authority::revoke_other(const certificate& c)
{
    std::lock_guard lock(mutex_);
    if (c.linkage) throw std::invalid_argument("pseudonym certificates are revoked through linkage seeds");
    const auto period = now().period;
    const auto id = c.id();
    const auto found = lookup_result::decode(ask(cfg_.pca, msg::pca_lookup, ma_op::lookup,
                                                 lookup_query{lookup_key::certificate_id, byte_buffer(id.begin(), id.end())}.encode()));
    const auto bl = blacklist_result::decode(
        ask(found.ra, msg::ra_blacklist, ma_op::blacklist, blacklist_order{found.request_hash, blacklist_mode::other}.encode()));
    revocation_outcome out{true, 0, period};
    if (bl.open_requests.empty()) return out; // expired certificates only: blacklist suffices
    const auto ids = decode_ids(ask(cfg_.pca, msg::pca_cert_ids, ma_op::cert_ids, encode_hashes(bl.open_requests)));
    auto& list = draft(cfg_.series.for_type(c.type));
    for (const auto& id : ids) {
        if (list.add(id)) ++out.entries_added;
    }
    save_draft(list);
    return out;
}

revocation_outcome misbehavior_authority::revoke_certificate(const certificate& c, cert::crl_priority priority)
{
    std::lock_guard lock(mutex_);
    auto& list = draft(c.crl_series);
    revocation_outcome out{false, 0, now().period};
    if (list.add(c.id(), {priority, std::nullopt})) {
        out.newly_revoked = true;
        out.entries_added = 1;
    }
    save_draft(list);
    return out;
}

void misbehavior_authority::set_crl_generator(authorities::credentials crlg)
{
    std::lock_guard lock(mutex_);
    if (crlg.cert.role != cert::authority_role::crl_generator) {
        throw std::invalid_argument("CRL generator credentials required");
    }
    // Lists are scoped to their CRACA; under a new one the series start afresh.
    if (crlg.cert.issuer != crlg_.cert.issuer) drafts_.clear();
    crlg_ = std::move(crlg);
}

std::vector<cert::crl> misbehavior_authority::publish()
{
    std::lock_guard lock(mutex_);
    std::vector<cert::crl> out;
    for (const auto series : crlg_.cert.crl_permissions) {
        auto& list = draft(series);
        ++list.sequence;
        list.issue_period = now().period;
        cert::sign_crl(list, crlg_.cert, crlg_.signing_private);
        save_draft(list);
        out.push_back(list);
    }
    env_.bus.call(id_, cfg_.repo, tag(msg::repo_publish), publication{"crl", cert::encode_composite(out)}.encode());
    return out;
}

std::vector<cert::crl> misbehavior_authority::current_crls() const
{
    std::lock_guard lock(mutex_);
    std::vector<cert::crl> out;
    for (const auto& [series, list] : drafts_) {
        if (list.sequence > 0) out.push_back(list);
    }
    return out;
}

std::size_t misbehavior_authority::discarded_reports() const
{
    std::lock_guard lock(mutex_);
    return discarded_;
}

std::size_t misbehavior_authority::provisioning_anomalies() const
{
    std::size_t n = 0;
    for (const auto& r : reports()) n += r.body.kind == report_kind::provisioning_failure;
    return n;
}

namespace {

std::vector<linkage_value> lvs_of(const std::vector<persistence::record>& records)
{
    std::vector<linkage_value> out;
    for (const auto& r : records) {
        reader rd(r.key);
        out.push_back(read_lv(rd));
    }
    return out;
}

} // namespace

std::vector<linkage_value> misbehavior_authority::investigated() const
{
    std::lock_guard lock(mutex_);
    return lvs_of(store_.scan(id_, "investigated"));
}

std::vector<linkage_value> misbehavior_authority::revoked() const
{
    std::lock_guard lock(mutex_);
    return lvs_of(store_.scan(id_, "revoked"));
}

// --- report intake ------------------------------------------------------------------------

void misbehavior_authority::intake(byte_view payload)
{
    reader r(payload);
    const auto n = r.u32();
    for (std::uint32_t k = 0; k < n; ++k) {
        const auto sealed = r.var_bytes();
        try {
            const auto m = open_signed(encryption_private(), sealed);
            const auto body = report_body::decode(m.payload);
            if (!cert::verify_message(m) ||
                trust_.verify_chain(m.signer, body.period, &crls_) != cert::chain_status::ok) {
                ++discarded_;
                continue;
            }
            const report_record rec{body, m.signer.id(), now().period};
            const auto key = crypto::sha256(sealed);
            store_.put(id_, "report", key, rec.encode());
            if (body.reported.linkage && body.kind == report_kind::misbehavior) note("investigated", *body.reported.linkage);
        } catch (const error&) {
            ++discarded_;
        }
    }
    r.expect_end();
}

byte_buffer misbehavior_authority::dispatch(const sim::envelope& e)
{
    if (e.type == tag(msg::ma_reports)) {
        require_source(e, cfg_.ra);
        intake(e.payload);
        return {};
    }
    throw refused("unsupported message");
}

} // namespace scms::ma
