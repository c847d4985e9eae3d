#include <scms/crypto/serialize.hpp>
#include <scms/device/device.hpp>
#include <scms/ma/report.hpp>

namespace scms::ee {

using namespace authorities;
using butterfly::key_kind;

namespace {
constexpr std::string_view snapshot_magic = "SCMSDEV1";
}

byte_buffer bsm_payload::encode() const
{
    writer w;
    w.u32(period);
    w.u32(minute);
    w.u32(static_cast<std::uint32_t>(latitude));
    w.u32(static_cast<std::uint32_t>(longitude));
    w.u16(speed);
    return std::move(w).buffer();
}

bsm_payload bsm_payload::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        bsm_payload p;
        p.period = r.u32();
        p.minute = r.u32();
        p.latitude = static_cast<std::int32_t>(r.u32());
        p.longitude = static_cast<std::int32_t>(r.u32());
        p.speed = r.u16();
        return p;
    });
}

std::string_view to_string(bsm_verdict v)
{
    switch (v) {
    case bsm_verdict::accepted: return "accepted";
    case bsm_verdict::malformed: return "malformed";
    case bsm_verdict::wrong_certificate_type: return "wrong_certificate_type";
    case bsm_verdict::stale: return "stale";
    case bsm_verdict::outside_validity: return "outside_validity";
    case bsm_verdict::unknown_issuer: return "unknown_issuer";
    case bsm_verdict::invalid_issuer: return "invalid_issuer";
    case bsm_verdict::bad_chain_signature: return "bad_chain_signature";
    case bsm_verdict::untrusted_root: return "untrusted_root";
    case bsm_verdict::chain_revoked: return "chain_revoked";
    case bsm_verdict::profile_violation: return "profile_violation";
    case bsm_verdict::revoked: return "revoked";
    case bsm_verdict::bad_signature: return "bad_signature";
    }
    return "unknown";
}

device::device(component_id id, device_settings settings, crypto::seeded_random rng) :
    id_(std::move(id)), settings_(std::move(settings)), rng_(std::move(rng)),
    rotation_(std::make_unique<fixed_interval_rotation>(settings_.rotation_minutes)), crls_(settings_.crl_capacity)
{
}

void device::require_bootstrapped() const
{
    if (!bundle_) throw error(id_ + ": device not bootstrapped");
}

const certificate& device::enrollment() const
{
    require_bootstrapped();
    return bundle_->enrollment;
}

const certificate& device::authority_cert(cert::authority_role role) const
{
    const auto it = directory_.find(role);
    if (it == directory_.end()) {
        throw error(id_ + ": no " + std::string(cert::to_string(role)) + " certificate known");
    }
    return it->second;
}

void device::absorb_authorities(const std::vector<certificate>& certs)
{
    for (const auto& c : certs) {
        trust_.add(c);
        if (c.role != cert::authority_role::none) directory_[c.role] = c;
    }
}

void device::refresh_trust()
{
    electorate_.install_into(trust_);
}

// --- bootstrap ---------------------------------------------------------------

void device::bootstrap(device_config_manager& dcm, std::uint32_t period)
{
    const auto keys = crypto::key_pair::generate(rng_);
    enroll_request req;
    req.type = settings_.enrollment_type;
    req.model = settings_.model;
    req.subject = settings_.subject;
    req.verification_key = keys.public_key;
    req.valid = {period, period + settings_.enrollment_periods - 1};
    req.psid = settings_.psid;
    auto bundle = dcm.bootstrap(req);
    if (bundle.enrollment.verification_key != keys.public_key) {
        throw error(id_ + ": enrollment certificate does not carry our key");
    }

    // A fresh bootstrap (also after revocation) starts from a clean slate.
    grants_.clear();
    certs_.clear();
    handle_.reset();
    directory_.clear();
    trust_ = cert::trust_store{};
    electorate_ = rootmgmt::trust_state::initial(bundle.electors);
    for (const auto& e : bundle.electors) trust_.add(e);
    absorb_authorities(bundle.authorities);
    for (const auto& raw : bundle.ballots) electorate_.process(rootmgmt::ballot::decode(raw));
    refresh_trust();
    if (trust_.verify_chain(bundle.enrollment, period) != cert::chain_status::ok) {
        throw error(id_ + ": enrollment certificate does not verify against the bootstrap trust anchors");
    }
    policies_ = {};
    policies_.accept(bundle.gpf, trust_, period);
    policies_.accept(bundle.gccf, trust_, period);
    if (const auto* gpf = policies_.current(rootmgmt::policy_kind::global_policy)) {
        const auto gp = rootmgmt::global_policy::decode(gpf->content);
        settings_.rotation_minutes = gp.rotation_minutes;
        rotation_ = std::make_unique<fixed_interval_rotation>(gp.rotation_minutes);
        if (gp.crl_capacity >= 10000) settings_.crl_capacity = gp.crl_capacity;
    }
    crls_ = cert::crl_store(settings_.crl_capacity);
    enrollment_private_ = keys.private_key;
    bundle_ = std::move(bundle);
}

byte_buffer device::via_proxy(sim::bus& bus, const component_id& dst, msg type, byte_view payload)
{
    const forward_request fwd{dst, tag(type), byte_buffer(payload.begin(), payload.end())};
    return bus.call(id_, bundle_->lop, tag(msg::lop_forward), fwd.encode());
}

void device::reestablish(sim::bus& bus, std::uint32_t period)
{
    require_bootstrapped();
    const auto keys = crypto::key_pair::generate(rng_);
    const auto& ra = authority_cert(cert::authority_role::registration);
    const auto sealed = seal_signed(reenroll_request{keys.public_key}.encode(), bundle_->enrollment,
                                    *enrollment_private_, ra.encryption_key.value(), rng_);
    const auto fresh = certificate::decode(via_proxy(bus, bundle_->ra, msg::ra_reenroll, sealed));
    if (fresh.verification_key != keys.public_key) {
        throw error(id_ + ": re-established certificate does not carry our new key");
    }
    if (trust_.verify_chain(fresh, period) != cert::chain_status::ok) {
        throw error(id_ + ": re-established certificate does not verify");
    }
    bundle_->enrollment = fresh;
    enrollment_private_ = keys.private_key;
}

// --- provisioning --------------------------------------------------------------

provision_ack device::request_certificates(sim::bus& bus, std::uint32_t start, std::uint32_t end, cert::cert_type kind)
{
    require_bootstrapped();
    grant g;
    g.kind = kind;
    g.start = start;
    g.end = end;
    g.secrets = butterfly::caterpillar_secrets::generate(rng_);

    provision_request req;
    req.kind = kind;
    req.caterpillar = g.secrets.request();
    req.start = start;
    req.end = end;
    req.psid = settings_.psid;
    if (kind != cert::cert_type::obe_pseudonym) req.subject = settings_.subject.empty() ? id_ : settings_.subject;

    const auto& ra = authority_cert(cert::authority_role::registration);
    const auto sealed = seal_signed(req.encode(), bundle_->enrollment, *enrollment_private_,
                                    ra.encryption_key.value(), rng_);
    const auto ack = provision_ack::decode(via_proxy(bus, bundle_->ra, msg::ra_provision, sealed));
    g.per_period = ack.per_period;
    grants_.push_back(std::move(g));
    handle_ = ack.handle;
    return ack;
}

const device::grant* device::grant_for(std::uint32_t period, cert::cert_type kind) const
{
    for (const auto& g : grants_) {
        if (g.kind == kind && g.start <= period && period <= g.end) return &g;
    }
    return nullptr;
}

install_report device::download(sim::bus& bus, std::uint32_t period)
{
    require_bootstrapped();
    const auto& ra = authority_cert(cert::authority_role::registration);
    const auto sealed = seal_signed(download_request{period}.encode(), bundle_->enrollment, *enrollment_private_,
                                    ra.encryption_key.value(), rng_);
    const auto b = batch::decode(via_proxy(bus, bundle_->ra, msg::ra_download, sealed));
    if (b.period != period) throw error(id_ + ": batch for the wrong period");
    auto report = install_batch(b);
    for (const auto& resp : pending_anomalies_) send_provisioning_report(bus, resp);
    pending_anomalies_.clear();
    return report;
}

install_report device::install_batch(const batch& b)
{
    require_bootstrapped();
    install_report rep;
    const auto& pca = authority_cert(cert::authority_role::pseudonym_ca);

    // Expected response keys J_(i,j) for every grant covering this period.
    struct expected
    {
        const grant* g;
        std::uint32_t j;
        scalar enc_private;
    };
    std::map<byte_array<33>, expected> keys;
    for (const auto& g : grants_) {
        if (g.start > b.period || b.period > g.end) continue;
        for (std::uint32_t j = 0; j < g.per_period; ++j) {
            const auto priv = g.secrets.cocoon_private(key_kind::encryption, {b.period, j});
            keys.emplace(crypto::group_element::mul_base(priv).encode(), expected{&g, j, priv});
        }
    }

    auto& held = certs_[b.period];
    for (const auto& resp : b.responses) {
        const auto reject = [&](std::size_t& counter, bool attack) {
            ++counter;
            ++quarantined_;
            if (attack) ++mitm_detected_;
            pending_anomalies_.push_back(resp);
        };
        const auto it = keys.find(resp.recipient_key.encode());
        if (it == keys.end()) {
            reject(rep.wrong_recipient, true);
            continue;
        }
        if (!crypto::verify(pca.verification_key, response_digest(resp.recipient_key, resp.ciphertext, pca),
                            resp.signature)) {
            reject(rep.bad_pca_signature, true);
            continue;
        }
        issued_payload payload;
        try {
            payload = issued_payload::decode(crypto::hybrid_decrypt(it->second.enc_private, resp.ciphertext));
        } catch (const error&) {
            reject(rep.undecryptable, false);
            continue;
        }
        const auto& g = *it->second.g;
        const auto& c = payload.cert;
        const bool index_ok = payload.index.i == b.period && payload.index.j == it->second.j;
        const bool type_ok = c.type == g.kind && (!c.linkage || c.linkage->index == payload.index);
        if (!index_ok || !type_ok || trust_.verify_chain(c, b.period) != cert::chain_status::ok) {
            reject(rep.invalid_certificate, false);
            continue;
        }
        const auto priv = butterfly::reconstruct_private(g.secrets.signing_private, g.secrets.signing_key,
                                                         key_kind::signing, payload.index, payload.c_sign);
        if (crypto::group_element::mul_base(priv) != c.verification_key) {
            reject(rep.key_mismatch, false);
            continue;
        }
        std::optional<scalar> enc_priv;
        if (c.encryption_key) {
            if (!payload.c_enc) {
                reject(rep.invalid_certificate, false);
                continue;
            }
            enc_priv = it->second.enc_private + *payload.c_enc;
            if (crypto::group_element::mul_base(*enc_priv) != *c.encryption_key) {
                reject(rep.key_mismatch, false);
                continue;
            }
        }
        const auto id = c.id();
        if (std::any_of(held.begin(), held.end(), [&](const held_cert& h) { return h.cert.id() == id; })) {
            ++rep.duplicates;
            continue;
        }
        held.push_back({c, priv, enc_priv});
        ++rep.installed;
    }
    std::sort(held.begin(), held.end(), [](const held_cert& a, const held_cert& b) {
        const auto ia = a.cert.linkage ? a.cert.linkage->index.j : 0;
        const auto ib = b.cert.linkage ? b.cert.linkage->index.j : 0;
        return ia < ib;
    });
    return rep;
}

void device::send_provisioning_report(sim::bus& bus, const pca_response& resp)
{
    ma::report_body body;
    body.kind = ma::report_kind::provisioning_failure;
    body.reported = authority_cert(cert::authority_role::pseudonym_ca);
    body.payload_digest = crypto::sha256(resp.encode());
    body.period = body.reported.valid.start; // no operational period is implied
    const auto& ma = authority_cert(cert::authority_role::misbehavior);
    const auto sealed = ma::seal_report(body, bundle_->enrollment, *enrollment_private_, ma.encryption_key.value(), rng_);
    via_proxy(bus, bundle_->ra, msg::ra_report, sealed);
}

std::size_t device::discard_unverifiable(std::uint32_t period)
{
    std::size_t dropped = 0;
    for (auto it = certs_.lower_bound(period); it != certs_.end();) {
        const bool broken = std::any_of(it->second.begin(), it->second.end(), [&](const held_cert& h) {
            return trust_.verify_chain(h.cert, it->first) != cert::chain_status::ok;
        });
        if (broken) {
            dropped += it->second.size();
            it = certs_.erase(it);
        } else {
            ++it;
        }
    }
    return dropped;
}

std::vector<certificate> device::certificates_for(std::uint32_t period) const
{
    std::vector<certificate> out;
    if (const auto it = certs_.find(period); it != certs_.end()) {
        for (const auto& h : it->second) out.push_back(h.cert);
    }
    return out;
}

// --- operation ------------------------------------------------------------------

std::optional<cert::signed_message> device::sign_bsm(const sim::sim_time& now, bsm_payload payload)
{
    const auto it = certs_.find(now.period);
    if (it == certs_.end() || it->second.empty()) return std::nullopt;
    const auto& held = it->second[rotation_->select(it->second.size(), now)];
    if (!held.cert.valid.covers(now.period)) return std::nullopt;
    payload.period = now.period;
    payload.minute = now.minute;
    return cert::sign_message(held.signing_private, held.cert, payload.encode());
}

bsm_verdict device::validate_bsm(const cert::signed_message& msg, const sim::sim_time& now) const
{
    bsm_payload payload;
    try {
        payload = bsm_payload::decode(msg.payload);
    } catch (const parse_error&) {
        return bsm_verdict::malformed;
    }
    const auto& c = msg.signer;
    if (c.type != cert::cert_type::obe_pseudonym && c.type != cert::cert_type::obe_identification &&
        c.type != cert::cert_type::rse_application) {
        return bsm_verdict::wrong_certificate_type;
    }
    if (payload.period != now.period) return bsm_verdict::stale;
    if (!c.valid.covers(now.period)) return bsm_verdict::outside_validity;

    switch (trust_.verify_chain(c, now.period, &crls_)) {
    case cert::chain_status::ok: break;
    case cert::chain_status::unknown_issuer:
    case cert::chain_status::too_long: return bsm_verdict::unknown_issuer;
    case cert::chain_status::invalid_issuer: return bsm_verdict::invalid_issuer;
    case cert::chain_status::bad_signature: return bsm_verdict::bad_chain_signature;
    case cert::chain_status::expired: return bsm_verdict::outside_validity;
    case cert::chain_status::untrusted_root: return bsm_verdict::untrusted_root;
    case cert::chain_status::profile_violation: return bsm_verdict::profile_violation;
    case cert::chain_status::revoked:
        return crls_.check(c) == cert::crl_status::revoked ? bsm_verdict::revoked : bsm_verdict::chain_revoked;
    }
    return cert::verify_message(msg) ? bsm_verdict::accepted : bsm_verdict::bad_signature;
}

void device::report_misbehavior(sim::bus& bus, const cert::signed_message& evidence, const sim::sim_time& now)
{
    require_bootstrapped();
    const auto it = certs_.find(now.period);
    if (it == certs_.end() || it->second.empty()) throw error(id_ + ": no pseudonym certificate to report with");
    const auto& me = it->second[rotation_->select(it->second.size(), now)];
    ma::report_body body{ma::report_kind::misbehavior, evidence.signer, crypto::sha256(evidence.payload), now.period};
    const auto& ma = authority_cert(cert::authority_role::misbehavior);
    const auto sealed = ma::seal_report(body, me.cert, me.signing_private, ma.encryption_key.value(), rng_);
    via_proxy(bus, bundle_->ra, msg::ra_report, sealed);
}

// --- trust and revocation --------------------------------------------------------------

bool device::store_crl(const cert::crl& list, std::uint32_t period)
{
    if (!trust_.verify_crl(list, period)) return false;
    return crls_.install(list);
}

rootmgmt::verdict device::accept_ballot(const rootmgmt::ballot& b)
{
    auto v = electorate_.process(b);
    refresh_trust();
    return v;
}

rootmgmt::policy_result device::accept_policy(const rootmgmt::policy_file& f, std::uint32_t period)
{
    if (f.kind != rootmgmt::policy_kind::global_chain) return policies_.accept(f, trust_, period);
    // A new chain file may be signed by a PG certified under a root endorsed
    // since bootstrap. Its certificates are tried in a scratch store: every
    // chain still has to end in a root the electors vouch for.
    std::vector<certificate> chain;
    try {
        chain = rootmgmt::decode_chain_file(f.content);
    } catch (const parse_error&) {
        return rootmgmt::policy_result::bad_signature;
    }
    auto scratch = trust_;
    for (const auto& c : chain) scratch.add(c);
    const auto result = policies_.accept(f, scratch, period);
    if (result == rootmgmt::policy_result::accepted) absorb_authorities(chain);
    return result;
}

std::size_t device::sync(sim::bus& bus, std::uint32_t period)
{
    require_bootstrapped();
    const auto fetch = [&](const std::string& name) -> std::optional<byte_buffer> {
        try {
            return via_proxy(bus, bundle_->repo, msg::repo_fetch, as_bytes(name));
        } catch (const refused&) {
            return std::nullopt;
        }
    };
    // The ballot feed is cumulative; actions already applied are simply rejected again.
    if (const auto ballots = fetch("ballots")) accept_ballot(rootmgmt::ballot::decode(*ballots));
    for (const auto* name : {"gccf", "gpf"}) {
        if (const auto f = fetch(name)) accept_policy(rootmgmt::policy_file::decode(*f), period);
    }
    std::size_t installed = 0;
    if (const auto crls = fetch("crl")) {
        for (const auto& list : cert::decode_composite(*crls)) installed += store_crl(list, period);
    }
    return installed;
}

// --- snapshot ---------------------------------------------------------------------------

byte_buffer device::snapshot() const
{
    writer w;
    w.raw(as_bytes(snapshot_magic));
    w.str(id_);
    w.str(settings_.model);
    w.u8(static_cast<std::uint8_t>(settings_.enrollment_type));
    w.str(settings_.subject);
    w.u32(settings_.psid);
    w.u32(settings_.enrollment_periods);
    w.u32(settings_.rotation_minutes);
    w.u64(settings_.crl_capacity);
    w.boolean(bundle_.has_value());
    if (bundle_) {
        w.var_bytes(bundle_->encode());
        crypto::write(w, *enrollment_private_);
    }
    w.boolean(handle_.has_value());
    if (handle_) w.raw(*handle_);
    w.u32(static_cast<std::uint32_t>(grants_.size()));
    for (const auto& g : grants_) {
        w.u8(static_cast<std::uint8_t>(g.kind));
        w.u32(g.start);
        w.u32(g.end);
        w.u16(g.per_period);
        g.secrets.write(w);
    }
    w.u32(static_cast<std::uint32_t>(certs_.size()));
    for (const auto& [period, list] : certs_) {
        w.u32(period);
        w.u32(static_cast<std::uint32_t>(list.size()));
        for (const auto& h : list) {
            h.cert.write(w);
            crypto::write(w, h.signing_private);
            w.boolean(h.encryption_private.has_value());
            if (h.encryption_private) crypto::write(w, *h.encryption_private);
        }
    }
    w.var_bytes(electorate_.encode());
    w.u32(static_cast<std::uint32_t>(directory_.size()));
    for (const auto& [role, c] : directory_) c.write(w);
    for (const auto kind : {rootmgmt::policy_kind::global_policy, rootmgmt::policy_kind::global_chain}) {
        const auto* f = policies_.current(kind);
        w.boolean(f != nullptr);
        if (f) w.var_bytes(f->encode());
    }
    w.var_bytes(crls_.encode());
    w.u64(quarantined_);
    w.u64(mitm_detected_);
    return std::move(w).buffer();
}

device device::restore(byte_view data, crypto::seeded_random rng)
{
    return decode_exact(data, [&](reader& r) {
        const auto magic = r.raw(8);
        if (!std::equal(magic.begin(), magic.end(), snapshot_magic.begin())) r.fail("not a device snapshot");
        auto id = r.str();
        device_settings s;
        s.model = r.str();
        s.enrollment_type = static_cast<cert::cert_type>(r.u8());
        s.subject = r.str();
        s.psid = r.u32();
        s.enrollment_periods = r.u32();
        s.rotation_minutes = r.u32();
        s.crl_capacity = static_cast<std::size_t>(r.u64());
        device d(std::move(id), s, std::move(rng));
        if (r.boolean()) {
            d.bundle_ = bootstrap_bundle::decode(r.var_bytes());
            d.enrollment_private_ = crypto::read_scalar(r);
        }
        if (r.boolean()) d.handle_ = r.array<8>();
        const auto grants = r.u32();
        for (std::uint32_t k = 0; k < grants; ++k) {
            grant g;
            g.kind = static_cast<cert::cert_type>(r.u8());
            g.start = r.u32();
            g.end = r.u32();
            g.per_period = r.u16();
            g.secrets = butterfly::caterpillar_secrets::read(r);
            d.grants_.push_back(std::move(g));
        }
        const auto periods = r.u32();
        for (std::uint32_t k = 0; k < periods; ++k) {
            auto& list = d.certs_[r.u32()];
            const auto n = r.u32();
            for (std::uint32_t m = 0; m < n; ++m) {
                held_cert h;
                h.cert = certificate::read(r);
                h.signing_private = crypto::read_scalar(r);
                if (r.boolean()) h.encryption_private = crypto::read_scalar(r);
                list.push_back(std::move(h));
            }
        }
        d.electorate_ = rootmgmt::trust_state::decode(r.var_bytes());
        if (d.bundle_) {
            for (const auto& e : d.bundle_->electors) d.trust_.add(e);
            d.absorb_authorities(d.bundle_->authorities);
        }
        const auto dir = r.u32();
        std::vector<certificate> directory;
        for (std::uint32_t k = 0; k < dir; ++k) directory.push_back(certificate::read(r));
        d.absorb_authorities(directory);
        d.refresh_trust();
        for (int k = 0; k < 2; ++k) {
            if (r.boolean()) d.policies_.adopt(rootmgmt::policy_file::decode(r.var_bytes()));
        }
        d.crls_ = cert::crl_store::decode(r.var_bytes(), s.crl_capacity);
        d.quarantined_ = static_cast<std::size_t>(r.u64());
        d.mitm_detected_ = static_cast<std::size_t>(r.u64());
        return d;
    });
}

} // namespace scms::ee
