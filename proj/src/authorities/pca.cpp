#include <scms/authorities/pca.hpp>
#include <scms/crypto/serialize.hpp>

namespace scms::authorities {

byte_buffer pca_record::encode() const
{
    writer w;
    cert.write(w);
    w.raw(request_hash);
    w.str(ra);
    w.boolean(lv.has_value());
    if (lv) {
        write_lv(w, *lv);
        w.u32(la1.value);
        w.var_bytes(sealed1);
        w.u32(la2.value);
        w.var_bytes(sealed2);
    }
    return std::move(w).buffer();
}

pca_record pca_record::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        pca_record p;
        p.cert = certificate::read(r);
        p.request_hash = r.array<32>();
        p.ra = r.str();
        if (r.boolean()) {
            p.lv = read_lv(r);
            p.la1.value = r.u32();
            p.sealed1 = r.var_bytes();
            p.la2.value = r.u32();
            p.sealed2 = r.var_bytes();
        }
        return p;
    });
}

pseudonym_ca::pseudonym_ca(component_id id, credentials creds, environment env, crypto::seeded_random rng,
                           pca_config cfg) :
    authority(std::move(id), std::move(creds), env, std::move(rng)), cfg_(std::move(cfg)),
    gate_(store_, id_, cfg_.daily_ma_cap)
{
    encryption_private();
}

std::size_t pseudonym_ca::issued() const
{
    std::lock_guard lock(mutex_);
    return store_.count(id_, "issued");
}

std::size_t pseudonym_ca::rejected() const
{
    std::lock_guard lock(mutex_);
    return rejected_;
}

void pseudonym_ca::set_craca(const cert_id& craca)
{
    std::lock_guard lock(mutex_);
    cfg_.craca = craca;
}

void pseudonym_ca::set_daily_cap(std::uint32_t cap)
{
    std::lock_guard lock(mutex_);
    gate_.set_daily_cap(cap);
}

std::optional<pca_record> pseudonym_ca::find(const std::string& index, byte_view key) const
{
    const auto id = store_.get(id_, index, key);
    if (!id) return std::nullopt;
    const auto rec = store_.get(id_, "issued", *id);
    if (!rec) return std::nullopt;
    return pca_record::decode(*rec);
}

std::optional<pca_record> pseudonym_ca::record_for(const linkage_value& lv) const
{
    std::lock_guard lock(mutex_);
    return find("lv", lv_key(lv));
}

namespace {

linkage::pre_linkage_value open_plv(const scalar& priv, const crypto::hybrid_ciphertext& ct)
{
    const auto plain = crypto::hybrid_decrypt(priv, ct);
    return decode_exact(plain, [](reader& r) {
        linkage::pre_linkage_value p;
        p.value = r.array<linkage::value_size>();
        p.index.i = r.u32();
        p.index.j = r.u32();
        p.owner.value = r.u32();
        return p;
    });
}

} // namespace

byte_buffer pseudonym_ca::issue(const sim::envelope& e)
{
    const auto req = pca_request::decode(e.payload);
    const auto request_hash = crypto::sha256(e.payload);

    pca_record record;
    record.request_hash = request_hash;
    record.ra = e.src;

    certificate tbs;
    tbs.type = req.kind;
    tbs.valid = req.valid;
    tbs.psid = req.psid;
    tbs.craca_id = cfg_.craca;
    tbs.crl_series = cert::crl_series_table{}.for_type(req.kind);

    switch (req.kind) {
    case cert_type::obe_pseudonym: {
        if (!req.linkage) throw refused("pseudonym request without linkage material");
        const auto& m = *req.linkage;
        linkage::pre_linkage_value p1, p2;
        try {
            p1 = open_plv(encryption_private(), m.enc1);
            p2 = open_plv(encryption_private(), m.enc2);
        } catch (const error&) {
            ++rejected_;
            throw refused("pre-linkage value decryption failed");
        }
        if (p1.owner != m.la1 || p2.owner != m.la2 || p1.index != req.index || p2.index != req.index) {
            ++rejected_;
            throw refused("pre-linkage values do not match the request");
        }
        record.lv = linkage::combine(p1, p2);
        record.la1 = m.la1;
        record.sealed1 = m.sealed1;
        record.la2 = m.la2;
        record.sealed2 = m.sealed2;
        tbs.linkage = record.lv;
        break;
    }
    case cert_type::obe_identification:
        tbs.subject = req.subject;
        break;
    case cert_type::rse_application:
        if (!req.encryption_cocoon) throw refused("application request without encryption cocoon");
        tbs.subject = req.subject;
        break;
    default:
        throw refused("PCA does not issue this certificate type");
    }
    if (req.linkage && req.kind != cert_type::obe_pseudonym) {
        throw refused("linkage material on a non-pseudonym request");
    }
    if (!req.valid.covers(req.index.i)) {
        throw refused("index period outside validity");
    }

    issued_payload payload;
    payload.index = req.index;
    const auto signing = butterfly::butterfly_finalize(req.signing_cocoon, rng_);
    tbs.verification_key = signing.public_key;
    payload.c_sign = signing.reconstruction;
    if (req.encryption_cocoon) {
        const auto enc = butterfly::butterfly_finalize(*req.encryption_cocoon, rng_);
        tbs.encryption_key = enc.public_key;
        payload.c_enc = enc.reconstruction;
    }
    payload.cert = cert::issue(std::move(tbs), creds_.cert, creds_.signing_private);
    record.cert = payload.cert;

    pca_response resp;
    resp.recipient_key = req.response_key;
    resp.ciphertext = crypto::hybrid_encrypt(req.response_key, payload.encode(), rng_);
    resp.signature = crypto::sign(creds_.signing_private, response_digest(resp.recipient_key, resp.ciphertext, creds_.cert));

    const auto id = payload.cert.id();
    store_.put(id_, "issued", id, record.encode());
    store_.put(id_, "request", request_hash, id);
    if (record.lv) store_.put(id_, "lv", lv_key(*record.lv), id);
    return resp.encode();
}

byte_buffer pseudonym_ca::dispatch(const sim::envelope& e)
{
    switch (static_cast<msg>(e.type)) {
    case msg::pca_issue:
        if (!cfg_.ras.count(e.src)) throw refused("certificate requests are accepted from RAs only");
        return issue(e);
    case msg::pca_plv_pairs: {
        require_source(e, cfg_.ma);
        const auto req = gate_.admit(e.payload, e.src, trust_, now(), ma_op::plv_pairs);
        std::vector<plv_pair_record> out;
        for (const auto& lv : decode_lvs(req.body)) {
            if (const auto rec = find("lv", lv_key(lv))) {
                out.push_back({lv, rec->la1, rec->sealed1, rec->la2, rec->sealed2});
            }
        }
        return encode_plv_pairs(out);
    }
    case msg::pca_lookup: {
        require_source(e, cfg_.ma);
        const auto req = gate_.admit(e.payload, e.src, trust_, now(), ma_op::lookup);
        const auto q = lookup_query::decode(req.body);
        const auto rec = q.by == lookup_key::linkage_value ? find("lv", q.key) : [&]() -> std::optional<pca_record> {
            const auto raw = store_.get(id_, "issued", q.key);
            if (!raw) return std::nullopt;
            return pca_record::decode(*raw);
        }();
        if (!rec) throw refused("no certificate issued for this key");
        return lookup_result{rec->request_hash, rec->ra, rec->cert.id(), rec->cert.valid}.encode();
    }
    case msg::pca_cert_ids: {
        require_source(e, cfg_.ma);
        const auto req = gate_.admit(e.payload, e.src, trust_, now(), ma_op::cert_ids);
        std::vector<cert_id> out;
        for (const auto& h : decode_hashes(req.body)) {
            const auto rec = find("request", h);
            if (rec && rec->cert.valid.end >= req.period) out.push_back(rec->cert.id());
        }
        return encode_ids(out);
    }
    default:
        throw refused("unsupported message");
    }
}

} // namespace scms::authorities
