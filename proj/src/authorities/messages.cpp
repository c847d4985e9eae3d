#include <scms/authorities/messages.hpp>
#include <scms/crypto/serialize.hpp>

#include <map>

namespace scms::authorities {

using crypto::read_element;
using crypto::read_scalar;
using crypto::read_signature;

namespace {

template <typename T, typename Fn>
T decode_with(byte_view data, Fn fn)
{
    return decode_exact(data, [&](reader& r) {
        T value;
        fn(r, value);
        return value;
    });
}

void write_validity(writer& w, const cert::validity& v)
{
    w.u32(v.start);
    w.u32(v.end);
}

cert::validity read_validity(reader& r)
{
    cert::validity v;
    v.start = r.u32();
    v.end = r.u32();
    return v;
}

cert_type read_cert_type(reader& r)
{
    const auto offset = r.offset();
    const auto v = r.u8();
    if (v < 1 || v > 6) {
        throw parse_error(offset, "unknown certificate type");
    }
    return static_cast<cert_type>(v);
}

void write_lci(writer& w, const linkage_chain_id& lci) { lci.write(w); }

/// Element count bounded by what the remaining input could possibly hold.
std::size_t read_count(reader& r, std::size_t min_item_size)
{
    const auto offset = r.offset();
    const std::size_t n = r.u32();
    if (n > r.remaining() / min_item_size) {
        throw parse_error(offset, "element count exceeds input");
    }
    return n;
}

} // namespace

std::string msg_name(std::uint16_t type)
{
    static const std::map<std::uint16_t, std::string> names{
        {tag(msg::lop_forward), "lop_forward"},       {tag(msg::eca_enroll), "eca_enroll"},
        {tag(msg::eca_reestablish), "eca_reestablish"}, {tag(msg::ra_provision), "ra_provision"},
        {tag(msg::ra_download), "ra_download"},       {tag(msg::ra_report), "ra_report"},
        {tag(msg::ra_reenroll), "ra_reenroll"},       {tag(msg::ra_blacklist), "ra_blacklist"},
        {tag(msg::la_open_chain), "la_open_chain"},   {tag(msg::la_plv_batch), "la_plv_batch"},
        {tag(msg::la_link_query), "la_link_query"},   {tag(msg::la_seed), "la_seed"},
        {tag(msg::pca_issue), "pca_issue"},           {tag(msg::pca_lookup), "pca_lookup"},
        {tag(msg::pca_plv_pairs), "pca_plv_pairs"},   {tag(msg::pca_cert_ids), "pca_cert_ids"},
        {tag(msg::ma_reports), "ma_reports"},         {tag(msg::repo_publish), "repo_publish"},
        {tag(msg::repo_fetch), "repo_fetch"},
    };
    const auto it = names.find(type);
    return it == names.end() ? std::to_string(type) : it->second;
}

void write_lv(writer& w, const linkage_value& lv)
{
    w.raw(lv.value);
    w.u32(lv.index.i);
    w.u32(lv.index.j);
}

linkage_value read_lv(reader& r)
{
    linkage_value lv;
    lv.value = r.array<linkage::value_size>();
    lv.index.i = r.u32();
    lv.index.j = r.u32();
    return lv;
}

byte_buffer lv_key(const linkage_value& lv)
{
    writer w;
    write_lv(w, lv);
    return std::move(w).buffer();
}

byte_buffer seal_signed(byte_view payload, const certificate& signer, const scalar& signer_private,
                        const group_element& recipient, crypto::random_source& rng)
{
    const auto msg = cert::sign_message(signer_private, signer, payload);
    return crypto::hybrid_encrypt(recipient, msg.encode(), rng).encode();
}

cert::signed_message open_signed(const scalar& recipient_private, byte_view sealed)
{
    const auto plain = crypto::hybrid_decrypt(recipient_private, crypto::hybrid_ciphertext::decode(sealed));
    return cert::signed_message::decode(plain);
}

// --- device-facing -----------------------------------------------------------

byte_buffer forward_request::encode() const
{
    writer w;
    w.str(dst);
    w.u16(type);
    w.var_bytes(payload);
    return std::move(w).buffer();
}

forward_request forward_request::decode(byte_view data)
{
    return decode_with<forward_request>(data, [](reader& r, forward_request& f) {
        f.dst = r.str();
        f.type = r.u16();
        f.payload = r.var_bytes();
    });
}

byte_buffer enroll_request::encode() const
{
    writer w;
    w.u8(static_cast<std::uint8_t>(type));
    w.str(model);
    w.str(subject);
    crypto::write(w, verification_key);
    write_validity(w, valid);
    w.u32(psid);
    return std::move(w).buffer();
}

enroll_request enroll_request::decode(byte_view data)
{
    return decode_with<enroll_request>(data, [](reader& r, enroll_request& e) {
        e.type = read_cert_type(r);
        e.model = r.str();
        e.subject = r.str();
        e.verification_key = read_element(r);
        e.valid = read_validity(r);
        e.psid = r.u32();
    });
}

byte_buffer provision_request::encode() const
{
    writer w;
    w.u8(static_cast<std::uint8_t>(kind));
    caterpillar.write(w);
    w.u32(start);
    w.u32(end);
    w.u32(psid);
    w.str(subject);
    return std::move(w).buffer();
}

provision_request provision_request::decode(byte_view data)
{
    return decode_with<provision_request>(data, [](reader& r, provision_request& p) {
        p.kind = read_cert_type(r);
        p.caterpillar = butterfly::caterpillar_request::read(r);
        p.start = r.u32();
        p.end = r.u32();
        p.psid = r.u32();
        p.subject = r.str();
    });
}

byte_buffer provision_ack::encode() const
{
    writer w;
    w.raw(handle);
    w.u32(start);
    w.u32(end);
    w.u16(per_period);
    return std::move(w).buffer();
}

provision_ack provision_ack::decode(byte_view data)
{
    return decode_with<provision_ack>(data, [](reader& r, provision_ack& a) {
        a.handle = r.array<8>();
        a.start = r.u32();
        a.end = r.u32();
        a.per_period = r.u16();
    });
}

byte_buffer download_request::encode() const
{
    writer w;
    w.u32(period);
    return std::move(w).buffer();
}

download_request download_request::decode(byte_view data)
{
    return decode_with<download_request>(data, [](reader& r, download_request& d) { d.period = r.u32(); });
}

byte_buffer reenroll_request::encode() const
{
    writer w;
    crypto::write(w, new_key);
    return std::move(w).buffer();
}

reenroll_request reenroll_request::decode(byte_view data)
{
    return decode_with<reenroll_request>(data, [](reader& r, reenroll_request& q) { q.new_key = read_element(r); });
}

byte_buffer reestablish_request::encode() const
{
    writer w;
    old_enrollment.write(w);
    crypto::write(w, new_key);
    return std::move(w).buffer();
}

reestablish_request reestablish_request::decode(byte_view data)
{
    return decode_with<reestablish_request>(data, [](reader& r, reestablish_request& q) {
        q.old_enrollment = certificate::read(r);
        q.new_key = read_element(r);
    });
}

// --- RA <-> LA <-> PCA -------------------------------------------------------

byte_buffer chain_opened::encode() const
{
    writer w;
    w.u32(la.value);
    write_lci(w, lci);
    return std::move(w).buffer();
}

chain_opened chain_opened::decode(byte_view data)
{
    return decode_with<chain_opened>(data, [](reader& r, chain_opened& c) {
        c.la.value = r.u32();
        c.lci = linkage_chain_id::read(r);
    });
}

byte_buffer plv_batch_request::encode() const
{
    writer w;
    write_lci(w, lci);
    w.u32(period);
    w.u16(count);
    return std::move(w).buffer();
}

plv_batch_request plv_batch_request::decode(byte_view data)
{
    return decode_with<plv_batch_request>(data, [](reader& r, plv_batch_request& q) {
        q.lci = linkage_chain_id::read(r);
        q.period = r.u32();
        q.count = r.u16();
    });
}

byte_buffer plv_batch::encode() const
{
    writer w;
    w.u32(la.value);
    w.u32(static_cast<std::uint32_t>(items.size()));
    for (const auto& item : items) {
        w.u32(item.j);
        item.for_pca.write(w);
        w.var_bytes(item.la_sealed);
    }
    return std::move(w).buffer();
}

plv_batch plv_batch::decode(byte_view data)
{
    return decode_with<plv_batch>(data, [](reader& r, plv_batch& b) {
        b.la.value = r.u32();
        const auto n = r.u32();
        for (std::uint32_t k = 0; k < n; ++k) {
            plv_item item;
            item.j = r.u32();
            item.for_pca = crypto::hybrid_ciphertext::read(r);
            item.la_sealed = r.var_bytes();
            b.items.push_back(std::move(item));
        }
    });
}

byte_buffer pca_request::encode() const
{
    writer w;
    w.u8(static_cast<std::uint8_t>(kind));
    w.u32(index.i);
    w.u32(index.j);
    write_validity(w, valid);
    w.u32(psid);
    w.str(subject);
    crypto::write(w, signing_cocoon);
    crypto::write(w, response_key);
    w.u8(static_cast<std::uint8_t>((encryption_cocoon ? 0x01 : 0) | (linkage ? 0x02 : 0)));
    if (encryption_cocoon) crypto::write(w, *encryption_cocoon);
    if (linkage) {
        w.u32(linkage->la1.value);
        w.u32(linkage->la2.value);
        linkage->enc1.write(w);
        linkage->enc2.write(w);
        w.var_bytes(linkage->sealed1);
        w.var_bytes(linkage->sealed2);
    }
    return std::move(w).buffer();
}

pca_request pca_request::decode(byte_view data)
{
    return decode_with<pca_request>(data, [](reader& r, pca_request& q) {
        q.kind = read_cert_type(r);
        q.index.i = r.u32();
        q.index.j = r.u32();
        q.valid = read_validity(r);
        q.psid = r.u32();
        q.subject = r.str();
        q.signing_cocoon = read_element(r);
        q.response_key = read_element(r);
        const auto offset = r.offset();
        const auto flags = r.u8();
        if (flags & ~0x03) {
            throw parse_error(offset, "unknown request flags");
        }
        if (flags & 0x01) q.encryption_cocoon = read_element(r);
        if (flags & 0x02) {
            linkage_material m;
            m.la1.value = r.u32();
            m.la2.value = r.u32();
            m.enc1 = crypto::hybrid_ciphertext::read(r);
            m.enc2 = crypto::hybrid_ciphertext::read(r);
            m.sealed1 = r.var_bytes();
            m.sealed2 = r.var_bytes();
            q.linkage = std::move(m);
        }
    });
}

void pca_response::write(writer& w) const
{
    crypto::write(w, recipient_key);
    ciphertext.write(w);
    crypto::write(w, signature);
}

pca_response pca_response::read(reader& r)
{
    pca_response p;
    p.recipient_key = read_element(r);
    p.ciphertext = crypto::hybrid_ciphertext::read(r);
    p.signature = read_signature(r);
    return p;
}

byte_buffer pca_response::encode() const
{
    writer w;
    write(w);
    return std::move(w).buffer();
}

pca_response pca_response::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) { return read(r); });
}

crypto::digest256 response_digest(const group_element& recipient, const crypto::hybrid_ciphertext& ct,
                                  const certificate& pca)
{
    writer w;
    crypto::write(w, recipient);
    ct.write(w);
    return cert::message_digest(w.buffer(), pca);
}

byte_buffer issued_payload::encode() const
{
    writer w;
    w.u32(index.i);
    w.u32(index.j);
    cert.write(w);
    crypto::write(w, c_sign);
    w.boolean(c_enc.has_value());
    if (c_enc) crypto::write(w, *c_enc);
    return std::move(w).buffer();
}

issued_payload issued_payload::decode(byte_view data)
{
    return decode_with<issued_payload>(data, [](reader& r, issued_payload& p) {
        p.index.i = r.u32();
        p.index.j = r.u32();
        p.cert = certificate::read(r);
        p.c_sign = read_scalar(r);
        if (r.boolean()) p.c_enc = read_scalar(r);
    });
}

byte_buffer batch::encode() const
{
    writer w;
    w.raw(handle);
    w.u32(period);
    w.u32(static_cast<std::uint32_t>(responses.size()));
    for (const auto& resp : responses) resp.write(w);
    return std::move(w).buffer();
}

batch batch::decode(byte_view data)
{
    return decode_with<batch>(data, [](reader& r, batch& b) {
        b.handle = r.array<8>();
        b.period = r.u32();
        const auto n = r.u32();
        for (std::uint32_t k = 0; k < n; ++k) b.responses.push_back(pca_response::read(r));
    });
}

std::string batch::file_name() const
{
    return to_hex(handle) + "_" + std::to_string(period) + ".batch";
}

// --- MA requests -------------------------------------------------------------

std::string_view to_string(ma_op op)
{
    switch (op) {
    case ma_op::plv_pairs: return "plv_pairs";
    case ma_op::link_query: return "link_query";
    case ma_op::lookup: return "lookup";
    case ma_op::blacklist: return "blacklist";
    case ma_op::seed: return "seed";
    case ma_op::cert_ids: return "cert_ids";
    }
    return "unknown";
}

byte_buffer ma_request::encode() const
{
    writer w;
    w.u8(static_cast<std::uint8_t>(op));
    w.u32(period);
    w.u64(nonce);
    w.var_bytes(body);
    return std::move(w).buffer();
}

ma_request ma_request::decode(byte_view data)
{
    return decode_with<ma_request>(data, [](reader& r, ma_request& q) {
        const auto offset = r.offset();
        const auto op = r.u8();
        if (op < 1 || op > 6) {
            throw parse_error(offset, "unknown MA operation");
        }
        q.op = static_cast<ma_op>(op);
        q.period = r.u32();
        q.nonce = r.u64();
        q.body = r.var_bytes();
    });
}

byte_buffer encode_lvs(const std::vector<linkage_value>& lvs)
{
    writer w;
    w.u32(static_cast<std::uint32_t>(lvs.size()));
    for (const auto& lv : lvs) write_lv(w, lv);
    return std::move(w).buffer();
}

std::vector<linkage_value> decode_lvs(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        std::vector<linkage_value> out(read_count(r, 17));
        for (auto& lv : out) lv = read_lv(r);
        return out;
    });
}

byte_buffer encode_plv_pairs(const std::vector<plv_pair_record>& pairs)
{
    writer w;
    w.u32(static_cast<std::uint32_t>(pairs.size()));
    for (const auto& p : pairs) {
        write_lv(w, p.lv);
        w.u32(p.la1.value);
        w.var_bytes(p.sealed1);
        w.u32(p.la2.value);
        w.var_bytes(p.sealed2);
    }
    return std::move(w).buffer();
}

std::vector<plv_pair_record> decode_plv_pairs(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        std::vector<plv_pair_record> out(read_count(r, 33));
        for (auto& p : out) {
            p.lv = read_lv(r);
            p.la1.value = r.u32();
            p.sealed1 = r.var_bytes();
            p.la2.value = r.u32();
            p.sealed2 = r.var_bytes();
        }
        return out;
    });
}

byte_buffer link_query::encode() const
{
    writer w;
    w.var_bytes(sealed_a);
    w.var_bytes(sealed_b);
    return std::move(w).buffer();
}

link_query link_query::decode(byte_view data)
{
    return decode_with<link_query>(data, [](reader& r, link_query& q) {
        q.sealed_a = r.var_bytes();
        q.sealed_b = r.var_bytes();
    });
}

byte_buffer lookup_query::encode() const
{
    writer w;
    w.u8(static_cast<std::uint8_t>(by));
    w.var_bytes(key);
    return std::move(w).buffer();
}

lookup_query lookup_query::decode(byte_view data)
{
    return decode_with<lookup_query>(data, [](reader& r, lookup_query& q) {
        const auto offset = r.offset();
        const auto by = r.u8();
        if (by > 1) {
            throw parse_error(offset, "unknown lookup key");
        }
        q.by = static_cast<lookup_key>(by);
        q.key = r.var_bytes();
    });
}

byte_buffer lookup_result::encode() const
{
    writer w;
    w.raw(request_hash);
    w.str(ra);
    w.raw(id);
    write_validity(w, valid);
    return std::move(w).buffer();
}

lookup_result lookup_result::decode(byte_view data)
{
    return decode_with<lookup_result>(data, [](reader& r, lookup_result& l) {
        l.request_hash = r.array<32>();
        l.ra = r.str();
        l.id = r.array<8>();
        l.valid = read_validity(r);
    });
}

byte_buffer blacklist_order::encode() const
{
    writer w;
    w.raw(request_hash);
    w.u8(static_cast<std::uint8_t>(mode));
    return std::move(w).buffer();
}

blacklist_order blacklist_order::decode(byte_view data)
{
    return decode_with<blacklist_order>(data, [](reader& r, blacklist_order& b) {
        b.request_hash = r.array<32>();
        const auto offset = r.offset();
        const auto mode = r.u8();
        if (mode > 1) {
            throw parse_error(offset, "unknown blacklist mode");
        }
        b.mode = static_cast<blacklist_mode>(mode);
    });
}

byte_buffer blacklist_result::encode() const
{
    writer w;
    w.u32(static_cast<std::uint32_t>(chains.size()));
    for (const auto& c : chains) {
        w.str(c.la_host);
        w.u32(c.la.value);
        write_lci(w, c.lci);
    }
    w.u32(static_cast<std::uint32_t>(open_requests.size()));
    for (const auto& h : open_requests) w.raw(h);
    return std::move(w).buffer();
}

blacklist_result blacklist_result::decode(byte_view data)
{
    return decode_with<blacklist_result>(data, [](reader& r, blacklist_result& b) {
        b.chains.resize(read_count(r, 12));
        for (auto& c : b.chains) {
            c.la_host = r.str();
            c.la.value = r.u32();
            c.lci = linkage_chain_id::read(r);
        }
        b.open_requests.resize(read_count(r, 32));
        for (auto& h : b.open_requests) h = r.array<32>();
    });
}

byte_buffer seed_query::encode() const
{
    writer w;
    write_lci(w, lci);
    w.u32(period);
    return std::move(w).buffer();
}

seed_query seed_query::decode(byte_view data)
{
    return decode_with<seed_query>(data, [](reader& r, seed_query& q) {
        q.lci = linkage_chain_id::read(r);
        q.period = r.u32();
    });
}

byte_buffer seed_result::encode() const
{
    writer w;
    w.u32(la.value);
    w.raw(seed.value);
    w.u32(seed.period);
    return std::move(w).buffer();
}

seed_result seed_result::decode(byte_view data)
{
    return decode_with<seed_result>(data, [](reader& r, seed_result& s) {
        s.la.value = r.u32();
        s.seed.value = r.array<linkage::seed_size>();
        s.seed.period = r.u32();
    });
}

byte_buffer encode_hashes(const std::vector<crypto::digest256>& hashes)
{
    writer w;
    w.u32(static_cast<std::uint32_t>(hashes.size()));
    for (const auto& h : hashes) w.raw(h);
    return std::move(w).buffer();
}

std::vector<crypto::digest256> decode_hashes(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        std::vector<crypto::digest256> out(read_count(r, 32));
        for (auto& h : out) h = r.array<32>();
        return out;
    });
}

byte_buffer encode_ids(const std::vector<cert_id>& ids)
{
    writer w;
    w.u32(static_cast<std::uint32_t>(ids.size()));
    for (const auto& id : ids) w.raw(id);
    return std::move(w).buffer();
}

std::vector<cert_id> decode_ids(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        std::vector<cert_id> out(read_count(r, 8));
        for (auto& id : out) id = r.array<8>();
        return out;
    });
}

byte_buffer publication::encode() const
{
    writer w;
    w.str(name);
    w.var_bytes(content);
    return std::move(w).buffer();
}

publication publication::decode(byte_view data)
{
    return decode_with<publication>(data, [](reader& r, publication& p) {
        p.name = r.str();
        p.content = r.var_bytes();
    });
}

} // namespace scms::authorities
