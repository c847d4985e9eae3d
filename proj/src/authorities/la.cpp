#include <scms/authorities/la.hpp>
#include <scms/crypto/hash.hpp>

namespace scms::authorities {

namespace {

byte_buffer plv_key(const linkage::pre_linkage_value& plv)
{
    writer w;
    w.raw(plv.value);
    w.u32(plv.index.i);
    w.u32(plv.index.j);
    return std::move(w).buffer();
}

} // namespace

linkage_authority::linkage_authority(component_id id, credentials creds, environment env, crypto::seeded_random rng,
                                     la_config cfg) :
    authority(std::move(id), std::move(creds), env, std::move(rng)), cfg_(std::move(cfg)),
    gate_(store_, id_, cfg_.daily_ma_cap)
{
    encryption_private(); // an LA without an encryption key cannot seal LCIs
}

std::size_t linkage_authority::chains() const
{
    std::lock_guard lock(mutex_);
    return store_.count(id_, "chain");
}

void linkage_authority::set_daily_cap(std::uint32_t cap)
{
    std::lock_guard lock(mutex_);
    gate_.set_daily_cap(cap);
}

byte_buffer linkage_authority::chain_key(const linkage_chain_id& lci) const
{
    const auto h = crypto::sha256(lci.encode());
    return byte_buffer(h.begin(), h.end());
}

linkage::linkage_seed linkage_authority::chain_seed(const linkage_chain_id& lci) const
{
    if (!store_.get(id_, "chain", chain_key(lci))) {
        throw refused("unknown linkage chain");
    }
    try {
        return linkage::open_chain_id(encryption_private(), lci);
    } catch (const decryption_error&) {
        throw refused("LCI not issued by this LA");
    }
}

crypto::symmetric_key linkage_authority::seal_key() const
{
    writer w;
    w.raw(as_bytes("scms/la-self-seal"));
    w.raw(encryption_private().encode());
    const auto h = crypto::sha256(w.buffer());
    byte_array<16> k{};
    std::copy_n(h.begin(), 16, k.begin());
    return crypto::symmetric_key(k);
}

byte_buffer linkage_authority::seal(const linkage::pre_linkage_value& plv)
{
    const auto nonce = rng_.bytes<12>();
    auto out = byte_buffer(nonce.begin(), nonce.end());
    append(out, crypto::aead_seal(seal_key(), nonce, cfg_.la.encode(), plv_key(plv)));
    return out;
}

std::optional<linkage::pre_linkage_value> linkage_authority::unseal(byte_view sealed) const
{
    if (sealed.size() < 12) return std::nullopt;
    byte_array<12> nonce{};
    std::copy_n(sealed.begin(), 12, nonce.begin());
    try {
        const auto plain = crypto::aead_open(seal_key(), nonce, cfg_.la.encode(), sealed.subspan(12));
        return decode_exact(plain, [&](reader& r) {
            linkage::pre_linkage_value plv;
            plv.value = r.array<linkage::value_size>();
            plv.index.i = r.u32();
            plv.index.j = r.u32();
            plv.owner = cfg_.la;
            return plv;
        });
    } catch (const error&) {
        return std::nullopt;
    }
}

byte_buffer linkage_authority::open_chain()
{
    const auto seed = linkage::linkage_seed::random_initial(rng_);
    const auto lci = linkage::seal_chain_id(creds_.cert.encryption_key.value(), seed, rng_);
    writer rec;
    rec.u32(cfg_.la.value);
    rec.raw(seed.value);
    store_.put(id_, "chain", chain_key(lci), rec.buffer());
    return chain_opened{cfg_.la, lci}.encode();
}

byte_buffer linkage_authority::plv_batch_for(const plv_batch_request& req)
{
    const auto key = chain_key(req.lci);
    const auto seed = linkage::seed_at(cfg_.la, chain_seed(req.lci), req.period);
    plv_batch out{cfg_.la, {}};
    out.items.reserve(req.count);
    for (std::uint32_t j = 0; j < req.count; ++j) {
        const auto plv = linkage::pre_linkage(cfg_.la, seed, j);
        writer for_pca;
        for_pca.raw(plv_key(plv));
        for_pca.u32(cfg_.la.value);
        out.items.push_back({j, crypto::hybrid_encrypt(cfg_.pca_encryption_key, for_pca.buffer(), rng_), seal(plv)});
        store_.put(id_, "plv", plv_key(plv), key);
    }
    return out.encode();
}

bool linkage_authority::link(const link_query& q)
{
    const auto a = unseal(q.sealed_a);
    const auto b = unseal(q.sealed_b);
    if (!a || !b) {
        throw refused("sealed value not issued by this LA");
    }
    const auto chain_a = store_.get(id_, "plv", plv_key(*a));
    const auto chain_b = store_.get(id_, "plv", plv_key(*b));
    if (!chain_a || !chain_b) {
        throw refused("unknown pre-linkage value");
    }
    return *chain_a == *chain_b;
}

seed_result linkage_authority::seed_for(const seed_query& q)
{
    return {cfg_.la, linkage::seed_at(cfg_.la, chain_seed(q.lci), q.period)};
}

byte_buffer linkage_authority::dispatch(const sim::envelope& e)
{
    switch (static_cast<msg>(e.type)) {
    case msg::la_open_chain:
        require_source(e, cfg_.ra);
        return open_chain();
    case msg::la_plv_batch:
        require_source(e, cfg_.ra);
        return plv_batch_for(plv_batch_request::decode(e.payload));
    case msg::la_link_query: {
        require_source(e, cfg_.ma);
        const auto req = gate_.admit(e.payload, e.src, trust_, now(), ma_op::link_query);
        return {static_cast<std::uint8_t>(link(link_query::decode(req.body)) ? 1 : 0)};
    }
    case msg::la_seed: {
        require_source(e, cfg_.ma);
        const auto req = gate_.admit(e.payload, e.src, trust_, now(), ma_op::seed);
        return seed_for(seed_query::decode(req.body)).encode();
    }
    default:
        throw refused("unsupported message");
    }
}

} // namespace scms::authorities
