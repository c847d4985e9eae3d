#include <scms/crypto/serialize.hpp>
#include <scms/rootmgmt/policy.hpp>

namespace scms::rootmgmt {

std::string_view to_string(policy_kind k)
{
    return k == policy_kind::global_policy ? "gpf" : "gccf";
}

std::string_view to_string(policy_result r)
{
    switch (r) {
    case policy_result::accepted: return "accepted";
    case policy_result::stale_version: return "stale-version";
    case policy_result::bad_signature: return "bad-signature";
    case policy_result::untrusted_signer: return "untrusted-signer";
    }
    return "unknown";
}

byte_buffer policy_file::to_be_signed() const
{
    writer w;
    w.u8(static_cast<std::uint8_t>(kind));
    w.u32(version);
    w.var_bytes(content);
    w.raw(signer);
    return std::move(w).buffer();
}

byte_buffer policy_file::encode() const
{
    auto out = to_be_signed();
    append(out, signature.encode());
    return out;
}

policy_file policy_file::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        policy_file f;
        const auto k = r.u8();
        if (k < 1 || k > 2) r.fail("unknown policy file kind");
        f.kind = static_cast<policy_kind>(k);
        f.version = r.u32();
        f.content = r.var_bytes();
        f.signer = r.array<8>();
        f.signature = crypto::read_signature(r);
        return f;
    });
}

byte_buffer global_policy::encode() const
{
    writer w;
    w.u32(batch_size);
    w.u32(rotation_minutes);
    w.u32(crl_capacity);
    w.u32(lookahead_periods);
    return std::move(w).buffer();
}

global_policy global_policy::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        global_policy p;
        p.batch_size = r.u32();
        p.rotation_minutes = r.u32();
        p.crl_capacity = r.u32();
        p.lookahead_periods = r.u32();
        return p;
    });
}

byte_buffer encode_chain_file(const std::vector<cert::certificate>& certs)
{
    writer w;
    w.u32(static_cast<std::uint32_t>(certs.size()));
    for (const auto& c : certs) w.var_bytes(c.encode());
    return std::move(w).buffer();
}

std::vector<cert::certificate> decode_chain_file(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        std::vector<cert::certificate> out;
        const auto n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) out.push_back(cert::certificate::decode(r.var_bytes()));
        return out;
    });
}

policy_file pg_publish(policy_kind kind, std::uint32_t version, byte_view content, const cert::certificate& pg,
                       const crypto::scalar& pg_private)
{
    policy_file f{kind, version, byte_buffer(content.begin(), content.end()), pg.id(), {}};
    f.signature = crypto::sign(pg_private, crypto::sha256(f.to_be_signed()));
    return f;
}

policy_result policy_tracker::accept(const policy_file& f, const cert::trust_store& trust, std::uint32_t period)
{
    const auto* pg = trust.find(f.signer);
    if (!pg || pg->role != cert::authority_role::policy_generator ||
        trust.verify_chain(*pg, period) != cert::chain_status::ok) {
        return policy_result::untrusted_signer;
    }
    if (!crypto::verify(pg->verification_key, crypto::sha256(f.to_be_signed()), f.signature)) {
        return policy_result::bad_signature;
    }
    if (f.version <= version(f.kind)) return policy_result::stale_version;
    files_[f.kind] = f;
    return policy_result::accepted;
}

void policy_tracker::adopt(policy_file f)
{
    const auto kind = f.kind;
    files_[kind] = std::move(f);
}

std::uint32_t policy_tracker::version(policy_kind k) const
{
    const auto it = files_.find(k);
    return it == files_.end() ? 0 : it->second.version;
}

const policy_file* policy_tracker::current(policy_kind k) const
{
    const auto it = files_.find(k);
    return it == files_.end() ? nullptr : &it->second;
}

} // namespace scms::rootmgmt
