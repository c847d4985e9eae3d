#include <scms/crypto/serialize.hpp>
#include <scms/errors.hpp>
#include <scms/rootmgmt/electors.hpp>

#include <stdexcept>

namespace scms::rootmgmt {

namespace {

constexpr std::string_view vote_domain = "scms/elector-vote";

void write_vote(writer& w, const vote& v)
{
    w.raw(v.elector);
    crypto::write(w, v.signature);
}

vote read_vote(reader& r)
{
    vote v;
    v.elector = r.array<8>();
    v.signature = crypto::read_signature(r);
    return v;
}

} // namespace

std::string_view to_string(action_kind k)
{
    switch (k) {
    case action_kind::endorse_root: return "endorse-root";
    case action_kind::endorse_elector: return "endorse-elector";
    case action_kind::revoke_root: return "revoke-root";
    case action_kind::revoke_elector: return "revoke-elector";
    }
    return "unknown";
}

void action::write(writer& w) const
{
    w.u8(static_cast<std::uint8_t>(kind));
    w.var_bytes(object.encode());
    w.u16(static_cast<std::uint16_t>(votes.size()));
    for (const auto& v : votes) write_vote(w, v);
}

action action::read(reader& r)
{
    action a;
    const auto k = r.u8();
    if (k < 1 || k > 4) r.fail("unknown ballot action");
    a.kind = static_cast<action_kind>(k);
    const auto offset = r.offset();
    try {
        a.object = certificate::decode(r.var_bytes());
    } catch (const parse_error& e) {
        throw parse_error(offset + 4 + e.offset(), "ballot object certificate");
    }
    const auto n = r.u16();
    for (std::uint16_t i = 0; i < n; ++i) a.votes.push_back(read_vote(r));
    return a;
}

crypto::digest256 action_digest(action_kind kind, const certificate& object)
{
    crypto::sha256_hasher h;
    h.update(as_bytes(vote_domain));
    const std::uint8_t k = static_cast<std::uint8_t>(kind);
    h.update(byte_view(&k, 1));
    h.update(object.encode());
    return h.finish();
}

vote cast_vote(action_kind kind, const certificate& object, const certificate& elector,
               const crypto::scalar& elector_private)
{
    return {elector.id(), crypto::sign(elector_private, action_digest(kind, object), elector.signature.algorithm)};
}

byte_buffer ballot::encode() const
{
    writer w;
    w.u16(static_cast<std::uint16_t>(actions.size()));
    for (const auto& a : actions) a.write(w);
    return std::move(w).buffer();
}

ballot ballot::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        ballot b;
        const auto n = r.u16();
        for (std::uint16_t i = 0; i < n; ++i) b.actions.push_back(action::read(r));
        return b;
    });
}

certificate make_elector(const std::string& name, const crypto::key_pair& keys, crypto::signature_algorithm alg,
                         cert::validity valid)
{
    certificate c;
    c.type = cert::cert_type::authority;
    c.role = cert::authority_role::elector;
    c.subject = name;
    c.verification_key = keys.public_key;
    c.valid = valid;
    c.crl_series = cert::series::root_managed;
    return cert::self_sign(c, keys.private_key, alg);
}

trust_state trust_state::initial(const std::vector<certificate>& electors, std::optional<std::size_t> quorum)
{
    trust_state s;
    for (const auto& e : electors) {
        if (e.role != cert::authority_role::elector || !e.self_signed() || !cert::signed_by(e, e)) {
            throw std::invalid_argument("initial elector certificate is not a valid self-signed elector");
        }
        s.electors_[e.id()] = {e, false};
    }
    s.quorum_ = quorum.value_or(electors.size() / 2 + 1);
    if (s.quorum_ == 0 || s.quorum_ > electors.size()) {
        throw std::invalid_argument("quorum out of range");
    }
    return s;
}

std::size_t trust_state::active_electors() const
{
    std::size_t n = 0;
    for (const auto& [id, e] : electors_) n += e.revoked ? 0 : 1;
    return n;
}

bool trust_state::elector_active(const cert_id& id) const
{
    const auto it = electors_.find(id);
    return it != electors_.end() && !it->second.revoked;
}

std::optional<std::string> trust_state::check_action(const action& a, std::set<cert_id>* voters) const
{
    const auto& obj = a.object;
    const bool wants_root = a.kind == action_kind::endorse_root || a.kind == action_kind::revoke_root;
    const auto role = wants_root ? cert::authority_role::root_ca : cert::authority_role::elector;
    if (obj.type != cert::cert_type::authority || obj.role != role) return "object has the wrong role";
    if (!obj.self_signed() || !cert::signed_by(obj, obj)) return "object is not validly self-signed";

    const auto digest = action_digest(a.kind, obj);
    std::set<cert_id> valid;
    for (const auto& v : a.votes) {
        if (valid.count(v.elector)) continue; // duplicates count once
        const auto it = electors_.find(v.elector);
        if (it == electors_.end() || it->second.revoked) continue;
        if (crypto::verify(it->second.cert.verification_key, digest, v.signature)) valid.insert(v.elector);
    }
    if (valid.size() < quorum_) {
        return "quorum not reached (" + std::to_string(valid.size()) + " of " + std::to_string(quorum_) + ")";
    }
    if (voters) *voters = std::move(valid);
    return std::nullopt;
}

verdict trust_state::validate(const ballot& b) const
{
    verdict out;
    for (std::size_t i = 0; i < b.actions.size(); ++i) {
        if (auto why = check_action(b.actions[i], nullptr)) {
            out.rejected.emplace_back(i, *why);
        } else {
            out.accepted.push_back(b.actions[i]);
        }
    }
    return out;
}

void trust_state::apply(const action& a)
{
    std::set<cert_id> voters;
    if (check_action(a, &voters)) return;
    const auto id = a.object.id();
    switch (a.kind) {
    case action_kind::endorse_root: {
        auto& r = roots_[id];
        r.cert = a.object;
        r.endorsers.insert(voters.begin(), voters.end());
        break;
    }
    case action_kind::revoke_root: {
        auto& r = roots_[id];
        r.cert = a.object;
        r.revoked = true;
        break;
    }
    case action_kind::endorse_elector:
        if (!electors_.count(id)) electors_[id] = {a.object, false};
        break;
    case action_kind::revoke_elector: {
        auto& e = electors_[id];
        e.cert = a.object;
        e.revoked = true;
        break;
    }
    }
}

verdict trust_state::process(const ballot& b)
{
    verdict out;
    for (std::size_t i = 0; i < b.actions.size(); ++i) {
        if (auto why = check_action(b.actions[i], nullptr)) {
            out.rejected.emplace_back(i, *why);
        } else {
            apply(b.actions[i]);
            out.accepted.push_back(b.actions[i]);
        }
    }
    return out;
}

bool trust_state::root_trusted(const cert_id& id) const
{
    const auto it = roots_.find(id);
    if (it == roots_.end() || it->second.revoked) return false;
    std::size_t valid = 0;
    for (const auto& e : it->second.endorsers) valid += elector_active(e) ? 1 : 0;
    return valid >= quorum_;
}

std::vector<certificate> trust_state::trusted_roots() const
{
    std::vector<certificate> out;
    for (const auto& [id, r] : roots_) {
        if (root_trusted(id)) out.push_back(r.cert);
    }
    return out;
}

std::vector<certificate> trust_state::electors() const
{
    std::vector<certificate> out;
    for (const auto& [id, e] : electors_) {
        if (!e.revoked) out.push_back(e.cert);
    }
    return out;
}

void trust_state::install_into(cert::trust_store& store) const
{
    store.set_trusted_roots(trusted_roots());
}

byte_buffer trust_state::encode() const
{
    writer w;
    w.u32(static_cast<std::uint32_t>(quorum_));
    w.u32(static_cast<std::uint32_t>(electors_.size()));
    for (const auto& [id, e] : electors_) {
        w.var_bytes(e.cert.encode());
        w.boolean(e.revoked);
    }
    w.u32(static_cast<std::uint32_t>(roots_.size()));
    for (const auto& [id, r] : roots_) {
        w.var_bytes(r.cert.encode());
        w.boolean(r.revoked);
        w.u32(static_cast<std::uint32_t>(r.endorsers.size()));
        for (const auto& e : r.endorsers) w.raw(e);
    }
    return std::move(w).buffer();
}

trust_state trust_state::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        trust_state s;
        s.quorum_ = r.u32();
        const auto ne = r.u32();
        for (std::uint32_t i = 0; i < ne; ++i) {
            elector_entry e{certificate::decode(r.var_bytes()), false};
            e.revoked = r.boolean();
            s.electors_[e.cert.id()] = e;
        }
        const auto nr = r.u32();
        for (std::uint32_t i = 0; i < nr; ++i) {
            root_entry e;
            e.cert = certificate::decode(r.var_bytes());
            e.revoked = r.boolean();
            const auto n = r.u32();
            for (std::uint32_t k = 0; k < n; ++k) e.endorsers.insert(r.array<8>());
            s.roots_[e.cert.id()] = e;
        }
        return s;
    });
}

} // namespace scms::rootmgmt
