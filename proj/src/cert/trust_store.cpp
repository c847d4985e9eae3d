#include <scms/cert/trust_store.hpp>
#include <scms/errors.hpp>

namespace scms::cert {

std::string_view to_string(chain_status s)
{
    switch (s) {
    case chain_status::ok: return "ok";
    case chain_status::unknown_issuer: return "unknown-issuer";
    case chain_status::invalid_issuer: return "invalid-issuer";
    case chain_status::bad_signature: return "bad-signature";
    case chain_status::expired: return "expired";
    case chain_status::untrusted_root: return "untrusted-root";
    case chain_status::revoked: return "revoked";
    case chain_status::profile_violation: return "profile-violation";
    case chain_status::too_long: return "chain-too-long";
    }
    return "unknown";
}

bool is_ca_role(authority_role r)
{
    return r == authority_role::root_ca || r == authority_role::intermediate_ca ||
           r == authority_role::enrollment_ca || r == authority_role::pseudonym_ca;
}

trust_store::trust_store(const trust_store& other) : certs_(other.certs_), roots_(other.roots_) {}

trust_store& trust_store::operator=(const trust_store& other)
{
    if (this != &other) {
        certs_ = other.certs_;
        roots_ = other.roots_;
        std::lock_guard lock(cache_mutex_);
        verified_.clear();
    }
    return *this;
}

void trust_store::add(const certificate& c)
{
    certs_[c.id()] = c;
}

void trust_store::set_trusted_roots(const std::vector<certificate>& roots)
{
    roots_.clear();
    for (const auto& r : roots) {
        add(r);
        roots_.insert(r.id());
    }
}

const certificate* trust_store::find(const cert_id& id) const
{
    const auto it = certs_.find(id);
    return it == certs_.end() ? nullptr : &it->second;
}

std::vector<certificate> trust_store::all() const
{
    std::vector<certificate> out;
    for (const auto& [id, c] : certs_) out.push_back(c);
    return out;
}

bool trust_store::signature_ok(const certificate& subject, const certificate& issuer) const
{
    const auto key = std::make_pair(subject.digest(), issuer.id());
    {
        std::lock_guard lock(cache_mutex_);
        if (verified_.count(key)) return true;
    }
    if (!signed_by(subject, issuer)) return false;
    std::lock_guard lock(cache_mutex_);
    verified_.insert(key);
    return true;
}

chain_status trust_store::verify_chain(const certificate& c, std::uint32_t period, const crl_store* crls) const
{
    const certificate* cur = &c;
    for (int depth = 0; depth < max_depth; ++depth) {
        try {
            cur->check_profile();
        } catch (const profile_error&) {
            return chain_status::profile_violation;
        }
        if (!cur->valid.covers(period)) return chain_status::expired;
        if (crls && crls->check(*cur) == crl_status::revoked) return chain_status::revoked;

        if (cur->self_signed()) {
            if (!is_trusted_root(cur->id())) return chain_status::untrusted_root;
            return signature_ok(*cur, *cur) ? chain_status::ok : chain_status::bad_signature;
        }
        const auto* issuer = find(cur->issuer);
        if (!issuer) return chain_status::unknown_issuer;
        if (issuer->type != cert_type::authority || !is_ca_role(issuer->role)) return chain_status::invalid_issuer;
        if (!signature_ok(*cur, *issuer)) return chain_status::bad_signature;
        cur = issuer;
    }
    return chain_status::too_long;
}

bool trust_store::verify_crl(const crl& list, std::uint32_t period) const
{
    const auto* gen = find(list.signer);
    if (!gen) return false;
    if (verify_chain(*gen, period) != chain_status::ok) return false;
    return crl_signed_by(list, *gen);
}

} // namespace scms::cert
