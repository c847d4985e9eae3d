#include <scms/authorities/component.hpp>

#include <sstream>

namespace scms::authorities {

authority::authority(component_id id, credentials creds, environment env, crypto::seeded_random rng) :
    id_(std::move(id)), creds_(std::move(creds)), env_(env), store_(env.db.create(id_)), rng_(std::move(rng))
{
}

byte_buffer authority::handle(const sim::envelope& request)
{
    std::lock_guard lock(mutex_);
    return dispatch(request);
}

certificate authority::cert() const
{
    std::lock_guard lock(mutex_);
    return creds_.cert;
}

void authority::set_credentials(credentials creds)
{
    std::lock_guard lock(mutex_);
    creds_ = std::move(creds);
}

void authority::set_trust(const cert::trust_store& trust)
{
    std::lock_guard lock(mutex_);
    trust_ = trust;
}

void authority::install_crl(const cert::crl& list)
{
    std::lock_guard lock(mutex_);
    crls_.install(list);
}

const scalar& authority::encryption_private() const
{
    if (!creds_.encryption_private) {
        throw std::logic_error(id_ + " has no encryption key");
    }
    return *creds_.encryption_private;
}

void authority::require_source(const sim::envelope& e, const component_id& expected) const
{
    if (e.src != expected) {
        throw refused("message type " + std::to_string(e.type) + " not accepted from " + e.src);
    }
}

// --- audit -------------------------------------------------------------------

std::string audit_entry::line() const
{
    return std::to_string(period) + "\t" + requester + "\t" + operation + "\t" + to_hex(object) + "\t" + outcome;
}

audit_entry audit_entry::parse(const std::string& line)
{
    std::istringstream in(line);
    audit_entry e;
    std::string period, object;
    if (!std::getline(in, period, '\t') || !std::getline(in, e.requester, '\t') ||
        !std::getline(in, e.operation, '\t') || !std::getline(in, object, '\t') || !std::getline(in, e.outcome)) {
        throw std::invalid_argument("malformed audit line");
    }
    e.period = static_cast<std::uint32_t>(std::stoul(period));
    e.object = array_from_hex<32>(object);
    return e;
}

void audit_log::append(const audit_entry& e)
{
    writer key;
    key.u64(ns_.count(owner_, "audit"));
    ns_.put(owner_, "audit", key.buffer(), as_bytes(e.line()));
}

std::vector<audit_entry> audit_log::entries() const
{
    std::vector<audit_entry> out;
    for (const auto& rec : ns_.scan(owner_, "audit")) {
        out.push_back(audit_entry::parse(std::string(rec.value.begin(), rec.value.end())));
    }
    return out;
}

ma_request ma_gate::admit(byte_view signed_request, const component_id& requester, const cert::trust_store& trust,
                          const sim::sim_time& now, ma_op expected)
{
    audit_entry entry{now.period, requester, std::string(to_string(expected)), crypto::sha256(signed_request), ""};
    const auto refuse = [&](const std::string& why) {
        entry.outcome = "refused:" + why;
        log_.append(entry);
        throw refused(why);
    };

    cert::signed_message msg;
    ma_request req;
    try {
        msg = cert::signed_message::decode(signed_request);
        req = ma_request::decode(msg.payload);
    } catch (const parse_error&) {
        refuse("malformed");
    }
    if (msg.signer.role != cert::authority_role::misbehavior) refuse("signer is not a misbehavior authority");
    if (trust.verify_chain(msg.signer, now.period) != cert::chain_status::ok) refuse("signer chain invalid");
    if (!cert::verify_message(msg)) refuse("bad signature");
    if (req.op != expected) refuse("operation mismatch");
    if (!seen_.insert(entry.object).second) refuse("replayed request");
    auto& used = per_day_[now.day()];
    if (used >= daily_cap_) refuse("daily quota exhausted");
    ++used;
    entry.outcome = "served";
    log_.append(entry);
    return req;
}

} // namespace scms::authorities
