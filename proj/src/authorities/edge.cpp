#include <scms/authorities/edge.hpp>

namespace scms::authorities {

// --- LOP -------------------------------------------------------------------

byte_buffer location_obscurer::handle(const sim::envelope& request)
{
    if (request.type != tag(msg::lop_forward)) {
        throw refused("proxy only forwards");
    }
    const auto fwd = forward_request::decode(request.payload);
    if (!destinations_.count(fwd.dst)) {
        throw refused("destination not served by the proxy: " + fwd.dst);
    }
    ++forwarded_;
    return bus_.call(id_, fwd.dst, fwd.type, fwd.payload);
}

// --- repository ------------------------------------------------------------

byte_buffer repository::handle(const sim::envelope& request)
{
    std::lock_guard lock(mutex_);
    if (request.type == tag(msg::repo_fetch)) {
        const std::string name(request.payload.begin(), request.payload.end());
        const auto it = content_.find(name);
        if (it == content_.end()) {
            throw refused("nothing published under " + name);
        }
        return it->second;
    }
    if (request.type == tag(msg::repo_publish)) {
        auto pub = publication::decode(request.payload);
        const auto it = publishers_.find(pub.name);
        if (it == publishers_.end() || it->second != request.src) {
            throw refused(request.src + " may not publish " + pub.name);
        }
        content_[pub.name] = std::move(pub.content);
        return {};
    }
    throw refused("unsupported message");
}

void repository::authorise(const std::string& name, const component_id& publisher)
{
    std::lock_guard lock(mutex_);
    publishers_[name] = publisher;
}

void repository::put(const std::string& name, byte_buffer content)
{
    std::lock_guard lock(mutex_);
    content_[name] = std::move(content);
}

std::optional<byte_buffer> repository::get(const std::string& name) const
{
    std::lock_guard lock(mutex_);
    const auto it = content_.find(name);
    if (it == content_.end()) return std::nullopt;
    return it->second;
}

// --- ECA -------------------------------------------------------------------

enrollment_ca::enrollment_ca(component_id id, credentials creds, environment env, crypto::seeded_random rng,
                             eca_config cfg) :
    authority(std::move(id), std::move(creds), env, std::move(rng)), cfg_(std::move(cfg))
{
    history_.insert(creds_.cert.id());
}

void enrollment_ca::recertify(credentials fresh, const cert_id& craca)
{
    std::lock_guard lock(mutex_);
    creds_ = std::move(fresh);
    cfg_.craca = craca;
    history_.insert(creds_.cert.id());
}

std::size_t enrollment_ca::issued() const
{
    std::lock_guard lock(mutex_);
    return store_.count(id_, "issued");
}

certificate enrollment_ca::issue_enrollment(cert_type type, const std::string& subject, const group_element& key,
                                            cert::validity valid, std::uint32_t psid)
{
    if (type != cert_type::obe_enrollment && type != cert_type::rse_enrollment) {
        throw refused("ECA issues enrollment certificates only");
    }
    certificate tbs;
    tbs.type = type;
    tbs.subject = type == cert_type::rse_enrollment ? subject : std::string{};
    tbs.verification_key = key;
    tbs.valid = valid;
    tbs.psid = psid;
    tbs.craca_id = cfg_.craca;
    tbs.crl_series = cert::crl_series_table{}.for_type(type);
    auto c = cert::issue(std::move(tbs), creds_.cert, creds_.signing_private);
    const auto id = c.id();
    store_.put(id_, "issued", id, c.encode());
    return c;
}

byte_buffer enrollment_ca::dispatch(const sim::envelope& e)
{
    const auto period = now().period;
    if (e.type == tag(msg::eca_enroll)) {
        require_source(e, cfg_.dcm);
        const auto m = cert::signed_message::decode(e.payload);
        if (m.signer.role != cert::authority_role::device_config ||
            trust_.verify_chain(m.signer, period) != cert::chain_status::ok || !cert::verify_message(m)) {
            throw refused("enrollment request not signed by a valid DCM");
        }
        const auto req = enroll_request::decode(m.payload);
        return issue_enrollment(req.type, req.subject, req.verification_key, req.valid, req.psid).encode();
    }
    if (e.type == tag(msg::eca_reestablish)) {
        require_source(e, cfg_.ra);
        const auto req = reestablish_request::decode(e.payload);
        const auto& old = req.old_enrollment;
        if (!history_.count(old.issuer) || !store_.get(id_, "issued", old.id())) {
            throw refused("enrollment certificate was not issued by this ECA");
        }
        if (old.valid.end < period) {
            throw refused("enrollment certificate expired; re-bootstrap required");
        }
        return issue_enrollment(old.type, old.subject, req.new_key, {period, old.valid.end}, old.psid).encode();
    }
    throw refused("unsupported message");
}

// --- bootstrap ---------------------------------------------------------------

namespace {

void write_certs(writer& w, const std::vector<certificate>& certs)
{
    w.u32(static_cast<std::uint32_t>(certs.size()));
    for (const auto& c : certs) c.write(w);
}

std::vector<certificate> read_certs(reader& r)
{
    std::vector<certificate> out;
    const auto n = r.u32();
    for (std::uint32_t k = 0; k < n; ++k) out.push_back(certificate::read(r));
    return out;
}

} // namespace

byte_buffer bootstrap_bundle::encode() const
{
    writer w;
    enrollment.write(w);
    write_certs(w, electors);
    write_certs(w, authorities);
    w.u32(static_cast<std::uint32_t>(ballots.size()));
    for (const auto& b : ballots) w.var_bytes(b);
    w.var_bytes(gpf.encode());
    w.var_bytes(gccf.encode());
    w.str(ra);
    w.str(ma);
    w.str(repo);
    w.str(lop);
    return std::move(w).buffer();
}

bootstrap_bundle bootstrap_bundle::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        bootstrap_bundle b;
        b.enrollment = certificate::read(r);
        b.electors = read_certs(r);
        b.authorities = read_certs(r);
        const auto n = r.u32();
        for (std::uint32_t k = 0; k < n; ++k) b.ballots.push_back(r.var_bytes());
        b.gpf = rootmgmt::policy_file::decode(r.var_bytes());
        b.gccf = rootmgmt::policy_file::decode(r.var_bytes());
        b.ra = r.str();
        b.ma = r.str();
        b.repo = r.str();
        b.lop = r.str();
        return b;
    });
}

device_config_manager::device_config_manager(component_id id, credentials creds, sim::bus& bus, dcm_config cfg) :
    id_(std::move(id)), creds_(std::move(creds)), bus_(bus), cfg_(std::move(cfg))
{
}

void device_config_manager::set_template(bootstrap_bundle common)
{
    std::lock_guard lock(mutex_);
    template_ = std::move(common);
}

void device_config_manager::set_credentials(credentials creds)
{
    std::lock_guard lock(mutex_);
    creds_ = std::move(creds);
}

void device_config_manager::certify_model(const std::string& model)
{
    std::lock_guard lock(mutex_);
    cfg_.certified_models.insert(model);
}

bootstrap_bundle device_config_manager::bootstrap(const enroll_request& req)
{
    std::lock_guard lock(mutex_);
    if (!cfg_.certified_models.count(req.model)) {
        throw refused("device model not certified: " + req.model);
    }
    const auto signed_req = cert::sign_message(creds_.signing_private, creds_.cert, req.encode());
    const auto reply = bus_.call(id_, cfg_.eca, tag(msg::eca_enroll), signed_req.encode());
    auto bundle = template_;
    bundle.enrollment = certificate::decode(reply);
    return bundle;
}

} // namespace scms::authorities
