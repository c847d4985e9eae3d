#include <scms/authorities/ra.hpp>
#include <scms/crypto/hash.hpp>

#include <map>

namespace scms::authorities {

namespace {

byte_buffer batch_key(const cert_id& handle, std::uint32_t period)
{
    writer w;
    w.raw(handle);
    w.u32(period);
    return std::move(w).buffer();
}

bool is_device_enrollment(const certificate& c)
{
    return c.type == cert_type::obe_enrollment || c.type == cert_type::rse_enrollment;
}

} // namespace

byte_buffer enrollment_record::encode() const
{
    writer w;
    enrollment.write(w);
    w.boolean(blacklisted);
    w.u32(last_pickup);
    w.u32(static_cast<std::uint32_t>(chains.size()));
    for (const auto& c : chains) {
        w.str(c.la_host);
        w.u32(c.la.value);
        c.lci.write(w);
    }
    w.u32(static_cast<std::uint32_t>(grants.size()));
    for (const auto& g : grants) {
        w.u8(static_cast<std::uint8_t>(g.kind));
        g.caterpillar.write(w);
        w.u32(g.start);
        w.u32(g.end);
        w.u32(g.next);
        w.u32(g.psid);
        w.str(g.subject);
    }
    return std::move(w).buffer();
}

enrollment_record enrollment_record::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        enrollment_record rec;
        rec.enrollment = certificate::read(r);
        rec.blacklisted = r.boolean();
        rec.last_pickup = r.u32();
        const auto chains = r.u32();
        for (std::uint32_t k = 0; k < chains; ++k) {
            chain_ref c;
            c.la_host = r.str();
            c.la.value = r.u32();
            c.lci = linkage_chain_id::read(r);
            rec.chains.push_back(std::move(c));
        }
        const auto grants = r.u32();
        for (std::uint32_t k = 0; k < grants; ++k) {
            ra_grant g;
            g.kind = static_cast<cert_type>(r.u8());
            g.caterpillar = butterfly::caterpillar_request::read(r);
            g.start = r.u32();
            g.end = r.u32();
            g.next = r.u32();
            g.psid = r.u32();
            g.subject = r.str();
            rec.grants.push_back(std::move(g));
        }
        return rec;
    });
}

registration_authority::registration_authority(component_id id, credentials creds, environment env,
                                               crypto::seeded_random rng, ra_config cfg) :
    authority(std::move(id), std::move(creds), env, std::move(rng)), cfg_(std::move(cfg)),
    gate_(store_, id_, cfg_.daily_ma_cap)
{
    encryption_private();
}

void registration_authority::set_insider(std::shared_ptr<ra_insider> insider)
{
    std::lock_guard lock(mutex_);
    insider_ = std::move(insider);
}

void registration_authority::accept_recertified_eca(const cert_id& old_eca)
{
    std::lock_guard lock(mutex_);
    recertified_.insert(old_eca);
}

void registration_authority::set_daily_cap(std::uint32_t cap)
{
    std::lock_guard lock(mutex_);
    gate_.set_daily_cap(cap);
}

std::size_t registration_authority::buffered() const
{
    std::lock_guard lock(mutex_);
    return buffer_.size();
}

std::size_t registration_authority::pca_failures() const
{
    std::lock_guard lock(mutex_);
    return pca_failures_;
}

bool registration_authority::blacklisted(const cert_id& handle) const
{
    std::lock_guard lock(mutex_);
    const auto rec = load(handle);
    return rec && rec->blacklisted;
}

std::optional<enrollment_record> registration_authority::record(const cert_id& handle) const
{
    std::lock_guard lock(mutex_);
    return load(handle);
}

std::vector<cert_id> registration_authority::emitted_order() const
{
    std::lock_guard lock(mutex_);
    return emitted_;
}

std::optional<enrollment_record> registration_authority::load(const cert_id& handle) const
{
    const auto raw = store_.get(id_, "device", handle);
    if (!raw) return std::nullopt;
    return enrollment_record::decode(*raw);
}

void registration_authority::save(const cert_id& handle, const enrollment_record& rec)
{
    store_.put(id_, "device", handle, rec.encode());
}

std::optional<cert_id> registration_authority::handle_of(const certificate& enrollment) const
{
    const auto raw = store_.get(id_, "alias", enrollment.id());
    if (!raw) return std::nullopt;
    cert_id h{};
    std::copy(raw->begin(), raw->end(), h.begin());
    return h;
}

cert::signed_message registration_authority::open_device_request(byte_view sealed) const
{
    cert::signed_message m;
    try {
        m = open_signed(encryption_private(), sealed);
    } catch (const error&) {
        throw refused("request not decryptable by this RA");
    }
    if (!is_device_enrollment(m.signer)) {
        throw refused("request not signed with an enrollment certificate");
    }
    if (!cert::verify_message(m)) {
        throw refused("invalid signature");
    }
    return m;
}

void registration_authority::check_enrollment(const certificate& enrollment) const
{
    const auto status = trust_.verify_chain(enrollment, now().period, &crls_);
    if (status != cert::chain_status::ok) {
        throw refused("enrollment certificate rejected: " + std::string(cert::to_string(status)));
    }
    if (const auto h = handle_of(enrollment)) {
        if (const auto rec = load(*h); rec && rec->blacklisted) {
            throw refused("enrollment certificate blacklisted");
        }
    }
}

// --- step 2: request intake --------------------------------------------------

byte_buffer registration_authority::provision(const sim::envelope& e)
{
    const auto m = open_device_request(e.payload);
    check_enrollment(m.signer);
    const auto req = provision_request::decode(m.payload);

    const bool obe = m.signer.type == cert_type::obe_enrollment;
    const bool kind_ok = obe ? (req.kind == cert_type::obe_pseudonym || req.kind == cert_type::obe_identification)
                             : req.kind == cert_type::rse_application;
    if (!kind_ok) throw refused("certificate type not available to this device class");
    if (req.start > req.end) throw refused("empty period range");
    if (req.end - req.start + 1 > cfg_.max_span_periods) throw refused("span too long");
    if (req.end < now().period) throw refused("span lies in the past");
    try {
        req.caterpillar.validate();
    } catch (const std::invalid_argument& ex) {
        throw refused(ex.what());
    }

    const auto handle = handle_of(m.signer).value_or(m.signer.id());
    auto rec = load(handle).value_or(enrollment_record{m.signer, false, now().period, {}, {}});
    for (const auto& g : rec.grants) {
        if (g.kind == req.kind && req.start <= g.end && g.start <= req.end) {
            throw refused("duplicate request: span overlaps an accepted request");
        }
    }
    ra_grant g;
    g.kind = req.kind;
    g.caterpillar = req.caterpillar;
    g.start = req.start;
    g.end = req.end;
    g.next = std::max(req.start, now().period);
    g.psid = req.psid;
    g.subject = req.subject;
    rec.grants.push_back(std::move(g));
    rec.last_pickup = std::max(rec.last_pickup, now().period);
    save(handle, rec);
    store_.put(id_, "alias", m.signer.id(), handle);

    const auto per = req.kind == cert_type::obe_pseudonym ? cfg_.batch_size : cfg_.other_per_period;
    return provision_ack{handle, req.start, req.end, per}.encode();
}

// --- steps 2-3: expansion, pre-linkage values, shuffle ------------------------

bool registration_authority::ensure_chains(enrollment_record& rec)
{
    if (!rec.chains.empty()) return true;
    try {
        const auto c1 = chain_opened::decode(env_.bus.call(id_, cfg_.la1, tag(msg::la_open_chain), {}));
        const auto c2 = chain_opened::decode(env_.bus.call(id_, cfg_.la2, tag(msg::la_open_chain), {}));
        rec.chains = {{cfg_.la1, c1.la, c1.lci}, {cfg_.la2, c2.la, c2.lci}};
        return true;
    } catch (const refused&) {
        return false; // LA unavailable: try again on the next tick
    }
}

void registration_authority::generate(const cert_id& handle, const enrollment_record& rec, const ra_grant& g,
                                      std::uint32_t period)
{
    const bool pseudonym = g.kind == cert_type::obe_pseudonym;
    const std::uint16_t count = pseudonym ? cfg_.batch_size : cfg_.other_per_period;

    plv_batch b1, b2;
    if (pseudonym) {
        const auto& c1 = rec.chains.at(0);
        const auto& c2 = rec.chains.at(1);
        b1 = plv_batch::decode(env_.bus.call(id_, c1.la_host, tag(msg::la_plv_batch),
                                             plv_batch_request{c1.lci, period, count}.encode()));
        b2 = plv_batch::decode(env_.bus.call(id_, c2.la_host, tag(msg::la_plv_batch),
                                             plv_batch_request{c2.lci, period, count}.encode()));
        if (b1.items.size() != count || b2.items.size() != count) {
            throw refused("short pre-linkage batch");
        }
    }

    for (std::uint32_t j = 0; j < count; ++j) {
        const auto cocoon = butterfly::cocoon_expand(g.caterpillar, {period, j});
        pca_request req;
        req.kind = g.kind;
        req.index = {period, j};
        req.valid = {period, period};
        req.psid = g.psid;
        req.subject = g.subject;
        req.signing_cocoon = cocoon.signing;
        req.response_key = cocoon.encryption;
        if (g.kind == cert_type::rse_application) req.encryption_cocoon = cocoon.encryption;
        if (pseudonym) {
            req.linkage = linkage_material{b1.la, b2.la, b1.items[j].for_pca, b2.items[j].for_pca,
                                           b1.items[j].la_sealed, b2.items[j].la_sealed};
        }
        if (buffer_.empty()) buffer_open_day_ = now().day();
        buffer_.push_back({std::move(req), handle});
        if (buffer_.size() >= cfg_.shuffle_max) flush_locked();
    }
}

void registration_authority::tick()
{
    {
        std::lock_guard lock(mutex_);
        const auto p = now().period;
        for (const auto& raw : store_.scan(id_, "device")) {
            cert_id handle{};
            std::copy(raw.key.begin(), raw.key.end(), handle.begin());
            auto rec = enrollment_record::decode(raw.value);
            if (rec.blacklisted || p > rec.last_pickup + cfg_.pickup_cutoff_periods) continue;
            const auto before = rec.encode();
            const bool needs_chains = std::any_of(rec.grants.begin(), rec.grants.end(),
                                                  [](const ra_grant& g) { return g.kind == cert_type::obe_pseudonym; });
            const bool chains_ok = !needs_chains || ensure_chains(rec);
            const auto horizon = p + cfg_.lookahead_periods - 1;
            for (auto& g : rec.grants) {
                if (g.kind == cert_type::obe_pseudonym && !chains_ok) continue;
                g.next = std::max(g.next, p);
                while (g.next <= g.end && g.next <= horizon) {
                    try {
                        generate(handle, rec, g, g.next);
                    } catch (const refused&) {
                        break; // deferred, not dropped
                    }
                    ++g.next;
                }
            }
            if (rec.encode() != before) save(handle, rec);
        }
        if (!buffer_.empty() && (buffer_.size() >= cfg_.shuffle_max || now().day() >= buffer_open_day_ + cfg_.shuffle_days)) {
            flush_locked();
        }
    }
    flush_reports();
}

void registration_authority::regenerate_from(std::uint32_t period)
{
    std::lock_guard lock(mutex_);
    std::erase_if(buffer_, [&](const pending& p) { return p.request.index.i >= period; });
    for (const auto& r : store_.scan(id_, "batch")) {
        reader rd(r.key);
        rd.array<8>();
        if (rd.u32() >= period) store_.erase(id_, "batch", r.key);
    }
    for (const auto& raw : store_.scan(id_, "device")) {
        auto rec = enrollment_record::decode(raw.value);
        for (auto& g : rec.grants) g.next = std::min(g.next, std::max(g.start, period));
        store_.put(id_, "device", raw.key, rec.encode());
    }
}

void registration_authority::flush()
{
    std::lock_guard lock(mutex_);
    flush_locked();
}

void registration_authority::flush_locked()
{
    if (buffer_.empty()) return;
    crypto::shuffle(buffer_, rng_);

    std::map<byte_buffer, batch> batches;
    for (auto& item : buffer_) {
        auto req = std::move(item.request);
        if (insider_) insider_->before_pca(req);
        const auto bytes = req.encode();
        const auto hash = crypto::sha256(bytes);
        byte_buffer reply;
        try {
            reply = env_.bus.call(id_, cfg_.pca, tag(msg::pca_issue), bytes);
        } catch (const refused&) {
            ++pca_failures_;
            continue;
        }
        auto resp = pca_response::decode(reply);
        if (insider_) insider_->after_pca(req, resp);
        emitted_.push_back(item.handle);

        const auto period = req.index.i;
        const auto key = batch_key(item.handle, period);
        store_.put(id_, "request", hash, key);
        auto device_request = key;
        append(device_request, hash);
        store_.put(id_, "device_request", device_request, {});

        auto it = batches.find(key);
        if (it == batches.end()) {
            batch b{item.handle, period, {}};
            if (const auto existing = store_.get(id_, "batch", key)) b = batch::decode(*existing);
            it = batches.emplace(key, std::move(b)).first;
        }
        it->second.responses.push_back(std::move(resp));
    }
    for (const auto& [key, b] : batches) store_.put(id_, "batch", key, b.encode());
    buffer_.clear();
}

// --- step 6: download ----------------------------------------------------------

byte_buffer registration_authority::download(const sim::envelope& e)
{
    const auto m = open_device_request(e.payload);
    const auto handle = handle_of(m.signer);
    if (!handle) throw refused("unknown device");
    check_enrollment(m.signer);
    const auto req = download_request::decode(m.payload);
    auto rec = load(*handle).value();
    if (req.period > rec.last_pickup) {
        rec.last_pickup = req.period;
        save(*handle, rec);
    }
    const auto b = store_.get(id_, "batch", batch_key(*handle, req.period));
    if (!b) throw refused("batch not ready");
    return *b;
}

// --- re-establishment ------------------------------------------------------------

byte_buffer registration_authority::reenroll(const sim::envelope& e)
{
    const auto m = open_device_request(e.payload);
    const auto& old = m.signer;
    const auto handle = handle_of(old);
    if (handle) {
        if (const auto rec = load(*handle); rec && rec->blacklisted) {
            throw refused("device revoked: re-bootstrap required");
        }
    }
    if (crls_.check(old) == cert::crl_status::revoked) {
        throw refused("device revoked: re-bootstrap required");
    }
    const auto status = trust_.verify_chain(old, now().period, &crls_);
    if (status != cert::chain_status::ok && !recertified_.count(old.issuer)) {
        throw refused("enrollment certificate rejected (" + std::string(cert::to_string(status)) +
                      "): re-bootstrap required");
    }
    const auto req = reenroll_request::decode(m.payload);
    const auto fresh_bytes = env_.bus.call(id_, cfg_.eca, tag(msg::eca_reestablish),
                                           reestablish_request{old, req.new_key}.encode());
    const auto fresh = certificate::decode(fresh_bytes);
    if (handle) {
        auto rec = load(*handle).value();
        rec.enrollment = fresh;
        save(*handle, rec);
        store_.put(id_, "alias", fresh.id(), *handle);
    }
    return fresh_bytes;
}

// --- MA: revocation step 4 ---------------------------------------------------------

byte_buffer registration_authority::blacklist(const sim::envelope& e)
{
    const auto req = gate_.admit(e.payload, e.src, trust_, now(), ma_op::blacklist);
    const auto order = blacklist_order::decode(req.body);
    const auto where = store_.get(id_, "request", order.request_hash);
    if (!where) throw refused("unknown request hash");
    cert_id handle{};
    std::copy_n(where->begin(), 8, handle.begin());
    auto rec = load(handle).value();
    if (!rec.blacklisted) {
        rec.blacklisted = true;
        save(handle, rec);
        std::erase_if(buffer_, [&](const pending& p) { return p.handle == handle; });
    }

    blacklist_result out;
    if (order.mode == blacklist_mode::pseudonym) {
        out.chains = rec.chains;
    } else {
        for (const auto& r : store_.scan(id_, "device_request")) {
            if (!std::equal(handle.begin(), handle.end(), r.key.begin())) continue;
            reader rd(r.key);
            rd.array<8>();
            const auto period = rd.u32();
            if (period >= req.period) out.open_requests.push_back(rd.array<32>());
        }
    }
    return out.encode();
}

// --- reports ----------------------------------------------------------------------

void registration_authority::flush_reports()
{
    std::vector<byte_buffer> batch;
    {
        std::lock_guard lock(reports_mutex_);
        batch.swap(reports_);
    }
    if (batch.empty()) return;
    {
        std::lock_guard lock(mutex_);
        crypto::shuffle(batch, rng_);
    }
    writer w;
    w.u32(static_cast<std::uint32_t>(batch.size()));
    for (const auto& r : batch) w.var_bytes(r);
    env_.bus.call(id_, cfg_.ma, tag(msg::ma_reports), w.buffer());
}

byte_buffer registration_authority::dispatch(const sim::envelope& e)
{
    switch (static_cast<msg>(e.type)) {
    case msg::ra_provision:
        require_source(e, cfg_.lop);
        return provision(e);
    case msg::ra_download:
        require_source(e, cfg_.lop);
        return download(e);
    case msg::ra_reenroll:
        require_source(e, cfg_.lop);
        return reenroll(e);
    case msg::ra_report: {
        require_source(e, cfg_.lop);
        std::lock_guard lock(reports_mutex_);
        reports_.push_back(e.payload);
        return {};
    }
    case msg::ra_blacklist:
        require_source(e, cfg_.ma);
        return blacklist(e);
    default:
        throw refused("unsupported message");
    }
}

} // namespace scms::authorities
