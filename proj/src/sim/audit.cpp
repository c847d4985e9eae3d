#include <scms/authorities/pca.hpp>
#include <scms/sim/audit.hpp>
#include <scms/sim/world.hpp>

#include <set>

namespace scms::sim {

namespace {

std::uint64_t prefix64(const std::uint8_t* p)
{
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v = (v << 8) | p[k];
    return v;
}

using persistence::record;

std::vector<record> records_of(const persistence::database& db, const std::string& owner,
                               const std::string& kind = {})
{
    std::vector<record> out;
    db.audit_scan(owner, [&](const record& r) {
        if (kind.empty() || r.kind == kind) out.push_back(r);
    });
    return out;
}

/// Key and value of every record of `owner`, one blob each.
std::size_t scan_namespace(const persistence::database& db, const std::string& owner, const pattern_index& idx,
                           std::vector<std::string>& findings, const std::string& what,
                           const std::function<bool(const std::string&)>& allowed = {})
{
    std::size_t hits = 0;
    db.audit_scan(owner, [&](const record& r) {
        for (const auto* blob : {&r.key, &r.value}) {
            for (const auto& label : idx.find(*blob)) {
                if (allowed && allowed(label)) continue;
                ++hits;
                if (findings.size() < 20) findings.push_back(owner + "/" + r.kind + ": " + what + " " + label);
            }
        }
    });
    return hits;
}

struct la_material
{
    std::vector<std::pair<byte_array<9>, std::string>> plvs;
    std::vector<std::pair<byte_array<16>, std::string>> seeds; // label "la:<chainhash>:<period>"
};

la_material material_of(const persistence::database& db, const std::string& owner, std::uint32_t last_period)
{
    la_material m;
    for (const auto& r : records_of(db, owner, "plv")) {
        byte_array<9> v{};
        std::copy_n(r.key.begin(), 9, v.begin());
        m.plvs.emplace_back(v, owner + " plv " + to_hex(v));
    }
    for (const auto& r : records_of(db, owner, "chain")) {
        reader rd(r.value);
        const linkage::la_id la{rd.u32()};
        linkage::linkage_seed seed{rd.array<16>(), 0};
        const auto chain = to_hex(r.key);
        for (std::uint32_t p = 0; p <= last_period; ++p) {
            m.seeds.emplace_back(seed.value, owner + ":" + chain + ":" + std::to_string(p));
            seed = linkage::evolve_seed(la, seed);
        }
    }
    return m;
}

} // namespace

void pattern_index::add(byte_view pattern, std::string label)
{
    if (pattern.size() < 8) throw std::invalid_argument("patterns must be at least 8 bytes");
    by_prefix_.emplace(prefix64(pattern.data()), patterns_.size());
    patterns_.emplace_back(byte_buffer(pattern.begin(), pattern.end()), std::move(label));
}

std::vector<std::string> pattern_index::find(byte_view blob) const
{
    std::vector<std::string> out;
    if (patterns_.empty() || blob.size() < 8) return out;
    for (std::size_t pos = 0; pos + 8 <= blob.size(); ++pos) {
        const auto [lo, hi] = by_prefix_.equal_range(prefix64(blob.data() + pos));
        for (auto it = lo; it != hi; ++it) {
            const auto& [pattern, label] = patterns_[it->second];
            if (pos + pattern.size() <= blob.size() &&
                std::equal(pattern.begin(), pattern.end(), blob.begin() + static_cast<std::ptrdiff_t>(pos))) {
                out.push_back(label);
            }
        }
    }
    return out;
}

std::size_t separation_report::violations() const
{
    return ra_pseudonym_certificates + ra_pre_linkage_values + pca_enrollment_certificates + la1_foreign_material +
           la2_foreign_material + ma_unexpected_material;
}

separation_report audit_separation(world& w)
{
    const auto& db = w.db();
    const auto last = w.clk().now().period + w.config().lookahead + 1;
    separation_report rep;

    const auto la1 = material_of(db, w.la1().id(), last);
    const auto la2 = material_of(db, w.la2().id(), last);

    // RA: no plaintext pseudonym certificates, no pre-linkage values.
    pattern_index certs;
    for (const auto& r : records_of(db, w.pca().id(), "issued")) {
        const auto rec = authorities::pca_record::decode(r.value);
        if (rec.cert.type != cert::cert_type::obe_pseudonym) continue;
        certs.add(rec.cert.verification_key.encode(), "key of " + to_hex(rec.cert.id()));
        certs.add(rec.cert.id(), "id " + to_hex(rec.cert.id()));
    }
    rep.ra_pseudonym_certificates = scan_namespace(db, w.ra().id(), certs, rep.findings, "pseudonym certificate");

    pattern_index plvs;
    for (const auto* m : {&la1, &la2}) {
        for (const auto& [v, label] : m->plvs) plvs.add(v, label);
    }
    rep.ra_pre_linkage_values = scan_namespace(db, w.ra().id(), plvs, rep.findings, "pre-linkage value");

    // PCA: no enrollment certificates.
    pattern_index enrollment;
    for (const auto& r : records_of(db, w.eca().id(), "issued")) {
        const auto c = cert::certificate::decode(r.value);
        enrollment.add(c.verification_key.encode(), "key of " + to_hex(c.id()));
        enrollment.add(c.id(), "id " + to_hex(c.id()));
    }
    rep.pca_enrollment_certificates = scan_namespace(db, w.pca().id(), enrollment, rep.findings, "enrollment certificate");

    // Each LA holds nothing of the other.
    const auto foreign = [](const la_material& m) {
        pattern_index idx;
        for (const auto& [v, label] : m.plvs) idx.add(v, label);
        for (const auto& [s, label] : m.seeds) idx.add(s, label);
        return idx;
    };
    rep.la1_foreign_material = scan_namespace(db, w.la1().id(), foreign(la2), rep.findings, "LA2 material");
    rep.la2_foreign_material = scan_namespace(db, w.la2().id(), foreign(la1), rep.findings, "LA1 material");

    // MA: seeds only for chains it revoked, only at the revocation period.
    std::set<std::string> allowed;
    for (const auto& r : w.revocations()) {
        const auto handle = w.device(r.device).handle();
        if (!handle) continue;
        const auto rec = w.ra().record(*handle);
        if (!rec) continue;
        for (const auto& chain : rec->chains) {
            const auto h = crypto::sha256(chain.lci.encode());
            const auto owner = chain.la_host;
            allowed.insert(owner + ":" + to_hex(h) + ":" + std::to_string(r.period));
        }
    }
    pattern_index ma_idx;
    for (const auto* m : {&la1, &la2}) {
        for (const auto& [v, label] : m->plvs) ma_idx.add(v, label);
        for (const auto& [s, label] : m->seeds) ma_idx.add(s, label);
    }
    std::size_t expected = 0;
    rep.ma_unexpected_material = scan_namespace(db, w.ma().id(), ma_idx, rep.findings, "linkage material",
                                                 [&](const std::string& label) {
                                                     if (!allowed.count(label)) return false;
                                                     ++expected;
                                                     return true;
                                                 });
    rep.ma_revocation_seeds = expected;
    return rep;
}

reconciliation_report reconcile_audit(world& w)
{
    const auto& db = w.db();
    reconciliation_report rep;
    std::multiset<std::pair<std::string, std::string>> sent; // (destination, object hash)
    for (const auto& r : records_of(db, w.ma().id(), "audit")) {
        const auto e = authorities::audit_entry::parse(std::string(r.value.begin(), r.value.end()));
        if (e.outcome != "sent") continue;
        sent.emplace(e.requester, to_hex(e.object));
        ++rep.sent;
    }
    for (const auto& owner : {w.pca().id(), w.ra().id(), w.la1().id(), w.la2().id()}) {
        for (const auto& r : records_of(db, owner, "audit")) {
            const auto e = authorities::audit_entry::parse(std::string(r.value.begin(), r.value.end()));
            (e.outcome == "served" ? rep.served : rep.refused)++;
            const auto it = sent.find({owner, to_hex(e.object)});
            if (it == sent.end()) {
                ++rep.orphan_responses;
            } else {
                sent.erase(it);
            }
        }
    }
    rep.unanswered = sent.size();
    return rep;
}

} // namespace scms::sim
