#include <scms/authorities/messages.hpp>
#include <scms/ma/report.hpp>

#include <map>
#include <set>

namespace scms::ma {

byte_buffer report_body::encode() const
{
    writer w;
    w.u8(static_cast<std::uint8_t>(kind));
    reported.write(w);
    w.raw(payload_digest);
    w.u32(period);
    return std::move(w).buffer();
}

report_body report_body::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        report_body b;
        const auto offset = r.offset();
        const auto kind = r.u8();
        if (kind < 1 || kind > 2) {
            throw parse_error(offset, "unknown report kind");
        }
        b.kind = static_cast<report_kind>(kind);
        b.reported = certificate::read(r);
        b.payload_digest = r.array<32>();
        b.period = r.u32();
        return b;
    });
}

byte_buffer seal_report(const report_body& body, const certificate& reporter, const crypto::scalar& reporter_private,
                        const crypto::group_element& ma_key, crypto::random_source& rng)
{
    return authorities::seal_signed(body.encode(), reporter, reporter_private, ma_key, rng);
}

byte_buffer report_record::encode() const
{
    writer w;
    w.var_bytes(body.encode());
    w.raw(reporter);
    w.u32(received);
    return std::move(w).buffer();
}

report_record report_record::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        report_record rec;
        rec.body = report_body::decode(r.var_bytes());
        rec.reporter = r.array<8>();
        rec.received = r.u32();
        return rec;
    });
}

std::vector<linkage::linkage_value> threshold_detector::detect(const std::vector<report_record>& reports,
                                                               std::uint32_t period) const
{
    std::map<linkage::linkage_value, std::set<cert::cert_id>> reporters;
    for (const auto& rec : reports) {
        if (rec.body.kind != report_kind::misbehavior || !rec.body.reported.linkage) continue;
        if (rec.body.period > period || period - rec.body.period >= window_) continue;
        reporters[*rec.body.reported.linkage].insert(rec.reporter);
    }
    std::vector<linkage::linkage_value> out;
    for (const auto& [lv, who] : reporters) {
        if (who.size() >= threshold_) out.push_back(lv);
    }
    return out;
}

} // namespace scms::ma
