#include <scms/cert/crl.hpp>
#include <scms/crypto/serialize.hpp>
#include <scms/errors.hpp>

#include <algorithm>
#include <tuple>

namespace scms::cert {

namespace {

constexpr std::uint8_t region_flag = 0x80;
constexpr std::uint8_t priority_mask = 0x03;
constexpr byte_array<8> composite_magic{'S', 'C', 'M', 'S', 'C', 'R', 'L', 'S'};

void write_tag(writer& w, const entry_tag& t)
{
    w.u8(static_cast<std::uint8_t>(static_cast<std::uint8_t>(t.priority) | (t.region ? region_flag : 0)));
    if (t.region) {
        w.u16(*t.region);
    }
}

entry_tag read_tag(reader& r)
{
    const auto b = r.u8();
    if ((b & ~(region_flag | priority_mask)) != 0 || (b & priority_mask) > 2) {
        r.fail("bad CRL entry tag");
    }
    entry_tag t;
    t.priority = static_cast<crl_priority>(b & priority_mask);
    if (b & region_flag) {
        t.region = r.u16();
    }
    return t;
}

void write_tbs(writer& w, const crl& c)
{
    w.u16(c.series);
    w.raw(c.craca_id);
    w.u32(c.issue_period);
    w.u32(c.sequence);
    w.u32(static_cast<std::uint32_t>(c.groups.size()));
    for (const auto& g : c.groups) {
        w.raw(g.la1.encode());
        w.raw(g.la2.encode());
        w.u32(g.period);
        w.u16(g.j_max);
        w.u32(static_cast<std::uint32_t>(g.entries.size()));
        for (const auto& e : g.entries) {
            w.raw(e.seed1);
            w.raw(e.seed2);
            write_tag(w, e.tag);
        }
    }
    w.u32(static_cast<std::uint32_t>(c.ids.size()));
    for (const auto& e : c.ids) {
        w.raw(e.id);
        write_tag(w, e.tag);
    }
    w.raw(c.signer);
}

} // namespace

std::string_view to_string(crl_priority p)
{
    switch (p) {
    case crl_priority::normal: return "normal";
    case crl_priority::high: return "high";
    case crl_priority::key_compromise: return "key-compromise";
    }
    return "unknown";
}

std::string_view to_string(crl_status s)
{
    switch (s) {
    case crl_status::valid: return "valid";
    case crl_status::revoked: return "revoked";
    case crl_status::no_crl: return "no-crl";
    }
    return "unknown";
}

bool crl::add(const linkage::revocation_entry& entry, entry_tag tag)
{
    const seed_pair pair{entry.seed1, entry.seed2, tag};
    for (auto& g : groups) {
        if (g.la1 == entry.la1 && g.la2 == entry.la2 && g.period == entry.period && g.j_max == entry.j_max) {
            for (const auto& e : g.entries) {
                if (e.seed1 == pair.seed1 && e.seed2 == pair.seed2) return false;
            }
            g.entries.push_back(pair);
            return true;
        }
    }
    groups.push_back({entry.la1, entry.la2, entry.period, entry.j_max, {pair}});
    return true;
}

bool crl::add(const cert_id& id, entry_tag tag)
{
    if (std::any_of(ids.begin(), ids.end(), [&](const id_entry& e) { return e.id == id; })) {
        return false;
    }
    ids.push_back({id, tag});
    return true;
}

std::size_t crl::entry_count() const
{
    std::size_t n = ids.size();
    for (const auto& g : groups) n += g.entries.size();
    return n;
}

std::vector<linkage::revocation_entry> crl::revocation_entries() const
{
    std::vector<linkage::revocation_entry> out;
    for (const auto& g : groups) {
        for (const auto& e : g.entries) {
            out.push_back({g.la1, g.la2, g.period, g.j_max, e.seed1, e.seed2});
        }
    }
    return out;
}

byte_buffer crl::to_be_signed() const
{
    writer w;
    write_tbs(w, *this);
    return std::move(w).buffer();
}

void crl::write(writer& w) const
{
    write_tbs(w, *this);
    crypto::write(w, signature);
}

crl crl::read(reader& r)
{
    crl c;
    c.series = r.u16();
    c.craca_id = r.array<8>();
    c.issue_period = r.u32();
    c.sequence = r.u32();
    const auto ngroups = r.u32();
    for (std::uint32_t n = 0; n < ngroups; ++n) {
        linkage_group g;
        g.la1.value = r.u32();
        g.la2.value = r.u32();
        g.period = r.u32();
        g.j_max = r.u16();
        const auto count = r.u32();
        if (count > r.remaining() / 33) {
            r.fail("linkage group count exceeds input");
        }
        g.entries.reserve(count);
        for (std::uint32_t k = 0; k < count; ++k) {
            seed_pair e;
            e.seed1 = r.array<linkage::seed_size>();
            e.seed2 = r.array<linkage::seed_size>();
            e.tag = read_tag(r);
            g.entries.push_back(e);
        }
        c.groups.push_back(std::move(g));
    }
    const auto nids = r.u32();
    if (nids > r.remaining() / 9) {
        r.fail("id entry count exceeds input");
    }
    for (std::uint32_t n = 0; n < nids; ++n) {
        id_entry e;
        e.id = r.array<8>();
        e.tag = read_tag(r);
        c.ids.push_back(e);
    }
    c.signer = r.array<8>();
    c.signature = crypto::read_signature(r);
    return c;
}

byte_buffer crl::encode() const
{
    writer w;
    write(w);
    return std::move(w).buffer();
}

crl crl::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) { return crl::read(r); });
}

void sign_crl(crl& list, const certificate& generator, const scalar& generator_private)
{
    list.signer = generator.id();
    list.signature = crypto::sign(generator_private, crypto::sha256(list.to_be_signed()));
}

bool crl_signed_by(const crl& list, const certificate& generator)
{
    if (generator.role != authority_role::crl_generator || list.signer != generator.id()) return false;
    if (std::find(generator.crl_permissions.begin(), generator.crl_permissions.end(), list.series) ==
        generator.crl_permissions.end()) {
        return false;
    }
    if (generator.issuer != list.craca_id) return false;
    return crypto::verify(generator.verification_key, crypto::sha256(list.to_be_signed()), list.signature);
}

byte_buffer encode_composite(const std::vector<crl>& lists)
{
    writer w;
    w.raw(composite_magic);
    w.u32(static_cast<std::uint32_t>(lists.size()));
    for (const auto& c : lists) {
        w.var_bytes(c.encode());
    }
    return std::move(w).buffer();
}

std::vector<crl> decode_composite(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        if (r.array<8>() != composite_magic) {
            r.fail("not a CRL composite file");
        }
        const auto n = r.u32();
        std::vector<crl> out;
        for (std::uint32_t k = 0; k < n; ++k) {
            const auto offset = r.offset();
            const auto bytes = r.var_bytes();
            try {
                out.push_back(crl::decode(bytes));
            } catch (const parse_error& e) {
                throw parse_error(offset + 4 + e.offset(), "embedded CRL");
            }
        }
        return out;
    });
}

crl_store::crl_store(const crl_store& other) :
    capacity_(other.capacity_), evicted_(other.evicted_), lists_(other.lists_)
{
}

crl_store& crl_store::operator=(const crl_store& other)
{
    if (this != &other) {
        capacity_ = other.capacity_;
        evicted_ = other.evicted_;
        lists_ = other.lists_;
        std::lock_guard lock(cache_mutex_);
        cache_.clear();
    }
    return *this;
}

bool crl_store::install(const crl& list)
{
    const key k{list.craca_id, list.series};
    const auto it = lists_.find(k);
    if (it != lists_.end() && it->second.sequence >= list.sequence) {
        return false;
    }
    lists_[k] = list;
    enforce_capacity();
    std::lock_guard lock(cache_mutex_);
    cache_.clear();
    return true;
}

void crl_store::enforce_capacity()
{
    const auto total = entry_count();
    if (total <= capacity_) return;
    auto excess = total - capacity_;
    evicted_ += excess;

    // Walk priorities upwards, dropping the earliest-listed entries first.
    for (std::uint8_t p = 0; p <= 2 && excess > 0; ++p) {
        const auto prio = static_cast<crl_priority>(p);
        for (auto& [k, list] : lists_) {
            for (auto& g : list.groups) {
                auto& v = g.entries;
                for (auto e = v.begin(); e != v.end() && excess > 0;) {
                    if (e->tag.priority == prio) {
                        e = v.erase(e);
                        --excess;
                    } else {
                        ++e;
                    }
                }
            }
            std::erase_if(list.groups, [](const linkage_group& g) { return g.entries.empty(); });
            for (auto e = list.ids.begin(); e != list.ids.end() && excess > 0;) {
                if (e->tag.priority == prio) {
                    e = list.ids.erase(e);
                    --excess;
                } else {
                    ++e;
                }
            }
        }
    }
}

const crl_store::value_set& crl_store::revoked_values(const crl& list, std::uint32_t period) const
{
    const auto k = std::make_tuple(list.craca_id, list.series, list.sequence, period);
    std::lock_guard lock(cache_mutex_);
    const auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    value_set values;
    for (const auto& entry : list.revocation_entries()) {
        if (entry.period > period) continue; // revoked later than this certificate's period
        for (const auto& lv : linkage::expand_revocation_entry(entry, period)) {
            values.insert(lv.value);
        }
    }
    return cache_.emplace(k, std::move(values)).first->second;
}

crl_status crl_store::check(const certificate& c) const
{
    const auto* list = latest(c.craca_id, c.crl_series);
    if (!list) return crl_status::no_crl;
    if (c.linkage) {
        const auto& values = revoked_values(*list, c.linkage->index.i);
        return values.count(c.linkage->value) ? crl_status::revoked : crl_status::valid;
    }
    const auto id = c.id();
    for (const auto& e : list->ids) {
        if (e.id == id) return crl_status::revoked;
    }
    return crl_status::valid;
}

const crl* crl_store::latest(const cert_id& craca, std::uint16_t series) const
{
    const auto it = lists_.find({craca, series});
    return it == lists_.end() ? nullptr : &it->second;
}

std::vector<crl> crl_store::lists() const
{
    std::vector<crl> out;
    for (const auto& [k, v] : lists_) out.push_back(v);
    return out;
}

std::size_t crl_store::entry_count() const
{
    std::size_t n = 0;
    for (const auto& [k, v] : lists_) n += v.entry_count();
    return n;
}

byte_buffer crl_store::encode() const
{
    return encode_composite(lists());
}

crl_store crl_store::decode(byte_view data, std::size_t capacity)
{
    crl_store s(capacity);
    for (const auto& c : decode_composite(data)) {
        s.lists_[{c.craca_id, c.series}] = c;
    }
    s.enforce_capacity();
    return s;
}

} // namespace scms::cert
