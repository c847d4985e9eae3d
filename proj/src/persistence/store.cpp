#include <scms/codec.hpp>
#include <scms/errors.hpp>
#include <scms/persistence/store.hpp>

#include <fstream>
#include <iterator>

namespace scms::persistence {

namespace {

constexpr byte_array<8> snapshot_magic{'S', 'C', 'M', 'S', 'S', 'N', 'A', 'P'};

} // namespace

void store_namespace::require_owner(const component_id& caller) const
{
    if (caller != owner_) {
        throw isolation_violation(caller + " may not access the store of " + owner_);
    }
}

void store_namespace::put(const component_id& caller, const std::string& kind, byte_view key, byte_view value)
{
    require_owner(caller);
    std::lock_guard lock(mutex_);
    kinds_[kind][byte_buffer(key.begin(), key.end())] = byte_buffer(value.begin(), value.end());
}

std::optional<byte_buffer> store_namespace::get(const component_id& caller, const std::string& kind,
                                                byte_view key) const
{
    require_owner(caller);
    std::lock_guard lock(mutex_);
    const auto k = kinds_.find(kind);
    if (k == kinds_.end()) return std::nullopt;
    const auto it = k->second.find(byte_buffer(key.begin(), key.end()));
    if (it == k->second.end()) return std::nullopt;
    return it->second;
}

bool store_namespace::erase(const component_id& caller, const std::string& kind, byte_view key)
{
    require_owner(caller);
    std::lock_guard lock(mutex_);
    const auto k = kinds_.find(kind);
    return k != kinds_.end() && k->second.erase(byte_buffer(key.begin(), key.end())) > 0;
}

std::vector<record> store_namespace::scan(const component_id& caller, const std::string& kind) const
{
    require_owner(caller);
    std::lock_guard lock(mutex_);
    std::vector<record> out;
    const auto k = kinds_.find(kind);
    if (k == kinds_.end()) return out;
    out.reserve(k->second.size());
    for (const auto& [key, value] : k->second) {
        out.push_back({kind, key, value});
    }
    return out;
}

std::size_t store_namespace::count(const component_id& caller, const std::string& kind) const
{
    require_owner(caller);
    std::lock_guard lock(mutex_);
    const auto k = kinds_.find(kind);
    return k == kinds_.end() ? 0 : k->second.size();
}

store_namespace& database::create(const component_id& owner)
{
    std::lock_guard lock(mutex_);
    auto& slot = spaces_[owner];
    if (slot) {
        throw std::invalid_argument("store namespace exists: " + owner);
    }
    slot = std::make_unique<store_namespace>(owner);
    return *slot;
}

store_namespace& database::open(const component_id& owner, const component_id& caller)
{
    if (owner != caller) {
        throw isolation_violation(caller + " may not open the store of " + owner);
    }
    std::lock_guard lock(mutex_);
    const auto it = spaces_.find(owner);
    if (it == spaces_.end()) {
        throw std::invalid_argument("no store namespace " + owner);
    }
    return *it->second;
}

std::vector<component_id> database::namespaces() const
{
    std::lock_guard lock(mutex_);
    std::vector<component_id> out;
    for (const auto& [id, ns] : spaces_) out.push_back(id);
    return out;
}

void database::audit_scan(const component_id& owner, const std::function<void(const record&)>& fn) const
{
    const store_namespace* ns = nullptr;
    {
        std::lock_guard lock(mutex_);
        const auto it = spaces_.find(owner);
        if (it == spaces_.end()) return;
        ns = it->second.get();
    }
    std::lock_guard lock(ns->mutex_);
    record r;
    for (const auto& [kind, recs] : ns->kinds_) {
        r.kind = kind;
        for (const auto& [key, value] : recs) {
            r.key = key;
            r.value = value;
            fn(r);
        }
    }
}

byte_buffer database::snapshot() const
{
    std::lock_guard lock(mutex_);
    writer w;
    w.raw(snapshot_magic);
    w.u16(snapshot_version);
    w.u32(static_cast<std::uint32_t>(spaces_.size()));
    for (const auto& [owner, ns] : spaces_) {
        std::lock_guard ns_lock(ns->mutex_);
        w.str(owner);
        w.u32(static_cast<std::uint32_t>(ns->kinds_.size()));
        for (const auto& [kind, recs] : ns->kinds_) {
            w.str(kind);
            w.u32(static_cast<std::uint32_t>(recs.size()));
            for (const auto& [key, value] : recs) {
                w.var_bytes(key);
                w.var_bytes(value);
            }
        }
    }
    return std::move(w).buffer();
}

void database::restore(byte_view data)
{
    using space_map = std::map<std::string, std::map<byte_buffer, byte_buffer>>;
    auto parsed = decode_exact(data, [](reader& r) {
        if (r.array<8>() != snapshot_magic) r.fail("not a store snapshot");
        if (r.u16() != snapshot_version) r.fail("unsupported snapshot version");
        std::map<component_id, space_map> out;
        const auto n = r.u32();
        for (std::uint32_t s = 0; s < n; ++s) {
            auto& space = out[r.str()];
            const auto kinds = r.u32();
            for (std::uint32_t k = 0; k < kinds; ++k) {
                auto& recs = space[r.str()];
                const auto count = r.u32();
                for (std::uint32_t c = 0; c < count; ++c) {
                    auto key = r.var_bytes();
                    recs[std::move(key)] = r.var_bytes();
                }
            }
        }
        return out;
    });

    std::lock_guard lock(mutex_);
    for (auto it = spaces_.begin(); it != spaces_.end();) {
        it = parsed.count(it->first) ? std::next(it) : spaces_.erase(it);
    }
    for (auto& [owner, kinds] : parsed) {
        auto& slot = spaces_[owner];
        if (!slot) slot = std::make_unique<store_namespace>(owner);
        std::lock_guard ns_lock(slot->mutex_);
        slot->kinds_ = std::move(kinds);
    }
}

void database::snapshot_to(const std::filesystem::path& path) const
{
    const auto bytes = snapshot();
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw error("cannot write snapshot " + path.string());
}

void database::restore_from(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot read snapshot " + path.string());
    const byte_buffer bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    restore(bytes);
}

} // namespace scms::persistence
