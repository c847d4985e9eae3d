#pragma once

#include <scms/bytes.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace scms::persistence {

using component_id = std::string;

struct record
{
    std::string kind;
    byte_buffer key;
    byte_buffer value;
};

/// Records owned by one component. Every call names the caller; anyone but
/// the owner gets isolation_violation.
class store_namespace
{
public:
    explicit store_namespace(component_id owner) : owner_(std::move(owner)) {}

    const component_id& owner() const { return owner_; }

    void put(const component_id& caller, const std::string& kind, byte_view key, byte_view value);
    std::optional<byte_buffer> get(const component_id& caller, const std::string& kind, byte_view key) const;
    bool erase(const component_id& caller, const std::string& kind, byte_view key);

    /// Records of one kind in key order.
    std::vector<record> scan(const component_id& caller, const std::string& kind) const;
    std::size_t count(const component_id& caller, const std::string& kind) const;

private:
    friend class database;

    void require_owner(const component_id& caller) const;

    component_id owner_;
    mutable std::mutex mutex_;
    std::map<std::string, std::map<byte_buffer, byte_buffer>> kinds_;
};

class database
{
public:
    static constexpr std::uint16_t snapshot_version = 1;

    /// Throws std::invalid_argument if the namespace already exists.
    store_namespace& create(const component_id& owner);

    /// Handle to `owner`'s namespace for `caller`; cross-component opens throw isolation_violation.
    store_namespace& open(const component_id& owner, const component_id& caller);

    std::vector<component_id> namespaces() const;

    /// Read-only pass over one namespace for post-run audits. Not reachable from components.
    void audit_scan(const component_id& owner, const std::function<void(const record&)>& fn) const;

    byte_buffer snapshot() const;
    /// Replaces all namespaces; existing store_namespace references stay valid for
    /// namespaces present in both.
    void restore(byte_view data);

    void snapshot_to(const std::filesystem::path& path) const;
    void restore_from(const std::filesystem::path& path);

private:
    mutable std::mutex mutex_;
    std::map<component_id, std::unique_ptr<store_namespace>> spaces_;
};

} // namespace scms::persistence
