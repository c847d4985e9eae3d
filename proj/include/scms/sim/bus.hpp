#pragma once

#include <scms/bytes.hpp>
#include <scms/crypto/hash.hpp>
#include <scms/sim/clock.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

namespace scms::sim {

using component_id = std::string;

/// Canonical binary envelope: source, destination, type tag, payload.
struct envelope
{
    component_id src;
    component_id dst;
    std::uint16_t type = 0;
    byte_buffer payload;

    byte_buffer encode() const;
    static envelope decode(byte_view data);
};

/// Type tag of an error reply; its payload is the reason text.
inline constexpr std::uint16_t error_type = 0xffff;
/// Replies carry the request type with this bit set.
inline constexpr std::uint16_t reply_bit = 0x8000;

class endpoint
{
public:
    virtual ~endpoint() = default;
    virtual const component_id& id() const = 0;
    /// Returns the reply payload. Throwing marks the exchange as failed; the
    /// bus turns the exception into an error reply.
    virtual byte_buffer handle(const envelope& request) = 0;
};

enum class endpoint_kind : std::uint8_t { authority, proxy, device };

using type_namer = std::string (*)(std::uint16_t);

/// Synchronous in-process delivery. Device-originated traffic may only go to
/// the location-obscurer proxy; everything delivered is appended to a
/// line-delimited JSON trace whose SHA-256 is the run's trace digest.
class bus
{
public:
    explicit bus(const clock& c, type_namer namer = nullptr) : clock_(c), namer_(namer) {}

    void attach(endpoint& e, endpoint_kind kind);
    void register_device(const component_id& id); // devices are callers only
    void set_proxy(const component_id& id) { proxy_ = id; }
    const component_id& proxy() const { return proxy_; }

    /// Delivers and returns the reply envelope (possibly an error reply).
    envelope send(const envelope& request);

    /// send() that unwraps the reply and throws refused on an error reply.
    byte_buffer call(const component_id& src, const component_id& dst, std::uint16_t type, byte_view payload);

    void set_trace_sink(std::ostream* out) { sink_ = out; }
    /// With concurrent callers the delivery order is not reproducible, so the
    /// digest covers the sorted multiset of lines (without sequence numbers).
    void set_unordered_digest(bool on) { unordered_ = on; }
    crypto::digest256 trace_digest() const;
    std::uint64_t delivered() const;

private:
    void trace(const envelope& req, const envelope& reply);

    const clock& clock_;
    type_namer namer_;
    std::map<component_id, std::pair<endpoint*, endpoint_kind>> endpoints_;
    std::map<component_id, bool> devices_;
    component_id proxy_;

    mutable std::mutex trace_mutex_;
    crypto::sha256_hasher trace_hash_;
    std::uint64_t seq_ = 0;
    std::ostream* sink_ = nullptr;
    bool unordered_ = false;
    std::vector<crypto::digest256> line_hashes_;
};

} // namespace scms::sim
