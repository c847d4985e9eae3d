#include <scms/codec.hpp>
#include <scms/errors.hpp>
#include <scms/sim/bus.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>

namespace scms::sim {

byte_buffer envelope::encode() const
{
    writer w;
    w.str(src);
    w.str(dst);
    w.u16(type);
    w.var_bytes(payload);
    return std::move(w).buffer();
}

envelope envelope::decode(byte_view data)
{
    return decode_exact(data, [](reader& r) {
        envelope e;
        e.src = r.str();
        e.dst = r.str();
        e.type = r.u16();
        e.payload = r.var_bytes();
        return e;
    });
}

void bus::attach(endpoint& e, endpoint_kind kind)
{
    endpoints_[e.id()] = {&e, kind};
    if (kind == endpoint_kind::proxy) proxy_ = e.id();
}

void bus::register_device(const component_id& id)
{
    devices_[id] = true;
}

envelope bus::send(const envelope& request)
{
    envelope reply{request.dst, request.src, error_type, {}};
    const auto it = endpoints_.find(request.dst);
    if (it == endpoints_.end()) {
        const std::string why = "no such endpoint: " + request.dst;
        reply.payload.assign(why.begin(), why.end());
    } else if (devices_.count(request.src) && request.dst != proxy_) {
        const std::string why = "device traffic must pass the location obscurer proxy";
        reply.payload.assign(why.begin(), why.end());
    } else {
        try {
            reply.payload = it->second.first->handle(request);
            reply.type = static_cast<std::uint16_t>(request.type | reply_bit);
        } catch (const std::exception& e) {
            const std::string why = e.what();
            reply.payload.assign(why.begin(), why.end());
        }
    }
    trace(request, reply);
    return reply;
}

byte_buffer bus::call(const component_id& src, const component_id& dst, std::uint16_t type, byte_view payload)
{
    auto reply = send({src, dst, type, byte_buffer(payload.begin(), payload.end())});
    if (reply.type == error_type) {
        throw refused(dst + ": " + std::string(reply.payload.begin(), reply.payload.end()));
    }
    return std::move(reply.payload);
}

void bus::trace(const envelope& req, const envelope& reply)
{
    const auto digest = crypto::hash_truncated(req.payload, 8);
    const auto reply_digest = crypto::hash_truncated(reply.payload, 8);
    std::lock_guard lock(trace_mutex_);
    nlohmann::ordered_json line;
    line["seq"] = seq_++;
    line["t"] = clock_.now().str();
    line["src"] = req.src;
    line["dst"] = req.dst;
    line["type"] = namer_ ? namer_(req.type) : std::to_string(req.type);
    line["bytes"] = req.payload.size();
    line["digest"] = to_hex(digest);
    line["status"] = reply.type == error_type ? "error" : "ok";
    line["reply"] = to_hex(reply_digest);
    const auto text = line.dump() + "\n";
    if (unordered_) {
        line.erase("seq");
        line_hashes_.push_back(crypto::sha256(as_bytes(line.dump())));
    } else {
        trace_hash_.update(as_bytes(text));
    }
    if (sink_) *sink_ << text;
}

crypto::digest256 bus::trace_digest() const
{
    std::lock_guard lock(trace_mutex_);
    if (!unordered_) return trace_hash_.peek();
    auto sorted = line_hashes_;
    std::sort(sorted.begin(), sorted.end());
    crypto::sha256_hasher h;
    for (const auto& d : sorted) h.update(d);
    return h.peek();
}

std::uint64_t bus::delivered() const
{
    std::lock_guard lock(trace_mutex_);
    return seq_;
}

} // namespace scms::sim
