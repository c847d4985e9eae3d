#pragma once

#include <scms/codec.hpp>
#include <scms/crypto/group.hpp>
#include <scms/crypto/signature.hpp>
#include <scms/crypto/symmetric.hpp>

namespace scms::crypto {

// Readers convert semantic decoding failures into parse_error at the field offset.
group_element read_element(reader& r);
scalar read_scalar(reader& r);
signature read_signature(reader& r);

inline void write(writer& w, const group_element& p) { w.raw(p.encode()); }
inline void write(writer& w, const scalar& s) { w.raw(s.encode()); }
inline void write(writer& w, const signature& sig) { w.raw(sig.encode()); }
inline void write(writer& w, const symmetric_key& k) { w.raw(k.bytes()); }
inline symmetric_key read_key(reader& r) { return symmetric_key(r.array<16>()); }

} // namespace scms::crypto
