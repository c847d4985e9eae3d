#include <scms/butterfly.hpp>
#include <scms/crypto/serialize.hpp>
#include <scms/errors.hpp>

#include <stdexcept>

namespace scms::butterfly {

using crypto::read_element;
using crypto::read_scalar;

namespace {

void put_u32(block128& block, std::size_t offset, std::uint32_t v)
{
    for (std::size_t n = 0; n < 4; ++n) {
        block[offset + n] = static_cast<std::uint8_t>(v >> (24 - 8 * n));
    }
}

} // namespace

block128 expansion_input(key_kind kind, time_index index)
{
    block128 x{};
    put_u32(x, 0, kind == key_kind::signing ? 0x00000000u : 0xffffffffu);
    put_u32(x, 4, index.i);
    put_u32(x, 8, index.j);
    return x;
}

scalar expand(const symmetric_key& key, key_kind kind, time_index index)
{
    const auto x = expansion_input(kind, index);
    byte_array<48> concat{};
    for (std::uint64_t n = 1; n <= 3; ++n) {
        const auto out = crypto::prf_block(key, crypto::block_add(x, n));
        std::copy(out.begin(), out.end(), concat.begin() + 16 * (n - 1));
    }
    return scalar::reduce(concat);
}

void caterpillar_request::validate() const
{
    if (signing_seed.is_identity() || encryption_seed.is_identity()) {
        throw std::invalid_argument("caterpillar seed must not be the identity");
    }
}

void caterpillar_request::write(writer& w) const
{
    w.raw(signing_seed.encode());
    w.raw(signing_key.bytes());
    w.raw(encryption_seed.encode());
    w.raw(encryption_key.bytes());
}

caterpillar_request caterpillar_request::read(reader& r)
{
    caterpillar_request req;
    req.signing_seed = read_element(r);
    req.signing_key = symmetric_key(r.array<16>());
    req.encryption_seed = read_element(r);
    req.encryption_key = symmetric_key(r.array<16>());
    return req;
}

caterpillar_secrets caterpillar_secrets::generate(crypto::random_source& rng)
{
    caterpillar_secrets s;
    s.signing_private = scalar::random(rng);
    s.signing_key = symmetric_key(rng.bytes<16>());
    s.encryption_private = scalar::random(rng);
    s.encryption_key = symmetric_key(rng.bytes<16>());
    return s;
}

caterpillar_request caterpillar_secrets::request() const
{
    return {group_element::mul_base(signing_private), signing_key, group_element::mul_base(encryption_private),
            encryption_key};
}

scalar caterpillar_secrets::cocoon_private(key_kind kind, time_index index) const
{
    if (kind == key_kind::signing) {
        return signing_private + expand(signing_key, kind, index);
    }
    return encryption_private + expand(encryption_key, kind, index);
}

void caterpillar_secrets::write(writer& w) const
{
    w.raw(signing_private.encode());
    w.raw(signing_key.bytes());
    w.raw(encryption_private.encode());
    w.raw(encryption_key.bytes());
}

caterpillar_secrets caterpillar_secrets::read(reader& r)
{
    caterpillar_secrets s;
    s.signing_private = read_scalar(r);
    s.signing_key = symmetric_key(r.array<16>());
    s.encryption_private = read_scalar(r);
    s.encryption_key = symmetric_key(r.array<16>());
    return s;
}

group_element cocoon_from_expansion(const group_element& seed, const scalar& expansion)
{
    return crypto::scalar_mul_add(group_element::generator(), expansion, seed);
}

cocoon_keys cocoon_expand(const caterpillar_request& req, time_index index)
{
    return {index,
            cocoon_from_expansion(req.signing_seed, expand(req.signing_key, key_kind::signing, index)),
            cocoon_from_expansion(req.encryption_seed, expand(req.encryption_key, key_kind::encryption, index))};
}

butterfly_key butterfly_finalize(const group_element& cocoon, crypto::random_source& rng)
{
    return butterfly_finalize(cocoon, scalar::random(rng));
}

butterfly_key butterfly_finalize(const group_element& cocoon, const scalar& c)
{
    return {cocoon + group_element::mul_base(c), c};
}

scalar reconstruct_private(const scalar& seed_private, const symmetric_key& key, key_kind kind,
                           time_index index, const scalar& c)
{
    return seed_private + expand(key, kind, index) + c;
}

} // namespace scms::butterfly
