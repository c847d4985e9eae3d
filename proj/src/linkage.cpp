#include <scms/linkage.hpp>
#include <scms/crypto/hash.hpp>
#include <scms/errors.hpp>

#include <stdexcept>

namespace scms::linkage {

byte_array<4> la_id::encode() const
{
    return {static_cast<std::uint8_t>(value >> 24), static_cast<std::uint8_t>(value >> 16),
            static_cast<std::uint8_t>(value >> 8), static_cast<std::uint8_t>(value)};
}

linkage_seed linkage_seed::random_initial(crypto::random_source& rng)
{
    return {rng.bytes<seed_size>(), 0};
}

linkage_seed evolve_seed(la_id la, const linkage_seed& seed)
{
    byte_array<4 + seed_size> msg{};
    const auto id = la.encode();
    std::copy(id.begin(), id.end(), msg.begin());
    std::copy(seed.value.begin(), seed.value.end(), msg.begin() + 4);
    const auto digest = crypto::sha256(msg);
    linkage_seed next;
    std::copy_n(digest.begin(), seed_size, next.value.begin());
    next.period = seed.period + 1;
    return next;
}

linkage_seed seed_at(la_id la, const linkage_seed& seed, std::uint32_t target_period)
{
    if (target_period < seed.period) {
        throw std::invalid_argument("linkage seeds cannot be evolved backwards");
    }
    auto s = seed;
    while (s.period < target_period) {
        s = evolve_seed(la, s);
    }
    return s;
}

crypto::block128 pre_linkage_input(la_id la, std::uint32_t j)
{
    crypto::block128 x{};
    const auto id = la.encode();
    std::copy(id.begin(), id.end(), x.begin());
    for (std::size_t n = 0; n < 4; ++n) {
        x[4 + n] = static_cast<std::uint8_t>(j >> (24 - 8 * n));
    }
    return x;
}

pre_linkage_value pre_linkage(la_id la, const linkage_seed& seed, std::uint32_t j)
{
    const auto out = crypto::prf_block(crypto::symmetric_key(seed.value), pre_linkage_input(la, j));
    pre_linkage_value plv;
    std::copy_n(out.begin(), value_size, plv.value.begin());
    plv.index = {seed.period, j};
    plv.owner = la;
    return plv;
}

linkage_value combine(const pre_linkage_value& p1, const pre_linkage_value& p2)
{
    if (p1.index != p2.index) {
        throw std::invalid_argument("pre-linkage values belong to different (i, j)");
    }
    if (p1.owner == p2.owner) {
        throw std::invalid_argument("pre-linkage values must come from two distinct LAs");
    }
    return {xor_arrays(p1.value, p2.value), p1.index};
}

std::vector<linkage_value> expand_revocation_entry(const revocation_entry& entry, std::uint32_t target_period)
{
    if (target_period < entry.period) {
        throw std::invalid_argument("revocation entry cannot be expanded to an earlier period");
    }
    const auto s1 = seed_at(entry.la1, {entry.seed1, entry.period}, target_period);
    const auto s2 = seed_at(entry.la2, {entry.seed2, entry.period}, target_period);
    std::vector<linkage_value> out;
    out.reserve(entry.j_max);
    for (std::uint32_t j = 0; j < entry.j_max; ++j) {
        out.push_back(combine(pre_linkage(entry.la1, s1, j), pre_linkage(entry.la2, s2, j)));
    }
    return out;
}

linkage_chain_id seal_chain_id(const crypto::group_element& la_public, const linkage_seed& initial,
                               crypto::random_source& rng)
{
    return {crypto::hybrid_encrypt(la_public, initial.value, rng)};
}

linkage_seed open_chain_id(const crypto::scalar& la_private, const linkage_chain_id& lci)
{
    const auto plain = crypto::hybrid_decrypt(la_private, lci.sealed);
    if (plain.size() != seed_size) {
        throw decryption_error();
    }
    linkage_seed seed;
    std::copy(plain.begin(), plain.end(), seed.value.begin());
    return seed;
}

} // namespace scms::linkage
