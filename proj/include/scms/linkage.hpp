#pragma once

#include <scms/butterfly.hpp>
#include <scms/codec.hpp>
#include <scms/crypto/hybrid.hpp>

#include <compare>
#include <cstdint>
#include <vector>

namespace scms::linkage {

using butterfly::time_index;

inline constexpr std::size_t seed_size = 16; // u
inline constexpr std::size_t value_size = 9; // v

/// 32-bit identity string of a Linkage Authority.
struct la_id
{
    std::uint32_t value = 0;

    byte_array<4> encode() const;
    friend auto operator<=>(const la_id&, const la_id&) = default;
};

struct linkage_seed
{
    byte_array<seed_size> value{};
    std::uint32_t period = 0;

    static linkage_seed random_initial(crypto::random_source& rng);
    friend bool operator==(const linkage_seed&, const linkage_seed&) = default;
};

struct pre_linkage_value
{
    byte_array<value_size> value{};
    time_index index;
    la_id owner;

    friend bool operator==(const pre_linkage_value&, const pre_linkage_value&) = default;
};

struct linkage_value
{
    byte_array<value_size> value{};
    time_index index;

    friend auto operator<=>(const linkage_value&, const linkage_value&) = default;
};

/// ls(i) = H_16(la_id ‖ ls(i-1)).
linkage_seed evolve_seed(la_id la, const linkage_seed& seed);

/// Forward-evolves to `target_period`; throws std::invalid_argument when target < seed.period.
linkage_seed seed_at(la_id la, const linkage_seed& seed, std::uint32_t target_period);

/// Cipher block for the pre-linkage PRF: la_id ‖ j ‖ 64 zero bits.
crypto::block128 pre_linkage_input(la_id la, std::uint32_t j);

/// plv(i, j) = leading 9 bytes of [AES_{ls(i)}(la_id ‖ j) XOR (la_id ‖ j)].
pre_linkage_value pre_linkage(la_id la, const linkage_seed& seed, std::uint32_t j);

/// lv = plv1 XOR plv2. Throws std::invalid_argument on mismatched index or identical owners.
linkage_value combine(const pre_linkage_value& p1, const pre_linkage_value& p2);

/// CRL-published data that revokes one device from `period` onwards.
struct revocation_entry
{
    la_id la1;
    la_id la2;
    std::uint32_t period = 0;
    std::uint16_t j_max = 0;
    byte_array<seed_size> seed1{};
    byte_array<seed_size> seed2{};
};

/// All j_max linkage values of the revoked device for `target_period`.
/// Throws std::invalid_argument for target_period < entry.period: seeds only run forward.
std::vector<linkage_value> expand_revocation_entry(const revocation_entry& entry, std::uint32_t target_period);

/// Linkage chain identifier: the initial seed sealed by an LA to its own key.
struct linkage_chain_id
{
    crypto::hybrid_ciphertext sealed;

    void write(writer& w) const { sealed.write(w); }
    static linkage_chain_id read(reader& r) { return {crypto::hybrid_ciphertext::read(r)}; }
    byte_buffer encode() const { return sealed.encode(); }

    friend bool operator==(const linkage_chain_id&, const linkage_chain_id&) = default;
};

linkage_chain_id seal_chain_id(const crypto::group_element& la_public, const linkage_seed& initial,
                               crypto::random_source& rng);

/// Throws decryption_error if the LCI was not issued by the holder of `la_private`.
linkage_seed open_chain_id(const crypto::scalar& la_private, const linkage_chain_id& lci);

} // namespace scms::linkage
