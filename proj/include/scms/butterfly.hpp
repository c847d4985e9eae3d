#pragma once

#include <scms/codec.hpp>
#include <scms/crypto/group.hpp>
#include <scms/crypto/symmetric.hpp>

#include <compare>
#include <cstdint>

namespace scms::butterfly {

using crypto::block128;
using crypto::group_element;
using crypto::scalar;
using crypto::symmetric_key;

enum class key_kind : std::uint8_t { signing = 0, encryption = 1 };

/// Certificate slot: i is the period (week), j the index within the period.
struct time_index
{
    std::uint32_t i = 0;
    std::uint32_t j = 0;

    friend auto operator<=>(const time_index&, const time_index&) = default;
};

/// 128-bit expansion input: 32 bits of 0 (signing) or 1 (encryption) ‖ i ‖ j ‖ 32 zero bits,
/// all fields big-endian.
block128 expansion_input(key_kind kind, time_index index);

/// f_k(ι): three Davies-Meyer AES blocks on x+1, x+2, x+3 concatenated into a
/// 384-bit big-endian integer and reduced modulo the group order.
scalar expand(const symmetric_key& key, key_kind kind, time_index index);

/// What the device sends to the RA: one public seed and one expansion key per key kind.
struct caterpillar_request
{
    group_element signing_seed;     // A = aG
    symmetric_key signing_key;      // k
    group_element encryption_seed;  // H = hG
    symmetric_key encryption_key;   // k_e

    /// Throws std::invalid_argument if either seed is the identity.
    void validate() const;

    void write(writer& w) const;
    static caterpillar_request read(reader& r);
};

/// Device-side secrets behind a caterpillar_request.
struct caterpillar_secrets
{
    scalar signing_private;       // a
    symmetric_key signing_key;    // k
    scalar encryption_private;    // h
    symmetric_key encryption_key; // k_e

    static caterpillar_secrets generate(crypto::random_source& rng);
    caterpillar_request request() const;

    /// b_ι = a + f_k(ι) (signing) or h + f_e(ι) (encryption).
    scalar cocoon_private(key_kind kind, time_index index) const;

    void write(writer& w) const;
    static caterpillar_secrets read(reader& r);
};

struct cocoon_keys
{
    time_index index;
    group_element signing;    // B_ι = A + f_k(ι)G
    group_element encryption; // J_ι = H + f_e(ι)G
};

/// seed + f·G; cocoon_expand is this with f = expand(...).
group_element cocoon_from_expansion(const group_element& seed, const scalar& expansion);

/// RA side.
cocoon_keys cocoon_expand(const caterpillar_request& req, time_index index);

struct butterfly_key
{
    group_element public_key; // cocoon + cG
    scalar reconstruction;    // c
};

/// PCA side: fresh random c in [1, l-1].
butterfly_key butterfly_finalize(const group_element& cocoon, crypto::random_source& rng);

/// PCA side with an explicit reconstruction value.
butterfly_key butterfly_finalize(const group_element& cocoon, const scalar& c);

/// Device side: b' = seed_private + f(ι) + c.
scalar reconstruct_private(const scalar& seed_private, const symmetric_key& key, key_kind kind,
                           time_index index, const scalar& c);

} // namespace scms::butterfly
