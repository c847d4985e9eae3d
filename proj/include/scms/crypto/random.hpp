#pragma once

#include <scms/bytes.hpp>
#include <scms/crypto/symmetric.hpp>

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace scms::crypto {

/// Injectable randomness. Every random draw in the library goes through one of these,
/// so a seeded source makes whole scenarios replayable.
class random_source
{
public:
    virtual ~random_source() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    std::uint64_t next_u64();

    /// Uniform in [0, bound), bound > 0; rejection sampling, no modulo bias.
    std::uint64_t uniform(std::uint64_t bound);

    template <std::size_t N>
    byte_array<N> bytes()
    {
        byte_array<N> out{};
        fill(out);
        return out;
    }
};

/// Deterministic generator: AES-128 in counter mode keyed by SHA-256 of the seed material.
class seeded_random final : public random_source
{
public:
    explicit seeded_random(std::uint64_t seed);
    explicit seeded_random(byte_view seed_material);

    void fill(std::span<std::uint8_t> out) override;

    /// Independent child stream, e.g. one per component.
    seeded_random fork(std::string_view label) const;

private:
    symmetric_key key_;
    byte_array<32> material_{};
    block128 counter_{};
    block128 buffer_{};
    std::size_t available_ = 0;
};

/// Operating-system randomness (OpenSSL RAND_bytes).
class system_random final : public random_source
{
public:
    void fill(std::span<std::uint8_t> out) override;
};

/// Fisher-Yates shuffle driven by `rng`; the permutation depends only on the
/// random stream, never on the standard library implementation.
template <typename T>
void shuffle(std::vector<T>& items, random_source& rng)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace scms::crypto
