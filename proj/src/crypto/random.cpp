#include <scms/crypto/random.hpp>
#include <scms/crypto/hash.hpp>

#include <openssl/rand.h>

#include <stdexcept>

namespace scms::crypto {

std::uint64_t random_source::next_u64()
{
    byte_array<8> raw{};
    fill(raw);
    std::uint64_t v = 0;
    for (auto b : raw) {
        v = v << 8 | b;
    }
    return v;
}

std::uint64_t random_source::uniform(std::uint64_t bound)
{
    if (bound == 0) {
        throw std::invalid_argument("uniform: bound must be positive");
    }
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
        const auto v = next_u64();
        if (v < limit) {
            return v % bound;
        }
    }
}

seeded_random::seeded_random(std::uint64_t seed)
{
    byte_array<8> raw{};
    for (int i = 0; i < 8; ++i) {
        raw[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    }
    material_ = sha256(raw);
    key_ = symmetric_key::from_bytes(byte_view(material_).first(16));
}

seeded_random::seeded_random(byte_view seed_material)
{
    material_ = sha256(seed_material);
    key_ = symmetric_key::from_bytes(byte_view(material_).first(16));
}

void seeded_random::fill(std::span<std::uint8_t> out)
{
    for (auto& b : out) {
        if (available_ == 0) {
            buffer_ = aes128_encrypt(key_, counter_);
            counter_ = block_add(counter_, 1);
            available_ = buffer_.size();
        }
        b = buffer_[buffer_.size() - available_--];
    }
}

seeded_random seeded_random::fork(std::string_view label) const
{
    byte_buffer material(material_.begin(), material_.end());
    append(material, as_bytes(label));
    return seeded_random(material);
}

void system_random::fill(std::span<std::uint8_t> out)
{
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
        throw std::runtime_error("RAND_bytes failed");
    }
}

} // namespace scms::crypto
