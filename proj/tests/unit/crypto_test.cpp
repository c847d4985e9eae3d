#include <scms/codec.hpp>
#include <scms/crypto/group.hpp>
#include <scms/crypto/hash.hpp>
#include <scms/crypto/hybrid.hpp>
#include <scms/crypto/random.hpp>
#include <scms/crypto/signature.hpp>
#include <scms/crypto/symmetric.hpp>
#include <scms/errors.hpp>

#include <gtest/gtest.h>

#include <set>

using namespace scms;
using namespace scms::crypto;

namespace {

TEST(Hash, TruncatedAbc)
{
    EXPECT_EQ(to_hex(hash_truncated(as_bytes("abc"), 16)), "ba7816bf8f01cfea414140de5dae2223");
}

TEST(Hash, TruncationBounds)
{
    EXPECT_THROW(hash_truncated(as_bytes("x"), 0), std::invalid_argument);
    EXPECT_THROW(hash_truncated(as_bytes("x"), 33), std::invalid_argument);
    EXPECT_EQ(hash_truncated(as_bytes("x"), 32).size(), 32u);
}

TEST(Hash, IncrementalMatchesOneShot)
{
    sha256_hasher h;
    h.update(as_bytes("ab"));
    h.update(as_bytes("c"));
    EXPECT_EQ(h.finish(), sha256(as_bytes("abc")));
}

TEST(Prf, ZeroKeyZeroBlock)
{
    EXPECT_EQ(to_hex(prf_block(symmetric_key{}, block128{})), "66e94bd4ef8a2c3b884cfa59ca342b2e");
}

TEST(Prf, IsAesXorInput)
{
    seeded_random rng(1);
    for (int n = 0; n < 1000; ++n) {
        const symmetric_key k(rng.bytes<16>());
        const auto x = rng.bytes<16>();
        EXPECT_EQ(prf_block(k, x), xor_arrays(aes128_encrypt(k, x), x));
    }
}

TEST(Prf, BlockAddWraps)
{
    block128 all_ff{};
    all_ff.fill(0xff);
    EXPECT_EQ(block_add(all_ff, 1), block128{});
    block128 one{};
    one[15] = 1;
    EXPECT_EQ(block_add(block128{}, 1), one);
    block128 carry{};
    carry[7] = 1;
    block128 low{};
    std::fill(low.begin() + 8, low.end(), 0xff);
    EXPECT_EQ(block_add(low, 1), carry);
}

TEST(SymmetricKey, RejectsWrongSize)
{
    EXPECT_THROW(symmetric_key::from_bytes(byte_buffer(15)), std::invalid_argument);
}

TEST(Aead, RoundTripAndTamper)
{
    seeded_random rng(2);
    const symmetric_key k(rng.bytes<16>());
    const auto nonce = rng.bytes<12>();
    const auto msg = as_bytes("payload");
    auto ct = aead_seal(k, nonce, as_bytes("aad"), msg);
    EXPECT_EQ(aead_open(k, nonce, as_bytes("aad"), ct), byte_buffer(msg.begin(), msg.end()));
    EXPECT_THROW(aead_open(k, nonce, as_bytes("aad!"), ct), decryption_error);
    ct[0] ^= 1;
    EXPECT_THROW(aead_open(k, nonce, as_bytes("aad"), ct), decryption_error);
}

TEST(Random, SeededIsDeterministicAndForksDiffer)
{
    seeded_random a(7), b(7);
    EXPECT_EQ(a.bytes<32>(), b.bytes<32>());
    auto fa = a.fork("x");
    auto fb = b.fork("y");
    EXPECT_NE(fa.bytes<16>(), fb.bytes<16>());
}

TEST(Random, UniformInRange)
{
    seeded_random rng(3);
    std::set<std::uint64_t> seen;
    for (int n = 0; n < 2000; ++n) {
        const auto v = rng.uniform(7);
        ASSERT_LT(v, 7u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7u);
}

TEST(Random, ShuffleIsPermutation)
{
    seeded_random rng(4);
    std::vector<int> v(100);
    for (int n = 0; n < 100; ++n) v[n] = n;
    auto w = v;
    shuffle(w, rng);
    EXPECT_NE(v, w);
    std::sort(w.begin(), w.end());
    EXPECT_EQ(v, w);
}

TEST(Group, ScalarArithmetic)
{
    seeded_random rng(5);
    for (int n = 0; n < 50; ++n) {
        const auto a = scalar::random(rng);
        const auto b = scalar::random(rng);
        EXPECT_EQ(a + b - b, a);
        EXPECT_EQ(a * a.inverse(), scalar::from_u64(1));
        EXPECT_EQ((a + b) * group_element::generator(), a * group_element::generator() + b * group_element::generator());
        EXPECT_EQ(scalar::decode(a.encode()), a);
    }
    EXPECT_THROW(scalar{}.inverse(), std::domain_error);
}

TEST(Group, ReduceMatchesOrderWrap)
{
    const auto& l = group_order();
    EXPECT_TRUE(scalar::reduce(l).is_zero());
    EXPECT_THROW(scalar::decode(l), std::invalid_argument);
}

TEST(Group, ElementEncodingRoundTrip)
{
    seeded_random rng(6);
    for (int n = 0; n < 50; ++n) {
        const auto p = group_element::mul_base(scalar::random(rng));
        EXPECT_EQ(group_element::decode(p.encode()), p);
    }
    const group_element id;
    EXPECT_TRUE(id.is_identity());
    EXPECT_EQ(group_element::decode(id.encode()), id);
    const auto g = group_element::generator();
    EXPECT_TRUE((g - g).is_identity());
}

TEST(Group, DecodeRejectsOffCurve)
{
    byte_buffer bad(33, 0);
    bad[0] = 0x02;
    bad[32] = 0x01; // x = 1 gives a non-residue: no point on P-256
    EXPECT_THROW(group_element::decode(bad), std::invalid_argument);
    EXPECT_THROW(group_element::decode(byte_buffer(32, 0)), std::invalid_argument);
}

TEST(Group, MulBaseAdd)
{
    seeded_random rng(7);
    const auto a = scalar::random(rng);
    const auto b = scalar::random(rng);
    const auto p = group_element::mul_base(scalar::random(rng));
    EXPECT_EQ(group_element::mul_base_add(a, b, p), a * group_element::generator() + b * p);
}

class SignatureTest : public ::testing::TestWithParam<signature_algorithm>
{};

TEST_P(SignatureTest, SignVerifyAndMutations)
{
    seeded_random rng(8);
    const auto kp = key_pair::generate(rng);
    const auto digest = sha256(as_bytes("message"));
    const auto sig = sign(kp.private_key, digest, GetParam());
    ASSERT_TRUE(verify(kp.public_key, digest, sig));
    EXPECT_EQ(signature::decode(sig.encode()), sig);

    // Single-byte mutations of the signature must all be rejected.
    int accepted = 0;
    for (int n = 0; n < 1000; ++n) {
        auto enc = sig.encode();
        const auto pos = 1 + rng.uniform(64);
        enc[pos] ^= static_cast<std::uint8_t>(1 + rng.uniform(255));
        try {
            if (verify(kp.public_key, digest, signature::decode(enc))) ++accepted;
        } catch (const std::exception&) {
        }
    }
    EXPECT_EQ(accepted, 0);

    auto other = digest;
    other[0] ^= 1;
    EXPECT_FALSE(verify(kp.public_key, other, sig));
    EXPECT_FALSE(verify(key_pair::generate(rng).public_key, digest, sig));
}

TEST_P(SignatureTest, RandomizedVariantVerifies)
{
    seeded_random rng(9);
    const auto kp = key_pair::generate(rng);
    const auto digest = sha256(as_bytes("m"));
    const auto s1 = sign(kp.private_key, digest, rng, GetParam());
    const auto s2 = sign(kp.private_key, digest, rng, GetParam());
    EXPECT_NE(s1, s2);
    EXPECT_TRUE(verify(kp.public_key, digest, s1));
    EXPECT_TRUE(verify(kp.public_key, digest, s2));
    EXPECT_EQ(sign(kp.private_key, digest, GetParam()), sign(kp.private_key, digest, GetParam()));
}

INSTANTIATE_TEST_SUITE_P(Algorithms, SignatureTest,
                         ::testing::Values(signature_algorithm::ecdsa_p256_sha256,
                                           signature_algorithm::schnorr_p256_sha256));

TEST(Signature, AlgorithmMismatchFails)
{
    seeded_random rng(10);
    const auto kp = key_pair::generate(rng);
    const auto digest = sha256(as_bytes("m"));
    auto sig = sign(kp.private_key, digest, signature_algorithm::ecdsa_p256_sha256);
    sig.algorithm = signature_algorithm::schnorr_p256_sha256;
    EXPECT_FALSE(verify(kp.public_key, digest, sig));
}

TEST(Signature, DecodeRejectsUnknownAlgorithm)
{
    byte_buffer enc(65, 1);
    enc[0] = 9;
    EXPECT_THROW(signature::decode(enc), std::invalid_argument);
}

TEST(Hybrid, RoundTripAndWrongKey)
{
    seeded_random rng(11);
    const auto kp = key_pair::generate(rng);
    const auto msg = as_bytes("secret seed material");
    const auto ct = hybrid_encrypt(kp.public_key, msg, rng);
    EXPECT_EQ(hybrid_decrypt(kp.private_key, ct), byte_buffer(msg.begin(), msg.end()));
    EXPECT_EQ(hybrid_ciphertext::decode(ct.encode()), ct);
    EXPECT_THROW(hybrid_decrypt(key_pair::generate(rng).private_key, ct), decryption_error);
    auto bad = ct;
    bad.payload[0] ^= 1;
    EXPECT_THROW(hybrid_decrypt(kp.private_key, bad), decryption_error);
    EXPECT_THROW(hybrid_encrypt(group_element{}, msg, rng), std::invalid_argument);
}

TEST(Codec, TruncatedAndTrailingInputRejected)
{
    writer w;
    w.u32(7);
    w.var_bytes(as_bytes("abc"));
    auto buf = w.buffer();
    reader r(buf);
    EXPECT_EQ(r.u32(), 7u);
    EXPECT_EQ(r.var_bytes(), byte_buffer({'a', 'b', 'c'}));
    EXPECT_NO_THROW(r.expect_end());

    auto shorter = buf;
    shorter.pop_back();
    reader r2(shorter);
    r2.u32();
    EXPECT_THROW(r2.var_bytes(), parse_error);

    auto longer = buf;
    longer.push_back(0);
    reader r3(longer);
    r3.u32();
    r3.var_bytes();
    EXPECT_THROW(r3.expect_end(), parse_error);
}

} // namespace
