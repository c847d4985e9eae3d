#include <scms/butterfly.hpp>
#include <scms/crypto/random.hpp>

#include <gtest/gtest.h>

#include <set>

using namespace scms;
using namespace scms::butterfly;

namespace {

TEST(Butterfly, ExpansionInputLayout)
{
    const auto s = expansion_input(key_kind::signing, {1, 2});
    EXPECT_EQ(to_hex(s), "00000000000000010000000200000000");
    const auto e = expansion_input(key_kind::encryption, {1, 2});
    EXPECT_EQ(to_hex(e), "ffffffff000000010000000200000000");
}

TEST(Butterfly, ZeroKeyExpansion)
{
    const auto f = expand(symmetric_key{}, key_kind::signing, {0, 0});
    EXPECT_EQ(to_hex(f.encode()), "6c5b0b26d7c88e7fb05c43676322b52f37cfc498039ea0d37cc5229f7075b610");
}

TEST(Butterfly, KindsAndIndicesSeparate)
{
    const symmetric_key k{};
    std::set<byte_array<32>> seen;
    for (auto kind : {key_kind::signing, key_kind::encryption}) {
        for (std::uint32_t i = 0; i < 5; ++i) {
            for (std::uint32_t j = 0; j < 5; ++j) {
                seen.insert(expand(k, kind, {i, j}).encode());
            }
        }
    }
    EXPECT_EQ(seen.size(), 50u);
}

// For every (i, j) the device's reconstructed private key matches the public
// key the PCA certified, for both key kinds.
TEST(Butterfly, ReconstructionIdentity)
{
    crypto::seeded_random rng(21);
    int failures = 0;
    for (int n = 0; n < 1000; ++n) {
        const auto secrets = caterpillar_secrets::generate(rng);
        const auto req = secrets.request();
        const time_index idx{static_cast<std::uint32_t>(rng.uniform(1u << 20)),
                             static_cast<std::uint32_t>(rng.uniform(64))};
        const auto cocoon = cocoon_expand(req, idx);
        const auto bk = butterfly_finalize(cocoon.signing, rng);
        const auto priv = reconstruct_private(secrets.signing_private, secrets.signing_key, key_kind::signing, idx,
                                              bk.reconstruction);
        if (group_element::mul_base(priv) != bk.public_key) ++failures;

        const auto ek = butterfly_finalize(cocoon.encryption, rng);
        const auto epriv = reconstruct_private(secrets.encryption_private, secrets.encryption_key,
                                               key_kind::encryption, idx, ek.reconstruction);
        if (group_element::mul_base(epriv) != ek.public_key) ++failures;
        if (group_element::mul_base(secrets.cocoon_private(key_kind::signing, idx)) != cocoon.signing) ++failures;
    }
    EXPECT_EQ(failures, 0);
}

// Without c the PCA output cannot be matched to the cocoon: the finalized key
// equals the cocoon only with negligible probability, and distinct draws of c
// yield distinct keys.
TEST(Butterfly, FinalizedKeysUnlinkableToCocoon)
{
    crypto::seeded_random rng(22);
    const auto secrets = caterpillar_secrets::generate(rng);
    const auto req = secrets.request();
    std::set<byte_array<33>> cocoons, finals;
    int matches = 0;
    for (std::uint32_t j = 0; j < 200; ++j) {
        const auto c = cocoon_expand(req, {0, j});
        cocoons.insert(c.signing.encode());
        finals.insert(butterfly_finalize(c.signing, rng).public_key.encode());
    }
    for (const auto& f : finals) matches += static_cast<int>(cocoons.count(f));
    EXPECT_EQ(matches, 0);
    EXPECT_EQ(finals.size(), 200u);
}

TEST(Butterfly, RequestValidationAndCodec)
{
    crypto::seeded_random rng(23);
    const auto req = caterpillar_secrets::generate(rng).request();
    EXPECT_NO_THROW(req.validate());
    writer w;
    req.write(w);
    reader r(w.buffer());
    const auto back = caterpillar_request::read(r);
    EXPECT_EQ(back.signing_seed, req.signing_seed);
    EXPECT_EQ(back.encryption_key.bytes(), req.encryption_key.bytes());

    auto bad = req;
    bad.signing_seed = group_element{};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Butterfly, SecretsCodec)
{
    crypto::seeded_random rng(24);
    const auto s = caterpillar_secrets::generate(rng);
    writer w;
    s.write(w);
    reader r(w.buffer());
    const auto back = caterpillar_secrets::read(r);
    EXPECT_EQ(back.signing_private, s.signing_private);
    EXPECT_EQ(back.encryption_private, s.encryption_private);
}

} // namespace
