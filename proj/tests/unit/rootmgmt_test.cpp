#include <scms/errors.hpp>
#include <scms/rootmgmt/electors.hpp>
#include <scms/rootmgmt/policy.hpp>

#include <gtest/gtest.h>

using namespace scms;
using namespace scms::rootmgmt;
using scms::crypto::signature_algorithm;

namespace {

struct elector_fixture
{
    crypto::seeded_random rng{51};
    std::vector<crypto::key_pair> keys;
    std::vector<cert::certificate> electors;
    crypto::key_pair root_keys = crypto::key_pair::generate(rng);
    cert::certificate root;

    elector_fixture()
    {
        // Mixed algorithms: the electors need not share a crypto-system.
        const signature_algorithm algs[] = {signature_algorithm::ecdsa_p256_sha256,
                                            signature_algorithm::schnorr_p256_sha256,
                                            signature_algorithm::ecdsa_p256_sha256};
        for (int n = 0; n < 3; ++n) {
            keys.push_back(crypto::key_pair::generate(rng));
            electors.push_back(make_elector("elector-" + std::to_string(n), keys.back(), algs[n], {0, 100}));
        }
        root = make_root(root_keys, "root-1");
    }

    cert::certificate make_root(const crypto::key_pair& k, const std::string& name)
    {
        cert::certificate c;
        c.type = cert::cert_type::authority;
        c.role = cert::authority_role::root_ca;
        c.subject = name;
        c.verification_key = k.public_key;
        c.valid = {0, 100};
        return cert::self_sign(c, k.private_key);
    }

    action make_action(action_kind kind, const cert::certificate& obj, std::initializer_list<int> voters)
    {
        action a{kind, obj, {}};
        for (int v : voters) a.votes.push_back(cast_vote(kind, obj, electors[v], keys[v].private_key));
        return a;
    }

    ballot one(action a) { return ballot{{std::move(a)}}; }
};

TEST(Electors, QuorumIsNPlusOne)
{
    elector_fixture f;
    EXPECT_EQ(trust_state::initial(f.electors).quorum(), 2u);
    EXPECT_EQ(trust_state::initial(f.electors, 3).quorum(), 3u);
    EXPECT_THROW(trust_state::initial(f.electors, 4), std::invalid_argument);
}

TEST(Electors, TwoVotesAcceptedOneRejected)
{
    elector_fixture f;
    auto s = trust_state::initial(f.electors);
    EXPECT_EQ(s.validate(f.one(f.make_action(action_kind::endorse_root, f.root, {0}))).accepted.size(), 0u);
    EXPECT_EQ(s.validate(f.one(f.make_action(action_kind::endorse_root, f.root, {0, 1}))).accepted.size(), 1u);
}

TEST(Electors, DuplicateVotesCountOnce)
{
    elector_fixture f;
    auto s = trust_state::initial(f.electors);
    EXPECT_TRUE(s.validate(f.one(f.make_action(action_kind::endorse_root, f.root, {0, 0}))).accepted.empty());
}

TEST(Electors, ForgedVoteIgnored)
{
    elector_fixture f;
    auto s = trust_state::initial(f.electors);
    auto a = f.make_action(action_kind::endorse_root, f.root, {0, 1});
    a.votes[1].signature.value[5] ^= 1;
    EXPECT_TRUE(s.validate(f.one(a)).accepted.empty());
}

TEST(Electors, RevokedElectorVotesVoid)
{
    elector_fixture f;
    auto s = trust_state::initial(f.electors);
    s.process(f.one(f.make_action(action_kind::revoke_elector, f.electors[2], {0, 1})));
    EXPECT_FALSE(s.elector_active(f.electors[2].id()));
    EXPECT_TRUE(s.validate(f.one(f.make_action(action_kind::endorse_root, f.root, {0, 2}))).accepted.empty());
}

TEST(Electors, ValidationIsPure)
{
    elector_fixture f;
    const auto s = trust_state::initial(f.electors);
    const auto b = f.one(f.make_action(action_kind::endorse_root, f.root, {0, 1}));
    const auto before = s.encode();
    EXPECT_EQ(s.validate(b).accepted.size(), s.validate(b).accepted.size());
    EXPECT_EQ(s.encode(), before);
}

// Walks the rows of the root-management impact table with n = 1.
TEST(Electors, ImpactTableRows)
{
    elector_fixture f;
    auto s = trust_state::initial(f.electors);
    cert::trust_store ts;

    // Addition of a root: trusted immediately after quorum endorsement.
    s.process(f.one(f.make_action(action_kind::endorse_root, f.root, {0, 1, 2})));
    s.install_into(ts);
    EXPECT_TRUE(ts.is_trusted_root(f.root.id()));

    // Revocation of one elector: the remaining two still form the quorum.
    s.process(f.one(f.make_action(action_kind::revoke_elector, f.electors[0], {1, 2})));
    EXPECT_TRUE(s.root_trusted(f.root.id()));

    // Addition of a replacement elector by the remaining quorum; its votes count afterwards.
    f.keys.push_back(crypto::key_pair::generate(f.rng));
    f.electors.push_back(make_elector("elector-3", f.keys.back(), signature_algorithm::schnorr_p256_sha256, {0, 100}));
    EXPECT_EQ(s.process(f.one(f.make_action(action_kind::endorse_elector, f.electors[3], {1, 2}))).accepted.size(),
              1u);
    EXPECT_EQ(s.active_electors(), 3u);

    const auto k2 = crypto::key_pair::generate(f.rng);
    const auto root2 = f.make_root(k2, "root-2");
    EXPECT_EQ(s.process(f.one(f.make_action(action_kind::endorse_root, root2, {3, 1}))).accepted.size(), 1u);
    EXPECT_TRUE(s.root_trusted(root2.id()));

    // The new elector can endorse the existing root; with that, another single
    // revocation is tolerated (self-healing).
    s.process(f.one(f.make_action(action_kind::endorse_root, f.root, {3, 2})));
    s.process(f.one(f.make_action(action_kind::revoke_elector, f.electors[1], {2, 3})));
    EXPECT_TRUE(s.root_trusted(f.root.id()));
    EXPECT_TRUE(s.root_trusted(root2.id()) == false); // root-2 endorsers were {1, 3}; 1 is gone

    // Revocation of a root removes it from every trust store it is pushed to.
    s.process(f.one(f.make_action(action_kind::revoke_root, f.root, {2, 3})));
    s.install_into(ts);
    EXPECT_FALSE(ts.is_trusted_root(f.root.id()));
}

TEST(Electors, UnendorsedSelfSignedRootNotTrusted)
{
    elector_fixture f;
    auto s = trust_state::initial(f.electors);
    EXPECT_FALSE(s.root_trusted(f.root.id()));
    EXPECT_TRUE(s.trusted_roots().empty());
}

TEST(Electors, WrongObjectRoleRejected)
{
    elector_fixture f;
    auto s = trust_state::initial(f.electors);
    const auto v = s.validate(f.one(f.make_action(action_kind::endorse_root, f.electors[0], {0, 1})));
    EXPECT_TRUE(v.accepted.empty());
    ASSERT_EQ(v.rejected.size(), 1u);
}

TEST(Electors, BallotAndStateCodec)
{
    elector_fixture f;
    const auto b = f.one(f.make_action(action_kind::endorse_root, f.root, {0, 1}));
    const auto back = ballot::decode(b.encode());
    EXPECT_EQ(back.encode(), b.encode());
    auto s = trust_state::initial(f.electors);
    s.process(b);
    EXPECT_EQ(trust_state::decode(s.encode()).encode(), s.encode());
    auto bad = b.encode();
    bad.pop_back();
    EXPECT_THROW(ballot::decode(bad), parse_error);
}

TEST(Policy, VersionMonotonicAndTamperDetected)
{
    elector_fixture f;
    auto s = trust_state::initial(f.electors);
    s.process(f.one(f.make_action(action_kind::endorse_root, f.root, {0, 1})));
    cert::trust_store ts;
    s.install_into(ts);

    const auto pg_keys = crypto::key_pair::generate(f.rng);
    cert::certificate pg;
    pg.type = cert::cert_type::authority;
    pg.role = cert::authority_role::policy_generator;
    pg.verification_key = pg_keys.public_key;
    pg.valid = {0, 100};
    pg = cert::issue(pg, f.root, f.root_keys.private_key);
    ts.add(pg);

    global_policy gp;
    const auto v1 = pg_publish(policy_kind::global_policy, 1, gp.encode(), pg, pg_keys.private_key);
    gp.batch_size = 30;
    const auto v2 = pg_publish(policy_kind::global_policy, 2, gp.encode(), pg, pg_keys.private_key);

    policy_tracker t;
    EXPECT_EQ(t.accept(v1, ts, 0), policy_result::accepted);
    EXPECT_EQ(t.accept(v2, ts, 0), policy_result::accepted);
    EXPECT_EQ(t.accept(v1, ts, 0), policy_result::stale_version);
    EXPECT_EQ(global_policy::decode(t.current(policy_kind::global_policy)->content).batch_size, 30u);

    auto tampered = pg_publish(policy_kind::global_policy, 3, gp.encode(), pg, pg_keys.private_key);
    tampered.content[0] ^= 1;
    EXPECT_EQ(t.accept(tampered, ts, 0), policy_result::bad_signature);
    EXPECT_EQ(policy_file::decode(v2.encode()).encode(), v2.encode());

    const auto chains = encode_chain_file({f.root, pg});
    EXPECT_EQ(decode_chain_file(chains).size(), 2u);
}

} // namespace
