#include "world_fixture.hpp"

#include <scms/ma/report.hpp>
#include <scms/sim/audit.hpp>

#include <gtest/gtest.h>

using namespace scms;
using scms::refused;

namespace {

ma::report_record report(const linkage::linkage_value& lv, std::uint8_t reporter, std::uint32_t period)
{
    ma::report_record r;
    r.body.reported.linkage = lv;
    r.reporter[0] = reporter;
    r.received = period;
    return r;
}

linkage::linkage_value lv_with(std::uint8_t tag)
{
    linkage::linkage_value lv;
    lv.value[0] = tag;
    return lv;
}

sim::scenario_event misbehave(std::size_t device, std::size_t reporters, std::uint32_t period)
{
    sim::scenario_event e;
    e.period = period;
    e.type = "misbehave";
    e.device = device;
    e.reporters = reporters;
    return e;
}

bool contains(byte_view hay, byte_view needle)
{
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

bool ma_store_contains(sim::world& w, byte_view needle)
{
    bool found = false;
    w.db().audit_scan("ma", [&](const persistence::record& r) {
        found = found || contains(r.key, needle) || contains(r.value, needle);
    });
    return found;
}

} // namespace

// --- detector -------------------------------------------------------------------------

TEST(Detector, NoReportsNothingFlagged)
{
    ma::threshold_detector d(3, 1);
    EXPECT_TRUE(d.detect({}, 0).empty());
}

TEST(Detector, ThreeDistinctReportersFlag)
{
    ma::threshold_detector d(3, 1);
    const auto lv = lv_with(1);
    const auto flagged = d.detect({report(lv, 1, 0), report(lv, 2, 0), report(lv, 3, 0)}, 0);
    ASSERT_EQ(flagged.size(), 1u);
    EXPECT_EQ(flagged.front(), lv);
}

TEST(Detector, TwoReportersBelowThreshold)
{
    ma::threshold_detector d(3, 1);
    const auto lv = lv_with(1);
    EXPECT_TRUE(d.detect({report(lv, 1, 0), report(lv, 2, 0)}, 0).empty());
}

TEST(Detector, RepeatedReporterCountsOnce)
{
    ma::threshold_detector d(3, 1);
    const auto lv = lv_with(1);
    EXPECT_TRUE(d.detect({report(lv, 1, 0), report(lv, 1, 0), report(lv, 2, 0)}, 0).empty());
}

TEST(Detector, ReportsOutsideTheWindowExpire)
{
    const auto lv = lv_with(1);
    const std::vector<ma::report_record> reports{report(lv, 1, 0), report(lv, 2, 1), report(lv, 3, 2)};
    EXPECT_TRUE(ma::threshold_detector(3, 1).detect(reports, 2).empty());
    EXPECT_EQ(ma::threshold_detector(3, 3).detect(reports, 2).size(), 1u);
}

// --- reports ----------------------------------------------------------------------------

TEST(Reports, OnlyTheMaCanOpenThem)
{
    auto w = provisioned_world(small_scenario(2, 2, 1));
    const auto& k = w->keys();
    crypto::seeded_random rng(3);
    const auto reporter = w->device(0).certificates_for(0).front();
    ma::report_body body;
    body.reported = w->device(1).certificates_for(0).front();
    const auto sealed = ma::seal_report(body, reporter, w->device(0).certificates().at(0).front().signing_private,
                                        k.ma.cert.encryption_key.value(), rng);
    EXPECT_NO_THROW(authorities::open_signed(*k.ma.encryption_private, sealed));
    EXPECT_ANY_THROW(authorities::open_signed(*k.ra.encryption_private, sealed));
}

TEST(Reports, CarryThePseudonymAndReachTheMaThroughTheRa)
{
    auto w = provisioned_world(small_scenario(6, 3, 2));
    w->run_event(misbehave(0, 3, 0));
    const auto records = w->ma().reports();
    ASSERT_EQ(records.size(), 3u);
    std::set<cert::cert_id> pseudonyms, enrollments;
    for (std::size_t k = 0; k < w->device_count(); ++k) {
        for (const auto& c : w->device(k).certificates_for(0)) pseudonyms.insert(c.id());
        enrollments.insert(w->device(k).enrollment().id());
    }
    for (const auto& r : records) {
        EXPECT_EQ(pseudonyms.count(r.reporter), 1u);
        EXPECT_EQ(enrollments.count(r.reporter), 0u);
        EXPECT_EQ(r.body.kind, ma::report_kind::misbehavior);
    }
    // The RA relayed ciphertext: none of the reporters' certificates sit in its store.
    EXPECT_EQ(sim::audit_separation(*w).ra_pseudonym_certificates, 0u);
}

// --- investigation ------------------------------------------------------------------------

TEST(Investigation, SameDeviceOnlyForCertificatesOfOneDevice)
{
    auto w = provisioned_world(small_scenario(3, 3, 2));
    const auto a = w->device(0).certificates_for(0);
    const auto b = w->device(0).certificates_for(1);
    const auto c = w->device(1).certificates_for(0);
    EXPECT_TRUE(w->ma().same_device(*a[0].linkage, *a[2].linkage));
    EXPECT_TRUE(w->ma().same_device(*a[1].linkage, *b[0].linkage));
    EXPECT_FALSE(w->ma().same_device(*a[0].linkage, *c[0].linkage));
}

TEST(Investigation, GroupsFlaggedValuesByDevice)
{
    auto w = provisioned_world(small_scenario(3, 3, 1));
    const auto a = w->device(0).certificates_for(0);
    const auto c = w->device(2).certificates_for(0);
    const auto groups = w->ma().investigate({*a[0].linkage, *c[1].linkage, *a[2].linkage});
    ASSERT_EQ(groups.size(), 2u);
    std::vector<std::size_t> sizes{groups[0].size(), groups[1].size()};
    std::sort(sizes.begin(), sizes.end());
    EXPECT_EQ(sizes, (std::vector<std::size_t>{1, 2}));
}

TEST(Investigation, UnsignedOrWrongRoleQueriesAreRefusedAndAudited)
{
    auto w = provisioned_world(small_scenario(2, 2, 1));
    const auto garbage = byte_buffer{1, 2, 3};
    EXPECT_THROW(w->net().call("ma", "pca", authorities::tag(authorities::msg::pca_lookup), garbage), refused);

    // Well-formed and signed, but by the RA rather than the MA.
    authorities::ma_request req{authorities::ma_op::lookup, 0, 1, {}};
    const auto& ra = w->keys().ra;
    const auto signed_req = cert::sign_message(ra.signing_private, ra.cert, req.encode()).encode();
    EXPECT_THROW(w->net().call("ma", "pca", authorities::tag(authorities::msg::pca_lookup), signed_req), refused);

    const auto log = w->pca().gate().log().entries();
    ASSERT_EQ(log.size(), 2u);
    for (const auto& e : log) EXPECT_EQ(e.outcome.rfind("refused:", 0), 0u) << e.outcome;
}

TEST(Investigation, DailyCapRefusesExcessQueries)
{
    auto w = provisioned_world(small_scenario(3, 2, 1));
    w->pca().set_daily_cap(1);
    const auto a = w->device(0).certificates_for(0);
    EXPECT_NO_THROW(w->ma().investigate({*a[0].linkage}));
    EXPECT_THROW(w->ma().investigate({*a[1].linkage}), refused);
    const auto log = w->pca().gate().log().entries();
    ASSERT_FALSE(log.empty());
    EXPECT_NE(log.back().outcome.find("refused"), std::string::npos);
}

// --- pseudonym revocation ----------------------------------------------------------------------

TEST(Revocation, ThresholdScenarioRevokesForwardOnly)
{
    auto w = provisioned_world(small_scenario(6, 3, 3));
    w->open_period(1);
    w->run_event(misbehave(2, 3, 1));
    ASSERT_EQ(w->revocations().size(), 1u);
    EXPECT_EQ(w->revocations().front().device, 2u);
    EXPECT_EQ(w->revocations().front().period, 1u);

    const auto& judge = w->device(0);
    for (const auto& c : w->device(2).certificates_for(0)) EXPECT_EQ(judge.crls().check(c), cert::crl_status::valid);
    for (std::uint32_t p = 1; p < 3; ++p) {
        for (const auto& c : w->device(2).certificates_for(p)) {
            EXPECT_EQ(judge.crls().check(c), cert::crl_status::revoked);
        }
    }
    for (std::uint32_t p = 0; p < 3; ++p) {
        for (const auto& c : w->device(3).certificates_for(p)) {
            EXPECT_EQ(judge.crls().check(c), cert::crl_status::valid);
        }
    }
}

TEST(Revocation, BelowThresholdNobodyIsRevoked)
{
    auto w = provisioned_world(small_scenario(6, 3, 2));
    w->run_event(misbehave(2, 2, 0));
    EXPECT_TRUE(w->revocations().empty());
    EXPECT_TRUE(w->ma().revoked().empty());
}

TEST(Revocation, NextProvisioningRequestIsDenied)
{
    auto w = provisioned_world(small_scenario(6, 3, 2));
    w->run_event(misbehave(4, 3, 0));
    ASSERT_EQ(w->revocations().size(), 1u);
    EXPECT_THROW(w->device(4).request_certificates(w->net(), 5, 6), refused);
    EXPECT_TRUE(w->ra().blacklisted(*w->device(4).handle()));
}

TEST(Revocation, MaLearnsCurrentSeedButNotThePreviousOne)
{
    auto w = provisioned_world(small_scenario(5, 3, 3));
    w->open_period(1);
    w->open_period(2);
    const auto certs = w->device(1).certificates_for(2);
    ASSERT_TRUE(w->ma().revoke_pseudonym(*certs.front().linkage).newly_revoked);

    const auto rec = w->ra().record(*w->device(1).handle());
    ASSERT_TRUE(rec);
    const auto& keys = w->keys();
    for (const auto& chain : rec->chains) {
        const auto& priv = chain.la_host == "la1" ? *keys.la1.encryption_private : *keys.la2.encryption_private;
        const auto s0 = linkage::open_chain_id(priv, chain.lci);
        EXPECT_TRUE(ma_store_contains(*w, linkage::seed_at(chain.la, s0, 2).value));
        EXPECT_FALSE(ma_store_contains(*w, linkage::seed_at(chain.la, s0, 1).value));
        EXPECT_FALSE(ma_store_contains(*w, s0.value));
    }
}

TEST(Revocation, TwoDevicesShareOneGroupHeader)
{
    auto w = provisioned_world(small_scenario(4, 3, 1));
    for (std::size_t k : {0u, 3u}) {
        ASSERT_TRUE(w->ma().revoke_pseudonym(*w->device(k).certificates_for(0).front().linkage).newly_revoked);
    }
    const auto lists = w->ma().publish();
    const auto it = std::find_if(lists.begin(), lists.end(),
                                 [](const cert::crl& l) { return l.series == cert::series::pseudonym; });
    ASSERT_NE(it, lists.end());
    ASSERT_EQ(it->groups.size(), 1u);
    EXPECT_EQ(it->groups.front().entries.size(), 2u);
    EXPECT_EQ(it->groups.front().j_max, 3u);
}

TEST(Revocation, RepublishingKeepsEntriesAndBumpsSequence)
{
    auto w = provisioned_world(small_scenario(3, 2, 1));
    ASSERT_TRUE(w->ma().revoke_pseudonym(*w->device(1).certificates_for(0).front().linkage).newly_revoked);
    const auto first = w->ma().publish();
    const auto second = w->ma().publish();
    ASSERT_EQ(first.size(), second.size());
    for (std::size_t k = 0; k < first.size(); ++k) {
        EXPECT_EQ(second[k].sequence, first[k].sequence + 1);
        EXPECT_EQ(second[k].groups, first[k].groups);
        EXPECT_EQ(second[k].ids, first[k].ids);
    }
}

TEST(Revocation, PublishedCrlsVerifyAgainstTheCraca)
{
    auto w = provisioned_world(small_scenario(3, 2, 1));
    w->ma().revoke_pseudonym(*w->device(1).certificates_for(0).front().linkage);
    const auto& crlg = w->keys().crlg.cert;
    for (const auto& l : w->ma().publish()) {
        EXPECT_TRUE(cert::crl_signed_by(l, crlg));
        EXPECT_EQ(l.craca_id, w->keys().root.cert.id());
        EXPECT_TRUE(w->device(0).trust().verify_crl(l, 0));
    }
}

// --- non-pseudonym revocation ---------------------------------------------------------------------

TEST(RevokeOther, RseWithThreeLiveApplicationCertsGetsThreeCertIds)
{
    auto s = small_scenario(2, 2, 3);
    s.rses = 1;
    auto w = provisioned_world(s);
    auto& rse = w->device(2);
    ASSERT_TRUE(w->is_rse(2));
    std::size_t held = 0;
    for (const auto& [p, list] : rse.certificates()) held += list.size();
    ASSERT_EQ(held, 3u); // one application certificate per period

    const auto outcome = w->ma().revoke_other(rse.certificates_for(0).front());
    EXPECT_EQ(outcome.entries_added, 3u);
    w->publish_crls();
    for (std::uint32_t p = 0; p < 3; ++p) {
        for (const auto& c : rse.certificates_for(p)) {
            EXPECT_EQ(w->device(0).crls().check(c), cert::crl_status::revoked);
        }
    }
    EXPECT_TRUE(w->ra().blacklisted(*rse.handle()));
}

TEST(RevokeOther, ExpiredCertificatesOnlyMeansBlacklistOnly)
{
    auto s = small_scenario(1, 2, 2);
    s.rses = 1;
    s.span = 1; // application certificates for week 0 only
    auto w = provisioned_world(s);
    auto& rse = w->device(1);
    const auto old = rse.certificates_for(0).front();
    w->open_period(1);
    const auto outcome = w->ma().revoke_other(old);
    EXPECT_EQ(outcome.entries_added, 0u);
    EXPECT_TRUE(w->ra().blacklisted(*rse.handle()));
}

TEST(RevokeOther, PseudonymCertificatesAreRefused)
{
    auto w = provisioned_world(small_scenario(2, 2, 1));
    EXPECT_THROW(w->ma().revoke_other(w->device(0).certificates_for(0).front()), std::invalid_argument);
}

// --- audit trail --------------------------------------------------------------------------------

TEST(Audit, EveryResponseToTheMaReconciles)
{
    auto w = provisioned_world(small_scenario(6, 3, 2));
    w->run_event(misbehave(1, 3, 0));
    const auto rec = sim::reconcile_audit(*w);
    EXPECT_GT(rec.sent, 0u);
    EXPECT_EQ(rec.sent, rec.served + rec.refused);
    EXPECT_EQ(rec.orphans(), 0u);
}

TEST(Audit, ForgedServedEntryIsAnOrphan)
{
    auto w = provisioned_world(small_scenario(3, 2, 1));
    w->ma().investigate({*w->device(0).certificates_for(0).front().linkage});
    authorities::audit_log forged(w->db().open("la1", "la1"), "la1");
    forged.append({0, "ma", "link_query", crypto::sha256(byte_buffer{7}), "served"});
    EXPECT_GT(sim::reconcile_audit(*w).orphans(), 0u);
}
