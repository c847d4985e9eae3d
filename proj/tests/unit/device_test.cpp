#include "world_fixture.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace scms;
using scms::refused;

namespace {

sim::sim_time at(std::uint32_t period, std::uint32_t minute)
{
    return {period, minute};
}

authorities::batch stored_batch(sim::world& w, const cert::cert_id& handle, std::uint32_t period)
{
    for (const auto& r : scan(w, "ra", "batch")) {
        auto b = authorities::batch::decode(r.value);
        if (b.handle == handle && b.period == period) return b;
    }
    throw std::runtime_error("no such batch");
}

void revoke(sim::world& w, std::size_t k, std::uint32_t period)
{
    ASSERT_TRUE(w.ma().revoke_pseudonym(*w.device(k).certificates_for(period).front().linkage).newly_revoked);
    w.publish_crls();
}

// Response re-encrypted to the same J and re-signed by the PCA, with the
// certificate replaced or the key-derivation value altered.
authorities::pca_response forge(sim::world& w, const authorities::pca_response& original,
                                authorities::issued_payload payload)
{
    const auto& pca = w.keys().pca;
    crypto::seeded_random rng(99);
    authorities::pca_response r;
    r.recipient_key = original.recipient_key;
    r.ciphertext = crypto::hybrid_encrypt(original.recipient_key, payload.encode(), rng);
    r.signature = crypto::sign(pca.signing_private, authorities::response_digest(r.recipient_key, r.ciphertext, pca.cert));
    return r;
}

} // namespace

// --- provisioning -----------------------------------------------------------------------

TEST(Device, UnbootstrappedDeviceFailsLocally)
{
    sim::world w(small_scenario(1));
    EXPECT_FALSE(w.device(0).bootstrapped());
    const auto before = w.net().delivered();
    EXPECT_THROW(w.device(0).request_certificates(w.net(), 0, 1), error);
    EXPECT_THROW(w.device(0).download(w.net(), 0), error);
    EXPECT_EQ(w.net().delivered(), before);
}

TEST(Device, CleanBatchOfTwentyGivesTwentyKeyPairs)
{
    auto w = provisioned_world(small_scenario(2, 20, 1));
    const auto& held = w->device(0).certificates().at(0);
    ASSERT_EQ(held.size(), 20u);
    std::set<std::uint32_t> js;
    for (const auto& h : held) {
        EXPECT_EQ(crypto::group_element::mul_base(h.signing_private), h.cert.verification_key);
        js.insert(h.cert.linkage->index.j);
    }
    EXPECT_EQ(js.size(), 20u);
}

TEST(Device, RequestCarriesNoDeviceIdentifierPastTheProxy)
{
    sim::world w(small_scenario(1));
    std::ostringstream trace;
    w.set_trace(&trace);
    w.bootstrap_all();
    w.device(0).request_certificates(w.net(), 0, 1);
    std::istringstream lines(trace.str());
    std::string line;
    std::size_t to_ra = 0;
    while (std::getline(lines, line)) {
        if (line.find("\"dst\":\"ra\"") == std::string::npos) continue;
        ++to_ra;
        EXPECT_EQ(line.find("obe-0000"), std::string::npos) << line;
    }
    EXPECT_GT(to_ra, 0u);
}

TEST(Device, TamperedCiphertextIsRejected)
{
    auto w = provisioned_world(small_scenario(2, 3, 2));
    auto& d = w->device(0);
    auto b = stored_batch(*w, *d.handle(), 1);
    b.responses[0].ciphertext.payload[0] ^= 1;
    const auto rep = d.install_batch(b);
    EXPECT_EQ(rep.bad_pca_signature, 1u);
    EXPECT_EQ(rep.rejected(), 1u);
    EXPECT_EQ(rep.duplicates, 2u);
    EXPECT_EQ(d.quarantined(), 1u);
}

TEST(Device, CorruptCiphertextSignedByThePcaIsUndecryptable)
{
    auto w = provisioned_world(small_scenario(2, 3, 1));
    auto& d = w->device(0);
    const auto& pca = w->keys().pca;
    auto b = stored_batch(*w, *d.handle(), 0);
    auto& resp = b.responses[1];
    resp.ciphertext.tag[0] ^= 1;
    resp.signature =
        crypto::sign(pca.signing_private, authorities::response_digest(resp.recipient_key, resp.ciphertext, pca.cert));
    const auto rep = d.install_batch(b);
    EXPECT_EQ(rep.undecryptable, 1u);
    EXPECT_EQ(d.mitm_detected(), 0u);
}

TEST(Device, WrongKeyDerivationValueIsRejected)
{
    auto w = provisioned_world(small_scenario(2, 3, 1));
    auto& d = w->device(0);
    const auto b = stored_batch(*w, *d.handle(), 0);
    const auto& held = d.certificates().at(0).front();
    authorities::issued_payload payload;
    payload.index = held.cert.linkage->index;
    payload.cert = held.cert;
    payload.c_sign = crypto::scalar::from_u64(12345); // not the c the PCA used
    // Find the response addressed to this j.
    authorities::batch forged{b.handle, b.period, {}};
    for (const auto& resp : b.responses) forged.responses.push_back(forge(*w, resp, payload));
    const auto rep = d.install_batch(forged);
    EXPECT_EQ(rep.key_mismatch + rep.invalid_certificate, 3u);
    EXPECT_GE(rep.key_mismatch, 1u); // the response for the matching j
    EXPECT_EQ(rep.installed, 0u);
}

TEST(Device, SubstitutedResponseKeyIsDetectedEveryTime)
{
    auto s = small_scenario(6, 4, 2);
    sim::world w(s);
    sim::scenario_event e;
    e.type = "mitm";
    e.count = 10;
    w.bootstrap_all();
    w.run_event(e);
    w.provision_all();
    w.open_period(0);
    w.download_all(0);
    w.ra().flush_reports();
    std::size_t detected = 0, quarantined = 0;
    for (std::size_t k = 0; k < w.device_count(); ++k) {
        detected += w.device(k).mitm_detected();
        quarantined += w.device(k).quarantined();
    }
    EXPECT_EQ(detected, 10u);
    EXPECT_EQ(quarantined, 10u);
    EXPECT_EQ(w.ma().provisioning_anomalies(), 10u);
}

TEST(Device, QuarantinedCertificatesAreNeverUsed)
{
    auto w = provisioned_world(small_scenario(2, 3, 1));
    auto& d = w->device(0);
    auto b = stored_batch(*w, *d.handle(), 0);
    // Drop the real responses so that only a tampered one is offered for a fresh period entry.
    auto bad = b.responses.front();
    bad.ciphertext.payload[3] ^= 0x40;
    authorities::batch only_bad{b.handle, b.period, {bad}};
    d.install_batch(only_bad);
    ASSERT_EQ(d.quarantined(), 1u);
    std::set<cert::cert_id> held;
    for (const auto& h : d.certificates().at(0)) held.insert(h.cert.id());
    for (std::uint32_t m = 0; m < 600; m += 5) {
        const auto msg = d.sign_bsm(at(0, m), {});
        ASSERT_TRUE(msg);
        EXPECT_EQ(held.count(msg->signer.id()), 1u);
    }
}

// --- rotation ------------------------------------------------------------------------------

TEST(Device, RotationUsesSeveralCertificatesPerHour)
{
    auto w = provisioned_world(small_scenario(1, 20, 1));
    std::set<cert::cert_id> used;
    for (std::uint32_t m = 0; m < 60; ++m) used.insert(w->device(0).sign_bsm(at(0, m), {})->signer.id());
    EXPECT_GE(used.size(), 2u);
}

TEST(Device, ConsecutiveMessagesWithinTheWindowShareACertificate)
{
    auto w = provisioned_world(small_scenario(1, 20, 1));
    auto& d = w->device(0);
    EXPECT_EQ(d.sign_bsm(at(0, 10), {})->signer.id(), d.sign_bsm(at(0, 14), {})->signer.id());
    EXPECT_NE(d.sign_bsm(at(0, 14), {})->signer.id(), d.sign_bsm(at(0, 15), {})->signer.id());
}

TEST(Device, OnlyTheCurrentPeriodsCertificatesSign)
{
    auto w = provisioned_world(small_scenario(1, 4, 2));
    auto& d = w->device(0);
    for (std::uint32_t p = 0; p < 2; ++p) {
        const auto msg = d.sign_bsm(at(p, 100), {});
        ASSERT_TRUE(msg);
        EXPECT_EQ(msg->signer.valid.start, p);
        EXPECT_EQ(msg->signer.valid.end, p);
    }
    EXPECT_FALSE(d.sign_bsm(at(2, 100), {})); // nothing held for week 2
}

// --- validation -------------------------------------------------------------------------------

TEST(Device, ValidMessageAccepted)
{
    auto w = provisioned_world(small_scenario(2, 3, 1));
    const auto msg = w->device(0).sign_bsm(at(0, 77), {});
    EXPECT_EQ(w->device(1).validate_bsm(*msg, at(0, 77)), ee::bsm_verdict::accepted);
}

TEST(Device, RevokedSenderRejectedButItsEarlierMessageStillAccepted)
{
    auto w = provisioned_world(small_scenario(3, 3, 3));
    const auto before = w->device(0).sign_bsm(at(0, 50), {});
    w->open_period(1);
    revoke(*w, 0, 1);
    const auto after = w->device(0).sign_bsm(at(1, 50), {});
    EXPECT_EQ(w->device(1).validate_bsm(*after, at(1, 50)), ee::bsm_verdict::revoked);
    EXPECT_EQ(w->device(1).validate_bsm(*before, at(0, 50)), ee::bsm_verdict::accepted);
    const auto other = w->device(2).sign_bsm(at(1, 50), {});
    EXPECT_EQ(w->device(1).validate_bsm(*other, at(1, 50)), ee::bsm_verdict::accepted);
}

TEST(Device, MessageFromAnotherPeriodIsStale)
{
    auto w = provisioned_world(small_scenario(2, 3, 2));
    const auto msg = w->device(0).sign_bsm(at(0, 50), {});
    EXPECT_EQ(w->device(1).validate_bsm(*msg, at(1, 50)), ee::bsm_verdict::stale);
}

TEST(Device, MisboundCertificateRejected)
{
    auto w = provisioned_world(small_scenario(2, 3, 1));
    auto msg = *w->device(0).sign_bsm(at(0, 50), {});
    // Same device, same key material does not matter: another certificate is attached.
    const auto certs = w->device(0).certificates_for(0);
    for (const auto& c : certs) {
        if (c.id() != msg.signer.id()) {
            msg.signer = c;
            break;
        }
    }
    EXPECT_EQ(w->device(1).validate_bsm(msg, at(0, 50)), ee::bsm_verdict::bad_signature);
}

TEST(Device, EnrollmentCertificateCannotSignSafetyMessages)
{
    auto w = provisioned_world(small_scenario(2, 3, 1));
    auto msg = *w->device(0).sign_bsm(at(0, 50), {});
    msg.signer = w->device(0).enrollment();
    EXPECT_EQ(w->device(1).validate_bsm(msg, at(0, 50)), ee::bsm_verdict::wrong_certificate_type);
}

// --- unlinkability -----------------------------------------------------------------------------

TEST(Device, CertificatesFromDifferentWeeksShareNoDeviceSpecificValue)
{
    auto w = provisioned_world(small_scenario(3, 5, 4));
    for (std::size_t k = 0; k < w->device_count(); ++k) {
        std::map<std::uint32_t, std::vector<cert::certificate>> weeks;
        for (std::uint32_t p = 0; p < 4; ++p) weeks[p] = w->device(k).certificates_for(p);
        for (std::uint32_t p = 0; p < 4; ++p) {
            for (std::uint32_t q = p + 1; q < 4; ++q) {
                for (const auto& a : weeks[p]) {
                    for (const auto& b : weeks[q]) {
                        EXPECT_NE(a.id(), b.id());
                        EXPECT_NE(a.verification_key, b.verification_key);
                        EXPECT_NE(a.linkage->value, b.linkage->value);
                        EXPECT_NE(a.signature.value, b.signature.value);
                        // Whatever is equal is equal for every device: issuer, psid, series, type.
                        EXPECT_EQ(a.issuer, b.issuer);
                        EXPECT_EQ(a.psid, b.psid);
                        EXPECT_EQ(a.subject, b.subject);
                    }
                }
            }
        }
    }
    // And those shared values are the same across devices too.
    const auto a = w->device(0).certificates_for(0).front();
    const auto b = w->device(1).certificates_for(0).front();
    EXPECT_EQ(a.issuer, b.issuer);
    EXPECT_EQ(a.psid, b.psid);
    EXPECT_EQ(a.subject, b.subject);
}

TEST(Device, NoFingerprintRecursAcrossWeeks)
{
    auto w = provisioned_world(small_scenario(4, 5, 3));
    std::map<cert::cert_id, std::set<std::uint32_t>> seen;
    for (std::size_t k = 0; k < w->device_count(); ++k) {
        for (std::uint32_t p = 0; p < 3; ++p) {
            for (std::uint32_t m = 0; m < 24 * 60; m += 17) {
                const auto msg = w->device(k).sign_bsm(at(p, m), {});
                seen[msg->signer.id()].insert(p);
            }
        }
    }
    for (const auto& [id, periods] : seen) EXPECT_EQ(periods.size(), 1u);
}

// --- CRLs and policy files -----------------------------------------------------------------------------

TEST(Device, CrlCapacityComesFromTheGlobalPolicy)
{
    auto w = provisioned_world(small_scenario(1, 2, 1));
    EXPECT_EQ(w->device(0).crls().capacity(), 10000u);
}

TEST(Device, ForgedCrlIsNotInstalled)
{
    auto w = provisioned_world(small_scenario(2, 2, 1));
    cert::crl fake;
    fake.series = cert::series::pseudonym;
    fake.craca_id = w->keys().root.cert.id();
    fake.sequence = 99;
    crypto::seeded_random rng(4);
    const auto rogue = crypto::key_pair::generate(rng);
    cert::sign_crl(fake, w->keys().crlg.cert, rogue.private_key);
    EXPECT_FALSE(w->device(0).store_crl(fake, 0));
}

TEST(Device, GlobalChainFileHoldsEveryBootstrapCertificate)
{
    auto w = provisioned_world(small_scenario(1, 2, 1));
    const auto* gccf = w->device(0).policies().current(rootmgmt::policy_kind::global_chain);
    ASSERT_NE(gccf, nullptr);
    std::set<cert::cert_id> in_file;
    for (const auto& c : rootmgmt::decode_chain_file(gccf->content)) in_file.insert(c.id());
    for (const auto& c : w->keys().chain()) EXPECT_EQ(in_file.count(c.id()), 1u) << c.subject;
}

TEST(Device, TamperedPolicyFileRejected)
{
    auto w = provisioned_world(small_scenario(1, 2, 1));
    auto gpf = rootmgmt::policy_file::decode(*w->repo().get("gpf"));
    gpf.version += 1;
    gpf.content.back() ^= 1;
    EXPECT_EQ(w->device(0).accept_policy(gpf, 0), rootmgmt::policy_result::bad_signature);
}

// --- re-enrollment ---------------------------------------------------------------------------------

TEST(Device, HealthyRollOverKeepsProvisioningGoing)
{
    auto s = small_scenario(2, 3, 3);
    s.lookahead = 1;
    auto w = provisioned_world(s);
    auto& d = w->device(0);
    const auto handle = *d.handle();
    const auto old = d.enrollment().id();
    d.reestablish(w->net(), 0);
    EXPECT_NE(d.enrollment().id(), old);
    EXPECT_EQ(d.trust().verify_chain(d.enrollment(), 0), cert::chain_status::ok);
    w->open_period(1);
    EXPECT_EQ(d.download(w->net(), 1).installed, 3u);
    EXPECT_EQ(*d.handle(), handle);
}

TEST(Device, RevokedDeviceCannotRollOver)
{
    auto w = provisioned_world(small_scenario(3, 3, 1));
    revoke(*w, 1, 0);
    const auto old = w->device(1).enrollment().id();
    EXPECT_THROW(w->device(1).reestablish(w->net(), 0), refused);
    EXPECT_EQ(w->device(1).enrollment().id(), old);
}

TEST(Device, SnapshotRestoreRoundTrips)
{
    auto w = provisioned_world(small_scenario(2, 3, 2));
    auto& d = w->device(0);
    const auto snap = d.snapshot();
    auto copy = ee::device::restore(snap, crypto::seeded_random(8));
    EXPECT_EQ(copy.snapshot(), snap);
    EXPECT_EQ(copy.id(), d.id());
    const auto msg = copy.sign_bsm(at(1, 30), {});
    ASSERT_TRUE(msg);
    EXPECT_EQ(msg->signer.id(), d.sign_bsm(at(1, 30), {})->signer.id());
    EXPECT_EQ(w->device(1).validate_bsm(*msg, at(1, 30)), ee::bsm_verdict::accepted);
}
