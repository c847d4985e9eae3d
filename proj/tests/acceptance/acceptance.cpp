// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "../unit/test_pki.hpp"

#include <scms/butterfly.hpp>
#include <scms/cert/crl.hpp>
#include <scms/cert/signed_message.hpp>
#include <scms/linkage.hpp>
#include <scms/rootmgmt/electors.hpp>
#include <scms/sim/world.hpp>
#include <scms/vectors.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace scms;
namespace fs = std::filesystem;

namespace {

struct outcome
{
    bool pass = false;
    std::string detail;
};

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// The baseline scenario is run once and shared by the criteria that are about it.
struct baseline_run
{
    sim::metrics m;
    double wall = 0;
};

const baseline_run& baseline()
{
    static const baseline_run run = [] {
        baseline_run r;
        const auto t0 = clock_type::now();
        r.m = sim::world(sim::scenario::load(fs::path(SCMS_SCENARIO_DIR) / "baseline.json")).run();
        r.wall = seconds_since(t0);
        return r;
    }();
    return run;
}

outcome butterfly_identity()
{
    using namespace butterfly;
    crypto::seeded_random rng(1001);
    const auto t0 = clock_type::now();
    const int sessions = 1000;
    int bad = 0;
    for (int n = 0; n < sessions; ++n) {
        const auto secrets = caterpillar_secrets::generate(rng);
        const time_index idx{static_cast<std::uint32_t>(rng.uniform(1u << 20)),
                             static_cast<std::uint32_t>(rng.uniform(64))};
        const auto cocoon = cocoon_expand(secrets.request(), idx);
        const auto bk = butterfly_finalize(cocoon.signing, rng);
        const auto b = reconstruct_private(secrets.signing_private, secrets.signing_key, key_kind::signing, idx,
                                           bk.reconstruction);
        if (crypto::group_element::mul_base(b) != bk.public_key) ++bad;
    }
    const double t = seconds_since(t0);
    return {bad == 0 && t < 10.0, fmt("%d sessions, %d mismatches, %.2f s", sessions, bad, t)};
}

outcome golden_vectors()
{
    const auto text = slurp(SCMS_GOLDEN_FILE);
    std::istringstream in(text);
    const auto records = vectors::parse(in);
    const auto mismatches = vectors::check(records).size();
    const bool regenerates = vectors::generate() == text;
    const bool oracle = fs::exists(SCMS_ORACLE_SCRIPT);
    return {!records.empty() && mismatches == 0 && regenerates && oracle,
            fmt("%zu vectors, %zu mismatches, regenerated file %s, oracle script %s", records.size(), mismatches,
                regenerates ? "identical" : "differs", oracle ? "present" : "missing")};
}

outcome revocation_flags()
{
    const auto& m = baseline().m;
    const auto flagged = m.at("revoked_flagged_certs");
    const auto due = m.at("revoked_due_certs");
    const auto earlier = m.at("revoked_flagged_past_certs");
    const auto past = m.at("revoked_past_certs");
    const auto false_pos = m.at("false_positive_flags");
    return {flagged == 140 && due == 140 && earlier == 0 && false_pos == 0,
            fmt("%.0f of %.0f certificates for weeks 3-9 flagged, %.0f of %.0f for weeks 0-2, %.0f false positives",
                flagged, due, earlier, past, false_pos)};
}

outcome crl_size()
{
    test_pki pki;
    cert::crl list;
    list.series = cert::series::pseudonym;
    list.craca_id = pki.root.id();
    crypto::seeded_random rng(404);
    for (int n = 0; n < 10000; ++n) {
        list.add(linkage::revocation_entry{{1}, {2}, static_cast<std::uint32_t>(n % 8), 20, rng.bytes<16>(),
                                           rng.bytes<16>()});
    }
    cert::sign_crl(list, pki.crlg, pki.crlg_keys.private_key);
    const auto bytes = list.encode().size();
    return {bytes <= 400000, fmt("10000 entries, %zu bytes", bytes)};
}

// Linkage values cut to 24 bits; 1024 chains observed over 200 periods.
outcome truncated_collisions()
{
    constexpr int chains = 1024, periods = 200;
    crypto::seeded_random rng(5);
    const linkage::la_id la1{1}, la2{2};
    std::vector<linkage::linkage_seed> s1, s2;
    for (int c = 0; c < chains; ++c) {
        s1.push_back(linkage::linkage_seed::random_initial(rng));
        s2.push_back(linkage::linkage_seed::random_initial(rng));
    }
    std::uint64_t observed = 0;
    for (int i = 0; i < periods; ++i) {
        std::map<std::uint32_t, std::uint64_t> buckets;
        for (int c = 0; c < chains; ++c) {
            const auto lv = linkage::combine(linkage::pre_linkage(la1, s1[c], 0), linkage::pre_linkage(la2, s2[c], 0));
            ++buckets[(std::uint32_t{lv.value[0]} << 16) | (std::uint32_t{lv.value[1]} << 8) | lv.value[2]];
            s1[c] = linkage::evolve_seed(la1, s1[c]);
            s2[c] = linkage::evolve_seed(la2, s2[c]);
        }
        for (const auto& [v, n] : buckets) observed += n * (n - 1) / 2;
    }
    const double expected = periods * (chains * (chains - 1) / 2.0) / double(1u << 24);
    const bool ok = observed >= expected / 2 && observed <= expected * 2;
    return {ok, fmt("%llu colliding pairs over %d periods, expected %.2f", static_cast<unsigned long long>(observed),
                    periods, expected)};
}

outcome separation()
{
    const auto& m = baseline().m;
    const auto v = m.at("separation_violations");
    const auto orphans = m.at("audit_orphans");
    return {v == 0 && orphans == 0, fmt("%.0f violations, %.0f orphan records", v, orphans)};
}

outcome misbinding()
{
    test_pki pki;
    crypto::seeded_random rng(707);
    const int attempts = 1000;
    int accepted = 0, honest_rejected = 0;
    for (int n = 0; n < attempts; ++n) {
        const auto keys = crypto::key_pair::generate(rng);
        const linkage::linkage_value lv{rng.bytes<linkage::value_size>(), {static_cast<std::uint32_t>(n), 0}};
        const auto genuine = pki.pseudonym(keys, lv);
        const auto msg = cert::sign_message(keys.private_key, genuine, as_bytes("bsm " + std::to_string(n)));
        honest_rejected += !cert::verify_message(msg);

        // Same verification key, different certificate.
        auto wrong = genuine;
        switch (n % 3) {
        case 0: wrong.psid = 0x21 + static_cast<std::uint32_t>(n); break;
        case 1: wrong.valid.end += 1; break;
        default: wrong.linkage->value[0] ^= 0x80; break;
        }
        wrong = cert::issue(wrong, pki.pca, pki.pca_keys.private_key);
        auto swapped = msg;
        swapped.signer = wrong;
        accepted += cert::verify_message(swapped);
        accepted += cert::verify_message_with(msg, wrong);
    }
    return {accepted == 0 && honest_rejected == 0,
            fmt("%d attempts, %d accepted; %d honest messages rejected", 2 * attempts, accepted, honest_rejected)};
}

outcome elector_suite()
{
    using namespace rootmgmt;
    crypto::seeded_random rng(808);
    std::vector<crypto::key_pair> keys;
    std::vector<cert::certificate> electors;
    for (int n = 0; n < 4; ++n) {
        keys.push_back(crypto::key_pair::generate(rng));
        electors.push_back(make_elector("elector-" + std::to_string(n), keys.back(),
                                        crypto::signature_algorithm::ecdsa_p256_sha256, {0, 100}));
    }
    const auto root_keys = crypto::key_pair::generate(rng);
    cert::certificate root;
    root.type = cert::cert_type::authority;
    root.role = cert::authority_role::root_ca;
    root.subject = "root";
    root.verification_key = root_keys.public_key;
    root.valid = {0, 100};
    root = cert::self_sign(root, root_keys.private_key);

    const auto one = [&](action_kind k, const cert::certificate& obj, std::initializer_list<int> voters) {
        action a{k, obj, {}};
        for (int v : voters) a.votes.push_back(cast_vote(k, obj, electors[v], keys[v].private_key));
        return ballot{{a}};
    };

    auto s = trust_state::initial({electors[0], electors[1], electors[2]});
    const bool quorum = s.quorum() == 2;
    const bool single_rejected = s.validate(one(action_kind::endorse_root, root, {0})).accepted.empty();
    const bool pair_accepted = s.validate(one(action_kind::endorse_root, root, {0, 1})).accepted.size() == 1;

    s.process(one(action_kind::revoke_elector, electors[2], {0, 1}));
    const bool revoked_void = s.validate(one(action_kind::endorse_root, root, {0, 2})).accepted.empty();

    const bool replaced = s.process(one(action_kind::endorse_elector, electors[3], {0, 1})).accepted.size() == 1;
    const bool new_set_endorses =
        s.process(one(action_kind::endorse_root, root, {1, 3})).accepted.size() == 1 && s.root_trusted(root.id());

    const bool ok = quorum && single_rejected && pair_accepted && revoked_void && replaced && new_set_endorses;
    return {ok, fmt("quorum 2: %s; 1 vote rejected: %s; 2 votes accepted: %s; revoked elector void: %s; "
                    "replacement endorsed: %s; new set endorses root: %s",
                    quorum ? "yes" : "no", single_rejected ? "yes" : "no", pair_accepted ? "yes" : "no",
                    revoked_void ? "yes" : "no", replaced ? "yes" : "no", new_set_endorses ? "yes" : "no")};
}

outcome determinism()
{
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(SCMS_SCENARIO_DIR)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string differing;
    for (const auto& f : files) {
        const auto s = sim::scenario::load(f.string());
        const auto first = f.stem() == "baseline" ? baseline().m.labels.at("trace_digest")
                                                   : sim::world(s).run().labels.at("trace_digest");
        const auto second = sim::world(s).run().labels.at("trace_digest");
        if (first != second) differing += " " + f.stem().string();
    }
    return {!files.empty() && differing.empty(),
            fmt("%zu scenarios run twice, differing:%s", files.size(), differing.empty() ? " none" : differing.c_str())};
}

outcome mitm()
{
    auto s = sim::scenario{};
    s.name = "mitm-acceptance";
    s.seed = 1010;
    s.devices = 25;
    s.batch_size = 4;
    s.weeks = 2;
    s.lookahead = 2;
    s.events.push_back({0, "mitm", 0, 3, 100, false});
    const auto m = sim::world(s).run();
    const auto attempts = m.at("mitm_attempts");
    const auto detected = m.at("mitm_detected");
    return {attempts == 100 && detected == attempts,
            fmt("%.0f substitutions, %.0f detected, %.0f reported to the MA", attempts, detected,
                m.at("provisioning_anomalies"))};
}

outcome baseline_time()
{
    const auto& b = baseline();
    return {b.wall < 60.0 && b.m.violations.empty(),
            fmt("%.1f s, %.0f certificates, %zu scenario violations", b.wall, b.m.at("certs_issued"),
                b.m.violations.size())};
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<outcome()>> criteria[] = {
        {"butterfly key reconstruction identity", butterfly_identity},
        {"golden vectors bit-exact", golden_vectors},
        {"revocation flags exactly the post-revocation certificates", revocation_flags},
        {"10000-entry CRL within 400 KB", crl_size},
        {"24-bit linkage collision rate", truncated_collisions},
        {"separation audit clean after baseline", separation},
        {"misbinding attempts rejected", misbinding},
        {"elector quorum, revocation and replacement", elector_suite},
        {"trace digests reproducible for every scenario", determinism},
        {"response-key substitution detected", mitm},
        {"baseline scenario under 60 s", baseline_time},
    };
    int failed = 0;
    int n = 0;
    for (const auto& [title, check] : criteria) {
        ++n;
        outcome o;
        try {
            o = check();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        failed += !o.pass;
        std::printf("criterion %2d: %s  %s (%s)\n", n, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", n - failed, n);
    return failed ? 1 : 0;
}
