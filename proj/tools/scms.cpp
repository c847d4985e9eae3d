// Command-line front end: one-shot operations on a freshly seeded deployment,
// scenario runs and golden-vector maintenance.

#include <scms/cert/crl.hpp>
#include <scms/sim/world.hpp>
#include <scms/vectors.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace scms;

namespace {

/// Exit code for usage errors, matching CLI11's own.
constexpr int usage_exit = 2;

struct usage_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

byte_buffer read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw usage_error("cannot open " + path);
    return byte_buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, byte_view data)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

void write_text(const fs::path& path, const std::string& text)
{
    write_file(path, byte_view(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct fleet_options
{
    std::uint64_t seed = 1;
    std::size_t devices = 4;
    std::size_t rses = 0;
    std::uint16_t batch = 20;
    std::uint32_t periods = 2;

    void attach(CLI::App& app)
    {
        app.add_option("--seed", seed, "deterministic seed")->capture_default_str();
        app.add_option("--devices", devices, "number of OBEs")->capture_default_str();
        app.add_option("--rses", rses, "number of RSEs")->capture_default_str();
        app.add_option("--batch", batch, "certificates per device per period")->capture_default_str()->check(
            CLI::Range(1, 1000));
        app.add_option("--periods", periods, "weeks of certificates to provision")->capture_default_str()->check(
            CLI::Range(1, 520));
    }

    sim::scenario to_scenario() const
    {
        sim::scenario s;
        s.name = "cli";
        s.seed = seed;
        s.devices = devices;
        s.rses = rses;
        s.batch_size = batch;
        s.weeks = periods;
        s.lookahead = periods;
        if (devices + rses == 0) throw usage_error("need at least one device");
        return s;
    }
};

// --- bootstrap ------------------------------------------------------------------

int cmd_bootstrap(const fleet_options& opt, const std::string& out)
{
    sim::world w(opt.to_scenario());
    w.bootstrap_all();
    const fs::path dir(out);
    for (const char* name : {"gpf", "gccf", "ballots"}) write_file(dir / name, *w.repo().get(name));
    write_file(dir / "root.cert", w.keys().root.cert.encode());
    for (std::size_t k = 0; k < w.device_count(); ++k) {
        auto& d = w.device(k);
        write_file(dir / (d.id() + ".device"), d.snapshot());
        std::cout << d.id() << "  enrollment " << to_hex(d.enrollment().id()) << "  valid "
                  << d.enrollment().valid.start << ".." << d.enrollment().valid.end << '\n';
    }
    std::cout << "root " << to_hex(w.keys().root.cert.id()) << ", " << w.device_count() << " devices bootstrapped into "
              << out << '\n';
    return 0;
}

// --- provision ------------------------------------------------------------------

int cmd_provision(const fleet_options& opt, const std::string& out)
{
    sim::world w(opt.to_scenario());
    w.bootstrap_all();
    w.provision_all();
    w.open_period(0);
    w.download_all(0);

    const fs::path dir(out);
    std::size_t files = 0;
    for (const auto& rec : w.db().open("ra", "ra").scan("ra", "batch")) {
        const auto b = authorities::batch::decode(rec.value);
        write_file(dir / b.file_name(), rec.value);
        ++files;
    }
    std::size_t held = 0;
    for (std::size_t k = 0; k < w.device_count(); ++k) {
        for (const auto& [p, list] : w.device(k).certificates()) held += list.size();
    }
    std::cout << "pseudonym certificates issued: " << w.pca().issued() << '\n'
              << "installed on devices: " << held << '\n'
              << "batch files written: " << files << " in " << out << '\n';
    return 0;
}

// --- revoke ---------------------------------------------------------------------

int cmd_revoke(const fleet_options& opt, const std::vector<std::size_t>& targets, const std::string& out)
{
    if (targets.empty()) throw usage_error("revoke: name at least one device with --device");
    sim::world w(opt.to_scenario());
    w.bootstrap_all();
    w.provision_all();
    w.open_period(0);
    w.download_all(0);
    for (const auto k : targets) {
        if (k >= w.device_count()) throw usage_error("revoke: no device " + std::to_string(k));
        const auto certs = w.device(k).certificates_for(0);
        if (certs.empty() || !certs.front().linkage) throw std::runtime_error("device holds no pseudonym certificate");
        const auto outcome = w.ma().revoke_pseudonym(*certs.front().linkage);
        std::cout << w.device(k).id() << ": " << (outcome.newly_revoked ? "revoked" : "already revoked") << " from period "
                  << outcome.period << '\n';
    }
    w.publish_crls();
    const auto file = w.repo().get("crl");
    write_file(out, *file);
    std::cout << "composite CRL (" << file->size() << " bytes) written to " << out << '\n';
    return 0;
}

// --- crl inspect ----------------------------------------------------------------

std::string series_name(std::uint16_t s)
{
    switch (s) {
    case cert::series::pseudonym: return "pseudonym";
    case cert::series::components: return "components";
    case cert::series::identification_application: return "identification/application";
    case cert::series::enrollment: return "enrollment";
    case cert::series::root_managed: return "root-managed";
    default: return "custom";
    }
}

std::string tag_text(const cert::entry_tag& t)
{
    std::string s(cert::to_string(t.priority));
    if (t.region) s += " region " + std::to_string(*t.region);
    return s;
}

int cmd_crl_inspect(const std::string& path)
{
    const auto data = read_file(path);
    std::vector<cert::crl> lists;
    try {
        lists = cert::decode_composite(data);
    } catch (const std::exception&) {
        lists = {cert::crl::decode(data)}; // a single CRL
    }
    std::size_t groups = 0, pairs = 0, ids = 0;
    for (const auto& l : lists) {
        std::cout << "CRL series " << l.series << " (" << series_name(l.series) << ")  CRACA " << to_hex(l.craca_id)
                  << "  issued period " << l.issue_period << "  sequence " << l.sequence << "  signer "
                  << to_hex(l.signer) << '\n';
        for (const auto& g : l.groups) {
            std::cout << "  linkage group  LA " << g.la1.value << " + LA " << g.la2.value << "  from period "
                      << g.period << "  j_max " << g.j_max << "  " << g.entries.size() << " seed pair"
                      << (g.entries.size() == 1 ? "" : "s") << '\n';
            for (const auto& e : g.entries) {
                std::cout << "    ls1 " << to_hex(e.seed1) << "  ls2 " << to_hex(e.seed2) << "  " << tag_text(e.tag)
                          << '\n';
            }
            ++groups;
            pairs += g.entries.size();
        }
        if (!l.ids.empty()) std::cout << "  CertIds\n";
        for (const auto& e : l.ids) std::cout << "    " << to_hex(e.id) << "  " << tag_text(e.tag) << '\n';
        ids += l.ids.size();
    }
    std::cout << lists.size() << " CRL" << (lists.size() == 1 ? "" : "s") << ", " << groups << " group"
              << (groups == 1 ? "" : "s") << ", " << pairs << " seed pair" << (pairs == 1 ? "" : "s") << ", " << ids
              << " CertId" << (ids == 1 ? "" : "s") << '\n';
    return 0;
}

// --- ballot ---------------------------------------------------------------------

int cmd_ballot(std::uint64_t seed, const std::string& action, const std::vector<std::size_t>& voters,
               std::size_t target, const std::string& out)
{
    sim::scenario s;
    s.seed = seed;
    s.devices = 1;
    sim::world w(s);
    w.bootstrap_all();
    const auto& electors = w.keys().electors;
    auto rng = crypto::seeded_random(seed).fork("cli-ballot");

    rootmgmt::action a;
    if (action == "endorse-root") {
        a.kind = rootmgmt::action_kind::endorse_root;
        const auto keys = crypto::key_pair::generate(rng);
        cert::certificate c;
        c.type = cert::cert_type::authority;
        c.role = cert::authority_role::root_ca;
        c.subject = "root-next";
        c.verification_key = keys.public_key;
        c.valid = {0, 1000};
        c.crl_series = cert::crl_series_table{}.for_type(c.type, c.role);
        a.object = cert::self_sign(std::move(c), keys.private_key);
    } else if (action == "revoke-root") {
        a.kind = rootmgmt::action_kind::revoke_root;
        a.object = w.keys().root.cert;
    } else if (action == "endorse-elector") {
        a.kind = rootmgmt::action_kind::endorse_elector;
        a.object = rootmgmt::make_elector("elector-next", crypto::key_pair::generate(rng),
                                          crypto::signature_algorithm::ecdsa_p256_sha256, {0, 1000});
    } else if (action == "revoke-elector") {
        if (target >= electors.size()) throw usage_error("ballot: no elector " + std::to_string(target));
        a.kind = rootmgmt::action_kind::revoke_elector;
        a.object = electors[target].cert;
    } else {
        throw usage_error("ballot: unknown action " + action);
    }
    for (const auto v : voters) {
        if (v >= electors.size()) throw usage_error("ballot: no elector " + std::to_string(v));
        a.votes.push_back(rootmgmt::cast_vote(a.kind, a.object, electors[v].cert, electors[v].keys.private_key));
    }
    const rootmgmt::ballot b{{a}};
    if (!out.empty()) write_file(out, b.encode());

    auto view = w.device(0).electorate();
    std::cout << "electors " << view.active_electors() << ", quorum " << view.quorum() << '\n';
    const auto verdict = view.process(b);
    std::cout << rootmgmt::to_string(a.kind) << " " << a.object.subject << " (" << to_hex(a.object.id()) << ") with "
              << a.votes.size() << " vote" << (a.votes.size() == 1 ? "" : "s") << ": ";
    if (!verdict.accepted.empty()) {
        std::cout << "accepted\n";
    } else {
        std::cout << "rejected (" << (verdict.rejected.empty() ? "?" : verdict.rejected.front().second) << ")\n";
    }
    return verdict.accepted.empty() ? 1 : 0;
}

// --- run ------------------------------------------------------------------------

int cmd_run(const std::string& path, const std::string& trace_path, const std::string& metrics_path)
{
    sim::scenario s;
    try {
        s = sim::scenario::load(path);
    } catch (const sim::scenario_error& ex) {
        throw usage_error(std::string("run: ") + ex.what());
    }
    sim::world w(s);
    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw std::runtime_error("cannot write " + trace_path);
        w.set_trace(&trace);
    }
    const auto m = w.run();
    const auto text = m.json();
    if (!metrics_path.empty()) write_text(metrics_path, text + "\n");
    std::cout << text << '\n';
    for (const auto& v : m.violations) std::cerr << "violation: " << v << '\n';
    return m.violations.empty() ? 0 : 1;
}

// --- vectors --------------------------------------------------------------------

int cmd_vectors_generate(const std::string& out)
{
    const auto text = vectors::generate();
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return 0;
}

int cmd_vectors_check(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open " + path);
    const auto records = vectors::parse(in);
    const auto bad = vectors::check(records);
    for (const auto& m : bad) {
        std::cerr << path << ':' << m.line << ": " << m.kind << " expected " << m.expected << ", got " << m.actual
                  << '\n';
    }
    std::cout << records.size() << " vectors, " << bad.size() << " mismatches\n";
    return bad.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Security Credential Management System simulator"};
    app.require_subcommand(1);

    fleet_options fleet;
    std::string out;

    auto* boot = app.add_subcommand("bootstrap", "bootstrap a fleet and write manager files and device snapshots");
    fleet.attach(*boot);
    boot->add_option("--out", out, "output directory")->required();

    auto* prov = app.add_subcommand("provision", "bootstrap, request pseudonym batches and write the batch files");
    fleet.attach(*prov);
    prov->add_option("--out", out, "output directory")->required();

    std::vector<std::size_t> targets;
    auto* rev = app.add_subcommand("revoke", "revoke devices by linkage seed and write the composite CRL");
    fleet.attach(*rev);
    rev->add_option("--device", targets, "index of a device to revoke (repeatable)")->required();
    rev->add_option("--out", out, "CRL file")->required();

    std::string crl_path;
    auto* crl = app.add_subcommand("crl", "CRL tools");
    crl->require_subcommand(1);
    auto* inspect = crl->add_subcommand("inspect", "pretty-print a CRL or composite CRL file");
    inspect->add_option("file", crl_path, "CRL file")->required()->check(CLI::ExistingFile);

    std::string action;
    std::vector<std::size_t> voters;
    std::size_t target = 0;
    std::uint64_t seed = 1;
    auto* bal = app.add_subcommand("ballot", "cast elector votes on a root-management action and evaluate it");
    bal->add_option("action", action, "endorse-root | revoke-root | endorse-elector | revoke-elector")
        ->required()
        ->check(CLI::IsMember({"endorse-root", "revoke-root", "endorse-elector", "revoke-elector"}));
    bal->add_option("--vote", voters, "index of a voting elector (repeatable)");
    bal->add_option("--target", target, "elector index for revoke-elector");
    bal->add_option("--seed", seed, "deterministic seed");
    bal->add_option("--out", out, "write the ballot file");

    std::string scenario_path, trace_path, metrics_path;
    auto* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON")->required();
    run->add_option("--trace", trace_path, "write the event trace (JSON lines)");
    run->add_option("--metrics", metrics_path, "write the metrics JSON");

    std::string vec_path;
    auto* vec = app.add_subcommand("vectors", "golden vectors");
    vec->require_subcommand(1);
    auto* gen = vec->add_subcommand("generate", "write the golden vectors computed by this library");
    gen->add_option("--out", vec_path, "output file (default stdout)");
    auto* chk = vec->add_subcommand("check", "recompute every vector in a golden file");
    chk->add_option("file", vec_path, "golden file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        // --help is reported as a parse "error" with a zero exit code.
        return app.exit(ex) == 0 ? 0 : 2;
    }

    try {
        if (*boot) return cmd_bootstrap(fleet, out);
        if (*prov) return cmd_provision(fleet, out);
        if (*rev) return cmd_revoke(fleet, targets, out);
        if (*inspect) return cmd_crl_inspect(crl_path);
        if (*bal) return cmd_ballot(seed, action, voters, target, out);
        if (*run) return cmd_run(scenario_path, trace_path, metrics_path);
        if (*gen) return cmd_vectors_generate(vec_path);
        if (*chk) return cmd_vectors_check(vec_path);
    } catch (const usage_error& ex) {
        std::cerr << "error: " << ex.what() << "\n\n" << app.help();
        return usage_exit;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
