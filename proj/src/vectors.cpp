#include <scms/vectors.hpp>
#include <scms/butterfly.hpp>
#include <scms/crypto/hash.hpp>
#include <scms/crypto/signature.hpp>
#include <scms/linkage.hpp>

#include <istream>
#include <sstream>
#include <stdexcept>

namespace scms::vectors {

namespace {

using butterfly::key_kind;
using crypto::symmetric_key;

std::string hex(byte_view b)
{
    return b.empty() ? "-" : to_hex(b);
}

std::string hex32(std::uint32_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(8, '0');
    for (int n = 7; n >= 0; --n, v >>= 4) {
        out[n] = digits[v & 0xf];
    }
    return out;
}

byte_buffer derive(const std::string& label, std::size_t n)
{
    const auto d = crypto::sha256(as_bytes(label));
    return byte_buffer(d.begin(), d.begin() + n);
}

crypto::scalar derive_scalar(const std::string& label)
{
    return crypto::scalar::reduce(crypto::sha256(as_bytes(label)));
}

key_kind parse_kind(const std::string& s)
{
    if (s == "signing") return key_kind::signing;
    if (s == "encryption") return key_kind::encryption;
    throw std::invalid_argument("unknown key kind " + s);
}

std::uint32_t parse_u32(const std::string& s, int base = 10)
{
    return static_cast<std::uint32_t>(std::stoul(s, nullptr, base));
}

linkage::linkage_seed seed_from_hex(const std::string& s)
{
    return {array_from_hex<16>(s), 0};
}

// Each function recomputes one record kind from its inputs.

std::string compute(const record& rec)
{
    const auto& k = rec.kind;
    if (k == "aes_block" || k == "prf_block") {
        const auto key = symmetric_key(array_from_hex<16>(rec.at("key")));
        const auto block = array_from_hex<16>(rec.at("block"));
        return hex(k == "aes_block" ? crypto::aes128_encrypt(key, block) : crypto::prf_block(key, block));
    }
    if (k == "hash_truncated") {
        return hex(crypto::hash_truncated(from_hex(rec.at("data")), std::stoul(rec.at("u"))));
    }
    if (k == "expand_f") {
        const auto f = butterfly::expand(symmetric_key(array_from_hex<16>(rec.at("key"))), parse_kind(rec.at("kind")),
                                         {parse_u32(rec.at("i")), parse_u32(rec.at("j"))});
        return hex(f.encode());
    }
    if (k == "evolve_seed") {
        return hex(linkage::evolve_seed({parse_u32(rec.at("la_id"), 16)}, seed_from_hex(rec.at("seed"))).value);
    }
    if (k == "evolve_seed_steps") {
        return hex(linkage::seed_at({parse_u32(rec.at("la_id"), 16)}, seed_from_hex(rec.at("seed")),
                                    parse_u32(rec.at("steps")))
                       .value);
    }
    if (k == "pre_linkage") {
        return hex(linkage::pre_linkage({parse_u32(rec.at("la_id"), 16)}, seed_from_hex(rec.at("seed")),
                                        parse_u32(rec.at("j")))
                       .value);
    }
    if (k == "linkage_value") {
        const linkage::la_id la1{parse_u32(rec.at("la1"), 16)};
        const linkage::la_id la2{parse_u32(rec.at("la2"), 16)};
        const auto i = parse_u32(rec.at("i"));
        const auto j = parse_u32(rec.at("j"));
        const auto p1 = linkage::pre_linkage(la1, linkage::seed_at(la1, seed_from_hex(rec.at("seed1")), i), j);
        const auto p2 = linkage::pre_linkage(la2, linkage::seed_at(la2, seed_from_hex(rec.at("seed2")), i), j);
        return hex(linkage::combine(p1, p2).value);
    }
    if (k == "cocoon") {
        const auto seed = crypto::group_element::decode(from_hex(rec.at("seed")));
        const auto key = symmetric_key(array_from_hex<16>(rec.at("key")));
        const auto kind = parse_kind(rec.at("kind"));
        const butterfly::time_index idx{parse_u32(rec.at("i")), parse_u32(rec.at("j"))};
        return hex(butterfly::cocoon_from_expansion(seed, butterfly::expand(key, kind, idx)).encode());
    }
    if (k == "public_key") {
        return hex(crypto::group_element::mul_base(crypto::scalar::decode(from_hex(rec.at("priv")))).encode());
    }
    if (k == "ecdsa_rfc6979") {
        const auto priv = crypto::scalar::decode(from_hex(rec.at("priv")));
        const auto digest = array_from_hex<32>(rec.at("digest"));
        return hex(crypto::sign(priv, digest).value);
    }
    throw std::invalid_argument("unknown vector kind " + k);
}

std::string expected_of(const record& rec)
{
    return rec.kind == "ecdsa_rfc6979" ? rec.at("sig") : rec.at("out");
}

} // namespace

const std::string& record::at(const std::string& key) const
{
    const auto it = fields.find(key);
    if (it == fields.end()) {
        throw std::invalid_argument("vector line " + std::to_string(line) + " lacks field " + key);
    }
    return it->second;
}

std::vector<record> parse(std::istream& in)
{
    std::vector<record> out;
    std::string text;
    int line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty() || text[0] == '#') {
            continue;
        }
        std::istringstream ss(text);
        record rec;
        rec.line = line_no;
        ss >> rec.kind;
        std::string token;
        while (ss >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) {
                throw std::invalid_argument("vector line " + std::to_string(line_no) + ": malformed token " + token);
            }
            rec.fields[token.substr(0, eq)] = token.substr(eq + 1);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<mismatch> check(const std::vector<record>& records)
{
    std::vector<mismatch> out;
    for (const auto& rec : records) {
        const auto actual = compute(rec);
        const auto& expected = expected_of(rec);
        if (actual != expected) {
            out.push_back({rec.line, rec.kind, expected, actual});
        }
    }
    return out;
}

std::string generate()
{
    std::ostringstream o;
    o << "# golden vectors, generated by tests/oracle/gen_golden.py\n";

    const std::vector<byte_buffer> keys{byte_buffer(16, 0x00), from_hex("000102030405060708090a0b0c0d0e0f"),
                                        byte_buffer(16, 0xff), derive("prf-key-3", 16)};
    const std::vector<byte_buffer> blocks{byte_buffer(16, 0x00), from_hex("101112131415161718191a1b1c1d1e1f"),
                                          byte_buffer(16, 0xff), derive("prf-block-3", 16)};
    for (std::size_t n = 0; n < keys.size(); ++n) {
        const auto key = symmetric_key::from_bytes(keys[n]);
        crypto::block128 block{};
        std::copy(blocks[n].begin(), blocks[n].end(), block.begin());
        o << "aes_block key=" << hex(keys[n]) << " block=" << hex(blocks[n])
          << " out=" << hex(crypto::aes128_encrypt(key, block)) << "\n";
        o << "prf_block key=" << hex(keys[n]) << " block=" << hex(blocks[n])
          << " out=" << hex(crypto::prf_block(key, block)) << "\n";
    }

    const std::vector<std::pair<byte_buffer, std::size_t>> hashes{
        {{}, 32}, {from_hex("616263"), 16}, {from_hex("616263"), 32}, {derive("hash-data", 32), 8}};
    for (const auto& [data, u] : hashes) {
        o << "hash_truncated data=" << hex(data) << " u=" << u << " out=" << hex(crypto::hash_truncated(data, u))
          << "\n";
    }

    struct exp_case
    {
        byte_buffer key;
        const char* kind;
        std::uint32_t i, j;
    };
    const std::vector<exp_case> exp_cases{
        {byte_buffer(16, 0), "signing", 0, 0},
        {byte_buffer(16, 0), "signing", 0, 1},
        {byte_buffer(16, 0), "encryption", 0, 0},
        {keys[1], "signing", 1, 2},
        {keys[1], "encryption", 1, 2},
        {derive("butterfly-key-1", 16), "signing", 52, 19},
        {derive("butterfly-key-1", 16), "encryption", 0xffffffffu, 0xffffffffu},
        {byte_buffer(16, 0xff), "signing", 7, 1000},
    };
    for (const auto& c : exp_cases) {
        const auto f = butterfly::expand(symmetric_key::from_bytes(c.key), parse_kind(c.kind), {c.i, c.j});
        o << "expand_f key=" << hex(c.key) << " kind=" << c.kind << " i=" << c.i << " j=" << c.j
          << " out=" << hex(f.encode()) << "\n";
    }

    const std::vector<std::pair<std::uint32_t, byte_buffer>> evolve_cases{
        {1, byte_buffer(16, 0)}, {2, byte_buffer(16, 0)}, {0xa1b2c3d4u, derive("seed-x", 16)}};
    for (const auto& [la, seed] : evolve_cases) {
        const auto next = linkage::evolve_seed({la}, {array_from_hex<16>(to_hex(seed)), 0});
        o << "evolve_seed la_id=" << hex32(la) << " seed=" << hex(seed) << " out=" << hex(next.value) << "\n";
    }
    const auto chain_seed = derive("chain-seed", 16);
    o << "evolve_seed_steps la_id=00000007 seed=" << hex(chain_seed)
      << " steps=10 out=" << hex(linkage::seed_at({7}, {array_from_hex<16>(to_hex(chain_seed)), 0}, 10).value)
      << "\n";

    struct plv_case
    {
        std::uint32_t la;
        byte_buffer seed;
        std::uint32_t j;
    };
    const std::vector<plv_case> plv_cases{{0, byte_buffer(16, 0), 0},
                                          {0, byte_buffer(16, 0), 1},
                                          {1, derive("plv-seed", 16), 19},
                                          {0xffffffffu, byte_buffer(16, 0xff), 0xffffffffu}};
    for (const auto& c : plv_cases) {
        const auto plv = linkage::pre_linkage({c.la}, {array_from_hex<16>(to_hex(c.seed)), 0}, c.j);
        o << "pre_linkage la_id=" << hex32(c.la) << " seed=" << hex(c.seed) << " j=" << c.j
          << " out=" << hex(plv.value) << "\n";
    }

    struct lv_case
    {
        std::uint32_t la1, la2, i, j;
    };
    const std::vector<lv_case> lv_cases{{1, 2, 0, 0}, {1, 2, 3, 5}, {0x11, 0x22, 9, 19}};
    for (std::size_t n = 0; n < lv_cases.size(); ++n) {
        const auto& c = lv_cases[n];
        const auto s1 = derive("lv-seed1-" + std::to_string(n), 16);
        const auto s2 = derive("lv-seed2-" + std::to_string(n), 16);
        const auto p1 = linkage::pre_linkage({c.la1}, linkage::seed_at({c.la1}, {array_from_hex<16>(to_hex(s1)), 0}, c.i), c.j);
        const auto p2 = linkage::pre_linkage({c.la2}, linkage::seed_at({c.la2}, {array_from_hex<16>(to_hex(s2)), 0}, c.i), c.j);
        o << "linkage_value la1=" << hex32(c.la1) << " seed1=" << hex(s1) << " la2=" << hex32(c.la2)
          << " seed2=" << hex(s2) << " i=" << c.i << " j=" << c.j << " plv1=" << hex(p1.value)
          << " plv2=" << hex(p2.value) << " out=" << hex(linkage::combine(p1, p2).value) << "\n";
    }

    struct cocoon_case
    {
        const char* kind;
        std::uint32_t i, j;
    };
    const std::vector<cocoon_case> cocoon_cases{{"signing", 0, 0}, {"signing", 3, 7}, {"encryption", 3, 7}};
    for (std::size_t n = 0; n < cocoon_cases.size(); ++n) {
        const auto& c = cocoon_cases[n];
        const auto a = derive_scalar("caterpillar-" + std::to_string(n));
        const auto key = derive("caterpillar-key-" + std::to_string(n), 16);
        const auto seed = crypto::group_element::mul_base(a);
        const auto cocoon = butterfly::cocoon_from_expansion(
            seed, butterfly::expand(symmetric_key::from_bytes(key), parse_kind(c.kind), {c.i, c.j}));
        o << "cocoon seed=" << hex(seed.encode()) << " key=" << hex(key) << " kind=" << c.kind << " i=" << c.i
          << " j=" << c.j << " out=" << hex(cocoon.encode()) << "\n";
    }

    for (const char* label : {"pub-1", "pub-2"}) {
        const auto s = derive_scalar(label);
        o << "public_key priv=" << hex(s.encode()) << " out=" << hex(crypto::group_element::mul_base(s).encode())
          << "\n";
    }

    const std::vector<std::pair<const char*, const char*>> sig_cases{{"sig-key-1", "sample"}, {"sig-key-2", "test"}};
    for (const auto& [label, msg] : sig_cases) {
        const auto d = derive_scalar(label);
        const auto digest = crypto::sha256(as_bytes(msg));
        o << "ecdsa_rfc6979 priv=" << hex(d.encode()) << " digest=" << hex(digest)
          << " sig=" << hex(crypto::sign(d, digest).value) << "\n";
    }
    return o.str();
}

} // namespace scms::vectors
