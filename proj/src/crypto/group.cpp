#include <scms/crypto/group.hpp>

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/obj_mac.h>

#include <stdexcept>

namespace scms::crypto {

namespace {

struct bn_deleter
{
    void operator()(BIGNUM* bn) const { BN_free(bn); }
};
using bignum = std::unique_ptr<BIGNUM, bn_deleter>;

struct ctx_deleter
{
    void operator()(BN_CTX* ctx) const { BN_CTX_free(ctx); }
};

struct curve
{
    EC_GROUP* group = nullptr;
    BIGNUM* order = nullptr;
    byte_array<32> order_bytes{};

    curve()
    {
        group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
        if (!group) {
            throw std::runtime_error("P-256 unavailable");
        }
        order = BN_new();
        EC_GROUP_get_order(group, order, nullptr);
        BN_bn2binpad(order, order_bytes.data(), 32);
    }
};

const curve& p256()
{
    static const curve c;
    return c;
}

BN_CTX* bn_ctx()
{
    thread_local std::unique_ptr<BN_CTX, ctx_deleter> ctx(BN_CTX_new());
    return ctx.get();
}

bignum to_bn(const byte_array<32>& v)
{
    bignum bn(BN_bin2bn(v.data(), 32, nullptr));
    if (!bn) {
        throw std::runtime_error("BN_bin2bn failed");
    }
    return bn;
}

byte_array<32> from_bn(const BIGNUM* bn)
{
    byte_array<32> out{};
    BN_bn2binpad(bn, out.data(), 32);
    return out;
}

void check(int rc, const char* what)
{
    if (rc != 1) {
        throw std::runtime_error(what);
    }
}

void free_point(const ec_point_st* p)
{
    EC_POINT_free(const_cast<EC_POINT*>(p));
}

std::shared_ptr<const ec_point_st> wrap(EC_POINT* p)
{
    return std::shared_ptr<const ec_point_st>(p, free_point);
}

EC_POINT* new_point()
{
    EC_POINT* p = EC_POINT_new(p256().group);
    if (!p) {
        throw std::runtime_error("EC_POINT_new failed");
    }
    return p;
}

} // namespace

const byte_array<32>& group_order()
{
    return p256().order_bytes;
}

// --- scalar -----------------------------------------------------------------

scalar scalar::from_u64(std::uint64_t v)
{
    byte_array<8> raw{};
    for (int i = 0; i < 8; ++i) {
        raw[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
    }
    return reduce(raw);
}

scalar scalar::reduce(byte_view big_endian)
{
    bignum bn(BN_bin2bn(big_endian.data(), static_cast<int>(big_endian.size()), nullptr));
    bignum r(BN_new());
    check(BN_nnmod(r.get(), bn.get(), p256().order, bn_ctx()), "BN_nnmod failed");
    return scalar(from_bn(r.get()));
}

scalar scalar::decode(byte_view encoded)
{
    if (encoded.size() != encoded_size) {
        throw std::invalid_argument("scalar encoding must be 32 bytes");
    }
    byte_array<32> v{};
    std::copy(encoded.begin(), encoded.end(), v.begin());
    if (!(v < p256().order_bytes)) {
        throw std::invalid_argument("scalar not reduced modulo group order");
    }
    return scalar(v);
}

scalar scalar::random(random_source& rng)
{
    // 48 bytes reduced mod l: statistical distance to uniform below 2^-128.
    for (;;) {
        const auto raw = rng.bytes<48>();
        auto s = reduce(raw);
        if (!s.is_zero()) {
            return s;
        }
    }
}

bool scalar::is_zero() const noexcept
{
    for (auto b : value_) {
        if (b != 0) {
            return false;
        }
    }
    return true;
}

scalar scalar::operator+(const scalar& rhs) const
{
    auto a = to_bn(value_);
    auto b = to_bn(rhs.value_);
    bignum r(BN_new());
    check(BN_mod_add(r.get(), a.get(), b.get(), p256().order, bn_ctx()), "BN_mod_add failed");
    return scalar(from_bn(r.get()));
}

scalar scalar::operator-(const scalar& rhs) const
{
    auto a = to_bn(value_);
    auto b = to_bn(rhs.value_);
    bignum r(BN_new());
    check(BN_mod_sub(r.get(), a.get(), b.get(), p256().order, bn_ctx()), "BN_mod_sub failed");
    return scalar(from_bn(r.get()));
}

scalar scalar::operator*(const scalar& rhs) const
{
    auto a = to_bn(value_);
    auto b = to_bn(rhs.value_);
    bignum r(BN_new());
    check(BN_mod_mul(r.get(), a.get(), b.get(), p256().order, bn_ctx()), "BN_mod_mul failed");
    return scalar(from_bn(r.get()));
}

scalar scalar::operator-() const
{
    return scalar() - *this;
}

scalar scalar::inverse() const
{
    if (is_zero()) {
        throw std::domain_error("inverse of zero scalar");
    }
    auto a = to_bn(value_);
    bignum r(BN_mod_inverse(nullptr, a.get(), p256().order, bn_ctx()));
    if (!r) {
        throw std::runtime_error("BN_mod_inverse failed");
    }
    return scalar(from_bn(r.get()));
}

// --- group_element ----------------------------------------------------------

group_element::group_element() : group_element(wrap([] {
                                     EC_POINT* p = new_point();
                                     EC_POINT_set_to_infinity(p256().group, p);
                                     return p;
                                 }()))
{
}

group_element::group_element(std::shared_ptr<const ec_point_st> point) : point_(std::move(point))
{
    const EC_GROUP* group = p256().group;
    if (EC_POINT_is_at_infinity(group, point_.get())) {
        encoding_.fill(0);
        return;
    }
    const auto len = EC_POINT_point2oct(group, point_.get(), POINT_CONVERSION_COMPRESSED, encoding_.data(),
                                        encoding_.size(), bn_ctx());
    if (len != encoded_size) {
        throw std::runtime_error("point encoding failed");
    }
}

const group_element& group_element::generator()
{
    static const group_element g = [] {
        EC_POINT* p = EC_POINT_dup(EC_GROUP_get0_generator(p256().group), p256().group);
        return group_element(wrap(p));
    }();
    return g;
}

group_element group_element::decode(byte_view encoded)
{
    if (encoded.size() != encoded_size) {
        throw std::invalid_argument("group element encoding must be 33 bytes");
    }
    if (encoded[0] == 0x00) {
        for (auto b : encoded) {
            if (b != 0) {
                throw std::invalid_argument("malformed identity encoding");
            }
        }
        return group_element();
    }
    if (encoded[0] != 0x02 && encoded[0] != 0x03) {
        throw std::invalid_argument("group element must use compressed encoding");
    }
    EC_POINT* p = new_point();
    if (EC_POINT_oct2point(p256().group, p, encoded.data(), encoded.size(), bn_ctx()) != 1) {
        EC_POINT_free(p);
        throw std::invalid_argument("point not on curve");
    }
    return group_element(wrap(p));
}

group_element group_element::mul_base(const scalar& s)
{
    auto k = to_bn(s.encode());
    EC_POINT* r = new_point();
    if (EC_POINT_mul(p256().group, r, k.get(), nullptr, nullptr, bn_ctx()) != 1) {
        EC_POINT_free(r);
        throw std::runtime_error("EC_POINT_mul failed");
    }
    return group_element(wrap(r));
}

group_element group_element::mul_base_add(const scalar& a, const scalar& b, const group_element& p)
{
    auto ka = to_bn(a.encode());
    auto kb = to_bn(b.encode());
    EC_POINT* r = new_point();
    if (EC_POINT_mul(p256().group, r, ka.get(), p.point_.get(), kb.get(), bn_ctx()) != 1) {
        EC_POINT_free(r);
        throw std::runtime_error("EC_POINT_mul failed");
    }
    return group_element(wrap(r));
}

bool group_element::is_identity() const noexcept
{
    return encoding_[0] == 0;
}

byte_array<32> group_element::x_coordinate() const
{
    byte_array<32> x{};
    std::copy(encoding_.begin() + 1, encoding_.end(), x.begin());
    return x;
}

group_element group_element::operator+(const group_element& rhs) const
{
    EC_POINT* r = new_point();
    if (EC_POINT_add(p256().group, r, point_.get(), rhs.point_.get(), bn_ctx()) != 1) {
        EC_POINT_free(r);
        throw std::runtime_error("EC_POINT_add failed");
    }
    return group_element(wrap(r));
}

group_element group_element::operator-() const
{
    EC_POINT* r = EC_POINT_dup(point_.get(), p256().group);
    if (!r || EC_POINT_invert(p256().group, r, bn_ctx()) != 1) {
        EC_POINT_free(r);
        throw std::runtime_error("EC_POINT_invert failed");
    }
    return group_element(wrap(r));
}

group_element group_element::operator-(const group_element& rhs) const
{
    return *this + (-rhs);
}

group_element operator*(const scalar& s, const group_element& p)
{
    if (&p == &group_element::generator() || p == group_element::generator()) {
        return group_element::mul_base(s);
    }
    auto k = to_bn(s.encode());
    EC_POINT* r = new_point();
    if (EC_POINT_mul(p256().group, r, nullptr, p.point_.get(), k.get(), bn_ctx()) != 1) {
        EC_POINT_free(r);
        throw std::runtime_error("EC_POINT_mul failed");
    }
    return group_element(wrap(r));
}

group_element scalar_mul_add(const group_element& base, const scalar& s, const group_element& offset)
{
    return offset + s * base;
}

key_pair key_pair::from_private(const scalar& priv)
{
    return {priv, group_element::mul_base(priv)};
}

key_pair key_pair::generate(random_source& rng)
{
    return from_private(scalar::random(rng));
}

} // namespace scms::crypto
