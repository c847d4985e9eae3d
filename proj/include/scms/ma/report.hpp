#pragma once

#include <scms/cert/signed_message.hpp>
#include <scms/crypto/hybrid.hpp>

#include <memory>

namespace scms::ma {

using cert::certificate;

enum class report_kind : std::uint8_t {
    misbehavior = 1,          // a received message judged implausible
    provisioning_failure = 2, // a batch response that failed the device's checks
};

/// What the reporter signs. Minimal format: the reported certificate and the
/// digest of the offending payload.
struct report_body
{
    report_kind kind = report_kind::misbehavior;
    certificate reported;
    crypto::digest256 payload_digest{};
    std::uint32_t period = 0;

    byte_buffer encode() const;
    static report_body decode(byte_view data);
};

/// Signs with the reporter's certificate and hybrid-encrypts to the MA.
byte_buffer seal_report(const report_body& body, const certificate& reporter, const crypto::scalar& reporter_private,
                        const crypto::group_element& ma_key, crypto::random_source& rng);

/// A verified report as the MA stores it. Only the reporter's CertId is kept:
/// it is all distinct-reporter counting needs.
struct report_record
{
    report_body body;
    cert::cert_id reporter{};
    std::uint32_t received = 0;

    byte_buffer encode() const;
    static report_record decode(byte_view data);
};

/// Global detection, pluggable.
class detector
{
public:
    virtual ~detector() = default;
    virtual std::vector<linkage::linkage_value> detect(const std::vector<report_record>& reports,
                                                       std::uint32_t period) const = 0;
};

/// Flags a linkage value once `threshold` distinct reporter certificates have
/// reported it within the last `window` periods (current period included).
class threshold_detector final : public detector
{
public:
    threshold_detector(std::size_t threshold, std::uint32_t window) : threshold_(threshold), window_(window) {}

    std::vector<linkage::linkage_value> detect(const std::vector<report_record>& reports,
                                               std::uint32_t period) const override;

private:
    std::size_t threshold_;
    std::uint32_t window_;
};

} // namespace scms::ma
