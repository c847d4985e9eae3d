#pragma once

#include <scms/bytes.hpp>

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace scms::sim {

class world;

/// Which information ended up in which component's store. Every field
/// counts violations; a clean run has all zeros.
struct separation_report
{
    std::size_t ra_pseudonym_certificates = 0; // plaintext certificate keys or linkage values at the RA
    std::size_t ra_pre_linkage_values = 0;
    std::size_t pca_enrollment_certificates = 0;
    std::size_t la1_foreign_material = 0; // LA2 seeds or pre-linkage values at LA1
    std::size_t la2_foreign_material = 0;
    std::size_t ma_unexpected_material = 0; // plvs, or seeds other than ls(i) of a revoked chain at i

    std::size_t ma_revocation_seeds = 0; // expected material, for the record
    std::vector<std::string> findings;

    std::size_t violations() const;
};

/// Scans every namespace read-only after a run.
separation_report audit_separation(world& w);

/// Matches every PCA/LA/RA audit entry for an MA request with the MA's own
/// "sent" entry (same destination, same object hash) and vice versa.
struct reconciliation_report
{
    std::size_t sent = 0;
    std::size_t served = 0;
    std::size_t refused = 0;
    std::size_t orphan_responses = 0; // logged at a component, never sent by the MA
    std::size_t unanswered = 0;       // sent by the MA, logged nowhere

    std::size_t orphans() const { return orphan_responses + unanswered; }
};

reconciliation_report reconcile_audit(world& w);

/// Finds any of a set of byte patterns (8 bytes or longer) inside blobs.
class pattern_index
{
public:
    void add(byte_view pattern, std::string label);
    /// Labels of every pattern occurring in `blob`.
    std::vector<std::string> find(byte_view blob) const;
    std::size_t size() const { return patterns_.size(); }

private:
    std::vector<std::pair<byte_buffer, std::string>> patterns_;
    std::unordered_multimap<std::uint64_t, std::size_t> by_prefix_;
};

} // namespace scms::sim
