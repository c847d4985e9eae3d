#pragma once

#include <scms/cert/certificate.hpp>
#include <scms/cert/trust_store.hpp>

#include <map>
#include <set>

namespace scms::rootmgmt {

using cert::cert_id;
using cert::certificate;

enum class action_kind : std::uint8_t {
    endorse_root = 1,
    endorse_elector = 2,
    revoke_root = 3,
    revoke_elector = 4,
};

std::string_view to_string(action_kind k);

struct vote
{
    cert_id elector{};
    crypto::signature signature;
};

/// One action on one object certificate, carrying every elector vote cast for it.
struct action
{
    action_kind kind = action_kind::endorse_root;
    certificate object;
    std::vector<vote> votes;

    void write(writer& w) const;
    static action read(reader& r);
};

/// What an elector signs: domain tag, action kind and the object's encoding.
crypto::digest256 action_digest(action_kind kind, const certificate& object);

/// Signs with the algorithm the elector's own certificate uses.
vote cast_vote(action_kind kind, const certificate& object, const certificate& elector,
               const crypto::scalar& elector_private);

struct ballot
{
    std::vector<action> actions;

    byte_buffer encode() const;
    static ballot decode(byte_view data);
};

/// Self-signed elector certificate.
certificate make_elector(const std::string& name, const crypto::key_pair& keys, crypto::signature_algorithm alg,
                         cert::validity valid);

struct verdict
{
    std::vector<action> accepted;
    std::vector<std::pair<std::size_t, std::string>> rejected; // action index, reason
};

/// Elector set, endorsed roots and the quorum as seen by one component.
/// A root is trusted while the votes of its non-revoked endorsers reach the quorum.
class trust_state
{
public:
    /// The initial electors are trusted implicitly. Quorum defaults to n+1 for 2n+1 electors.
    static trust_state initial(const std::vector<certificate>& electors, std::optional<std::size_t> quorum = {});

    std::size_t quorum() const { return quorum_; }
    std::size_t active_electors() const;
    bool elector_active(const cert_id& id) const;

    /// Pure: same ballot and state give the same verdict.
    verdict validate(const ballot& b) const;

    /// Precondition: `a` came out of validate(). Re-applying is harmless.
    void apply(const action& a);

    /// validate + apply in order; returns the verdict.
    verdict process(const ballot& b);

    bool root_trusted(const cert_id& id) const;
    std::vector<certificate> trusted_roots() const;
    std::vector<certificate> electors() const;

    /// Pushes the currently trusted roots into a chain-verification store.
    void install_into(cert::trust_store& store) const;

    byte_buffer encode() const;
    static trust_state decode(byte_view data);

private:
    struct elector_entry
    {
        certificate cert;
        bool revoked = false;
    };
    struct root_entry
    {
        certificate cert;
        std::set<cert_id> endorsers;
        bool revoked = false;
    };

    std::optional<std::string> check_action(const action& a, std::set<cert_id>* voters) const;

    std::size_t quorum_ = 1;
    std::map<cert_id, elector_entry> electors_;
    std::map<cert_id, root_entry> roots_;
};

} // namespace scms::rootmgmt
