#pragma once

#include <scms/errors.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace scms::sim {

/// Malformed scenario file: bad JSON, unknown field, wrong type or value.
class scenario_error : public error
{
public:
    using error::error;
};

/// Something the scenario script does at a given period.
///
///   misbehave       device `device` sends an implausible BSM heard by `reporters` peers
///   revoke_other    the MA revokes RSE `device` by CertId
///   mitm            an RA insider substitutes the response key in `count` requests
///   eca_recertify   new ECA certificate; with `revoke_old` the old one goes on the CRL
///   root_rotation   electors revoke the root and endorse a new one, authorities re-certified
///   elector_replace electors revoke one of their own and endorse a replacement
///   reestablish     device `device` rolls its enrollment key over
///   rebootstrap     device `device` goes back through the DCM
struct scenario_event
{
    std::uint32_t period = 0;
    std::string type;
    std::size_t device = 0;
    std::size_t reporters = 3;
    std::size_t count = 1;
    bool revoke_old = false;
};

struct scenario
{
    std::string name = "scenario";
    std::uint64_t seed = 1;
    std::size_t devices = 10; // OBEs
    std::size_t rses = 0;
    std::uint16_t batch_size = 20;
    std::uint32_t weeks = 4;
    std::uint32_t span = 0;      // periods requested at provisioning; 0 means `weeks`
    std::uint32_t lookahead = 4; // periods the RA pre-generates
    std::size_t threshold = 3;   // distinct reporters before the MA acts
    std::uint32_t window = 1;    // detector window in periods
    std::size_t bsms_per_device = 1;
    std::uint32_t rotation_minutes = 5;
    std::uint32_t ma_daily_cap = 1000;
    bool stress = false;
    std::size_t threads = 4;
    std::vector<scenario_event> events;
    /// Metric name -> required value; checked after the run.
    std::map<std::string, double> expect;

    std::uint32_t provisioned_span() const { return span ? span : weeks; }

    static scenario parse(const std::string& json_text);
    static scenario load(const std::string& path);
};

} // namespace scms::sim
