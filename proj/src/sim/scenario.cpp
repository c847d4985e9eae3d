#include <scms/sim/scenario.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace scms::sim {

using nlohmann::json;

namespace {

const std::set<std::string> event_types{"misbehave",     "revoke_other",    "mitm",        "eca_recertify",
                                        "root_rotation", "elector_replace", "reestablish", "rebootstrap"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw scenario_error(where + ": unknown field '" + key + "'");
    }
}

template <typename T>
void take(const json& obj, const char* key, T& out)
{
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& ex) {
        throw scenario_error(std::string("field '") + key + "': " + ex.what());
    }
}

} // namespace

scenario scenario::parse(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& ex) {
        throw scenario_error(std::string("invalid JSON: ") + ex.what());
    }
    if (!doc.is_object()) throw scenario_error("scenario must be a JSON object");
    reject_unknown(doc,
                   {"name", "seed", "devices", "rses", "batch_size", "weeks", "span", "lookahead", "threshold",
                    "window", "bsms_per_device", "rotation_minutes", "ma_daily_cap", "mode", "threads", "events",
                    "expect", "description"},
                   "scenario");

    scenario s;
    take(doc, "name", s.name);
    take(doc, "seed", s.seed);
    take(doc, "devices", s.devices);
    take(doc, "rses", s.rses);
    take(doc, "batch_size", s.batch_size);
    take(doc, "weeks", s.weeks);
    take(doc, "span", s.span);
    take(doc, "lookahead", s.lookahead);
    take(doc, "threshold", s.threshold);
    take(doc, "window", s.window);
    take(doc, "bsms_per_device", s.bsms_per_device);
    take(doc, "rotation_minutes", s.rotation_minutes);
    take(doc, "ma_daily_cap", s.ma_daily_cap);
    take(doc, "threads", s.threads);
    std::string mode = "deterministic";
    take(doc, "mode", mode);
    if (mode != "deterministic" && mode != "stress") throw scenario_error("mode must be deterministic or stress");
    s.stress = mode == "stress";

    if (s.devices + s.rses == 0) throw scenario_error("scenario needs at least one device");
    if (s.weeks == 0) throw scenario_error("weeks must be positive");
    if (s.batch_size == 0) throw scenario_error("batch_size must be positive");
    if (s.lookahead == 0) throw scenario_error("lookahead must be positive");
    if (s.threshold == 0) throw scenario_error("threshold must be positive");

    if (doc.contains("events")) {
        if (!doc["events"].is_array()) throw scenario_error("events must be an array");
        for (const auto& ev : doc["events"]) {
            if (!ev.is_object()) throw scenario_error("event must be an object");
            reject_unknown(ev, {"period", "type", "device", "reporters", "count", "revoke_old"}, "event");
            scenario_event e;
            take(ev, "period", e.period);
            take(ev, "type", e.type);
            take(ev, "device", e.device);
            take(ev, "reporters", e.reporters);
            take(ev, "count", e.count);
            take(ev, "revoke_old", e.revoke_old);
            if (!event_types.count(e.type)) throw scenario_error("unknown event type '" + e.type + "'");
            if (e.period >= s.weeks) throw scenario_error("event period beyond the scenario");
            s.events.push_back(e);
        }
    }
    if (doc.contains("expect")) {
        if (!doc["expect"].is_object()) throw scenario_error("expect must be an object");
        for (const auto& [key, value] : doc["expect"].items()) {
            if (!value.is_number() && !value.is_boolean()) {
                throw scenario_error("expected value for '" + key + "' must be a number");
            }
            s.expect[key] = value.is_boolean() ? (value.get<bool>() ? 1.0 : 0.0) : value.get<double>();
        }
    }
    return s;
}

scenario scenario::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw scenario_error("cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str());
}

} // namespace scms::sim
