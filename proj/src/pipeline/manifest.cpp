#include "circadian/manifest.hpp"
#include "circadian/series.hpp"

#include "internal/text.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace circadian {

using json = nlohmann::ordered_json;

std::optional<std::filesystem::path> Manifest::signal_path(const ParticipantEntry& p, const std::string& key) const
{
    const auto it = p.signals.find(key);
    if (it == p.signals.end())
        return std::nullopt;
    std::filesystem::path path(it->second);
    return path.is_absolute() ? path : base_dir / path;
}

Manifest load_manifest(const std::filesystem::path& path)
{
    json doc;
    try {
        doc = json::parse(detail::read_file(path));
    } catch (const json::exception& e) {
        throw Error("manifest " + path.string() + ": " + e.what());
    }
    const auto fail = [&](const std::string& what) { throw Error("manifest " + path.string() + ": " + what); };
    if (!doc.is_object() || !doc.contains("participants") || !doc["participants"].is_array())
        fail("expected an object with a 'participants' array");
    if (doc.value("schema_version", 0) != Manifest::kSchemaVersion)
        fail("unsupported schema_version");

    Manifest m;
    m.base_dir = path.parent_path();
    std::set<std::string> seen;
    for (const auto& p : doc["participants"]) {
        try {
            ParticipantEntry e;
            e.id = p.at("id").get<std::string>();
            if (e.id.empty() || !seen.insert(e.id).second)
                fail("empty or duplicate participant id '" + e.id + "'");
            e.utc_offset_minutes = p.value("utc_offset_minutes", 0.0);
            e.collection_start_ms = p.at("collection_start_ms").get<std::int64_t>();
            e.collection_end_ms = p.at("collection_end_ms").get<std::int64_t>();
            if (e.collection_end_ms <= e.collection_start_ms)
                fail("participant '" + e.id + "': collection end must follow start");
            if (p.contains("signals"))
                for (const auto& [k, v] : p["signals"].items())
                    e.signals[k] = v.get<std::string>();
            if (p.contains("meq"))
                for (const auto& a : p["meq"])
                    e.meq.push_back({a.at("day").get<int>(), a.at("score").get<double>()});
            if (p.contains("age") && !p["age"].is_null())
                e.age = p["age"].get<double>();
            if (p.contains("sex") && !p["sex"].is_null()) {
                e.sex = p["sex"].get<int>();
                if (*e.sex != 0 && *e.sex != 1)
                    fail("participant '" + e.id + "': sex must be 0 or 1");
            }
            m.participants.push_back(std::move(e));
        } catch (const json::exception& ex) {
            fail(ex.what());
        }
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m)
{
    json doc;
    doc["schema_version"] = Manifest::kSchemaVersion;
    json list = json::array();
    for (const auto& e : m.participants) {
        json p;
        p["id"] = e.id;
        p["utc_offset_minutes"] = e.utc_offset_minutes;
        p["collection_start_ms"] = e.collection_start_ms;
        p["collection_end_ms"] = e.collection_end_ms;
        json sig = json::object();
        for (const auto& [k, v] : e.signals)
            sig[k] = v;
        p["signals"] = sig;
        json meq = json::array();
        for (const auto& a : e.meq)
            meq.push_back({{"day", a.day}, {"score", a.score}});
        p["meq"] = meq;
        p["age"] = e.age ? json(*e.age) : json(nullptr);
        p["sex"] = e.sex ? json(*e.sex) : json(nullptr);
        list.push_back(std::move(p));
    }
    doc["participants"] = std::move(list);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out)
        throw Error("error writing " + path.string());
}

} // namespace circadian
