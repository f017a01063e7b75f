#include "parkloc/map.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "parkloc/error.hpp"

namespace parkloc {

using ordered_json = nlohmann::ordered_json;

void HdMap::insert(const ParkingSpot& spot) {
    if (spot.label.empty()) {
        throw Error(ErrorKind::ParseError, "spot with empty label");
    }
    if (!std::isfinite(spot.anchor.x) || !std::isfinite(spot.anchor.y)) {
        throw Error(ErrorKind::NonFinite, "spot '" + spot.label + "' has non-finite anchor");
    }
    auto [it, inserted] = spots_.emplace(spot.label, spot);
    if (!inserted) {
        throw Error(ErrorKind::DuplicateLabel, "label '" + spot.label + "' appears more than once");
    }
}

void HdMap::validate_non_empty() const {
    if (spots_.empty()) {
        throw Error(ErrorKind::EmptyMap, "map '" + lot_id_ + "' has no spots");
    }
}

const ParkingSpot* find_exact(const HdMap& map, std::string_view text) {
    const auto it = map.spots().find(text);
    return it == map.spots().end() ? nullptr : &it->second;
}

std::optional<ParkingSpot> match_exact(const HdMap& map, std::string_view text) {
    if (const ParkingSpot* s = find_exact(map, text)) return *s;
    return std::nullopt;
}

HdMap parse_map(std::string_view document) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(document);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("map: ") + e.what());
    }
    try {
        const auto lot_id = doc.at("lot_id").get<std::string>();
        const auto& arr = doc.at("spots");
        if (!arr.is_array()) {
            throw Error(ErrorKind::ParseError, "map: 'spots' must be an array");
        }
        std::vector<ParkingSpot> spots;
        spots.reserve(arr.size());
        for (const auto& s : arr) {
            spots.push_back({s.at("label").get<std::string>(),
                             {s.at("x").get<double>(), s.at("y").get<double>()},
                             s.at("floor").get<int>()});
        }
        return HdMap::build(lot_id, spots);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("map: ") + e.what());
    }
}

std::string dump_map(const HdMap& map) {
    ordered_json doc;
    doc["lot_id"] = map.lot_id();
    ordered_json spots = ordered_json::array();
    for (const auto& [label, s] : map.spots()) {
        ordered_json o;
        o["label"] = s.label;
        o["x"] = s.anchor.x;
        o["y"] = s.anchor.y;
        o["floor"] = s.floor;
        spots.push_back(std::move(o));
    }
    doc["spots"] = std::move(spots);
    return doc.dump(1) + "\n";
}

HdMap load_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open map " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_map(ss.str());
}

void save_map(const HdMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot write map " + path);
    }
    out << dump_map(map);
}

}  // namespace parkloc
