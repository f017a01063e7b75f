#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "parkloc/geometry.hpp"

namespace parkloc {

struct ParkingSpot {
    std::string label;
    Point2Ground anchor;  // center of the painted number, lot frame
    int floor = 0;

    friend bool operator==(const ParkingSpot&, const ParkingSpot&) = default;
};

/// Immutable after construction. Labels are unique and compared byte-for-byte.
class HdMap {
public:
    using SpotTable = std::map<std::string, ParkingSpot, std::less<>>;

    HdMap() = default;

    /// Throws Error{DuplicateLabel}, Error{EmptyMap}, Error{ParseError} (empty
    /// label), Error{NonFinite}.
    template <typename Range>
    static HdMap build(std::string lot_id, const Range& spots) {
        HdMap m;
        m.lot_id_ = std::move(lot_id);
        for (const ParkingSpot& s : spots) m.insert(s);
        m.validate_non_empty();
        return m;
    }

    const std::string& lot_id() const noexcept { return lot_id_; }
    const SpotTable& spots() const noexcept { return spots_; }
    std::size_t size() const noexcept { return spots_.size(); }

    friend bool operator==(const HdMap&, const HdMap&) = default;

private:
    void insert(const ParkingSpot& spot);
    void validate_non_empty() const;

    std::string lot_id_;
    SpotTable spots_;
};

/// Exact, case- and whitespace-sensitive lookup. No character normalization.
std::optional<ParkingSpot> match_exact(const HdMap& map, std::string_view text);

/// Pointer variant for hot paths; null when absent.
const ParkingSpot* find_exact(const HdMap& map, std::string_view text);

HdMap parse_map(std::string_view document);
std::string dump_map(const HdMap& map);

HdMap load_map(const std::string& path);
void save_map(const HdMap& map, const std::string& path);

}  // namespace parkloc
