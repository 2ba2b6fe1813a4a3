#ifndef SSX_CHANNEL_CODES_HPP
#define SSX_CHANNEL_CODES_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace ssx {

enum class BoundaryRole { None, Wall, DoorInterior, DoorEntrance };

// Single source of truth for channel byte codes. No other module hard-codes
// pixel values; everything resolves through this table.
struct ChannelCodeTable {
    int version = 1;

    // boundary/door channel: byte code -> role
    std::map<int, BoundaryRole> boundary;

    // semantic channel: byte code -> room type name
    std::map<int, std::string> semantic;

    // semantic codes that are structural (walls, doors, external), never rooms;
    // doubles as the ignore set for type-level scoring
    std::set<int> structural;

    // value in the interior channel that marks inside; everything else is outside
    int interior_inside = 255;

    bool knows_boundary(int code) const { return boundary.count(code) != 0; }
    BoundaryRole boundary_role(int code) const;

    // nearest known boundary code by absolute byte distance, ties to the smaller code
    int snap_boundary(int code) const;

    bool knows_semantic(int code) const { return semantic.count(code) != 0; }

    // smallest byte code carrying the given role / name; ConfigError if absent
    int boundary_code(BoundaryRole role) const;
    int semantic_code(const std::string& name) const;

    static ChannelCodeTable rplan_default();
};

ChannelCodeTable load_code_table(const std::string& path);

} // namespace ssx

#endif
