#ifndef SSX_MASK_IO_HPP
#define SSX_MASK_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ssx/channel_codes.hpp"
#include "ssx/grid.hpp"

namespace ssx {

// Decoded 4-channel layout raster. Channel order is fixed:
// (boundary/doors, semantic labels, instance ids, interior flags).
struct LayoutMask {
    int width = 0;
    int height = 0;
    ByteGrid ch_boundary;
    ByteGrid ch_semantic;
    ByteGrid ch_instance;
    ByteGrid ch_interior;

    // modal semantic label per instance id (> 0)
    std::map<int, int> instance_labels;
    // pixel count per instance id
    std::map<int, size_t> instance_pixels;

    std::vector<int> mixed_label_instances;   // instances with >1 semantic code
    std::vector<int> unknown_semantic_codes;  // codes absent from the table, preserved
    std::vector<std::string> flags;           // free-form diagnostics

    bool channels_equal(const LayoutMask& o) const {
        return ch_boundary == o.ch_boundary && ch_semantic == o.ch_semantic &&
               ch_instance == o.ch_instance && ch_interior == o.ch_interior;
    }
};

struct DerivedMasks {
    BinaryGrid interior;
    BinaryGrid wall;
    BinaryGrid door;
    size_t snapped_pixels = 0;  // boundary bytes snapped to the nearest table code
};

struct RoomCore {
    int instance_id = 0;
    int room_type = 0;  // modal semantic label
    BinaryGrid core;    // walkable pixels: instance minus wall minus door
    size_t core_pixels = 0;
    size_t instance_pixel_count = 0;
    bool empty = false;
};

// Decode an RGBA PNG into a LayoutMask. Throws DecodeError on malformed input,
// ChannelCountError when the file is not 4-channel 8-bit, InvariantError when
// an instance pixel lies outside the interior region.
LayoutMask parse_layout(const std::vector<std::uint8_t>& bytes,
                        const ChannelCodeTable& codes = ChannelCodeTable::rplan_default());

// Encode the four channels as an RGBA PNG. Lossless; parse_layout inverts it.
std::vector<std::uint8_t> encode_layout_png(const LayoutMask& m);

LayoutMask parse_layout_file(const std::string& path,
                             const ChannelCodeTable& codes = ChannelCodeTable::rplan_default());
void write_layout_png(const LayoutMask& m, const std::string& path);

DerivedMasks derive_masks(const LayoutMask& m, const ChannelCodeTable& codes, bool strict = false);

std::vector<RoomCore> room_cores(const LayoutMask& m, const DerivedMasks& d);

} // namespace ssx

#endif
