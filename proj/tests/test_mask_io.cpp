#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <png.h>

#include <cstring>

#include "ssx/errors.hpp"
#include "ssx/mask_io.hpp"
#include "ssx/rng.hpp"

using namespace ssx;

namespace {

// minimal synthetic mask builder
LayoutMask blank_mask(int w, int h) {
    LayoutMask m;
    m.width = w;
    m.height = h;
    m.ch_boundary = ByteGrid(w, h, 0);
    m.ch_semantic = ByteGrid(w, h, 13);  // external
    m.ch_instance = ByteGrid(w, h, 0);
    m.ch_interior = ByteGrid(w, h, 0);
    return m;
}

void paint_room(LayoutMask& m, int x0, int y0, int w, int h, int inst, int type) {
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) {
            m.ch_instance.at(x, y) = static_cast<std::uint8_t>(inst);
            m.ch_semantic.at(x, y) = static_cast<std::uint8_t>(type);
            m.ch_interior.at(x, y) = 255;
        }
}

std::vector<std::uint8_t> encode_rgb_png(int w, int h) {
    std::vector<std::uint8_t> pixels(static_cast<size_t>(w) * h * 3, 100);
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = PNG_FORMAT_RGB;
    png_alloc_size_t size = 0;
    REQUIRE(png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr));
    std::vector<std::uint8_t> out(size);
    REQUIRE(png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr));
    out.resize(size);
    return out;
}

} // namespace

TEST_CASE("parse_layout round-trips a synthetic 8x8 one-room mask") {
    auto m = blank_mask(8, 8);
    for (int y = 2; y < 6; ++y)
        for (int x = 2; x < 6; ++x) m.ch_interior.at(x, y) = 255;
    paint_room(m, 2, 2, 4, 4, 1, 0);

    const auto parsed = parse_layout(encode_layout_png(m));
    CHECK(parsed.width == 8);
    CHECK(parsed.instance_pixels.size() == 1);
    CHECK(parsed.instance_pixels.at(1) == 16);
    CHECK(parsed.instance_labels.at(1) == 0);
    size_t interior = 0;
    for (auto v : parsed.ch_interior.data) interior += v != 0;
    CHECK(interior == 16);
    CHECK(parsed.channels_equal(m));
}

TEST_CASE("3-channel input raises ChannelCountError") {
    CHECK_THROWS_AS(parse_layout(encode_rgb_png(4, 4)), ChannelCountError);
}

TEST_CASE("garbage bytes raise DecodeError") {
    std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8};
    CHECK_THROWS_AS(parse_layout(junk), DecodeError);
}

TEST_CASE("instance outside interior raises InvariantError") {
    auto m = blank_mask(4, 4);
    m.ch_instance.at(1, 1) = 1;  // interior flag left at 0
    m.ch_semantic.at(1, 1) = 0;
    CHECK_THROWS_AS(parse_layout(encode_layout_png(m)), InvariantError);
}

TEST_CASE("mixed-label instances keep the modal label and get flagged") {
    auto m = blank_mask(6, 6);
    paint_room(m, 0, 0, 3, 2, 1, 0);
    m.ch_semantic.at(0, 0) = 2;  // one kitchen pixel inside a living room
    const auto parsed = parse_layout(encode_layout_png(m));
    CHECK(parsed.instance_labels.at(1) == 0);
    REQUIRE(parsed.mixed_label_instances.size() == 1);
    CHECK(parsed.mixed_label_instances[0] == 1);
}

TEST_CASE("unknown semantic codes are preserved and flagged") {
    auto m = blank_mask(4, 4);
    paint_room(m, 0, 0, 2, 2, 1, 99);
    const auto parsed = parse_layout(encode_layout_png(m));
    CHECK(parsed.instance_labels.at(1) == 99);
    REQUIRE(parsed.unknown_semantic_codes.size() == 1);
    CHECK(parsed.unknown_semantic_codes[0] == 99);
}

TEST_CASE("derive_masks splits boundary codes into wall and door") {
    const auto codes = ChannelCodeTable::rplan_default();
    auto m = blank_mask(8, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 8; ++x) m.ch_interior.at(x, y) = 255;
    for (int y = 0; y < 4; ++y) m.ch_boundary.at(3, y) = 127;  // wall column
    m.ch_boundary.at(3, 1) = 255;  // one interior-door pixel in the wall

    const auto d = derive_masks(m, codes);
    CHECK(count_set(d.wall) == 3);
    CHECK(count_set(d.door) == 1);
    CHECK(d.door.at(3, 1) == 1);
    CHECK(count_set(d.interior) == 32);
    // wall and door never overlap
    for (size_t i = 0; i < d.wall.data.size(); ++i) CHECK((d.wall.data[i] & d.door.data[i]) == 0);
}

TEST_CASE("no door codes yields an empty door grid") {
    const auto codes = ChannelCodeTable::rplan_default();
    auto m = blank_mask(5, 5);
    const auto d = derive_masks(m, codes);
    CHECK(count_set(d.door) == 0);
}

TEST_CASE("unknown boundary codes: strict throws, lenient snaps with a count") {
    const auto codes = ChannelCodeTable::rplan_default();
    auto m = blank_mask(4, 4);
    m.ch_boundary.at(0, 0) = 120;  // close to 127 = wall
    CHECK_THROWS_AS(derive_masks(m, codes, true), UnknownCodeError);
    const auto d = derive_masks(m, codes, false);
    CHECK(d.snapped_pixels == 1);
    CHECK(d.wall.at(0, 0) == 1);
}

TEST_CASE("wall/door never overlap on random boundary noise") {
    const auto codes = ChannelCodeTable::rplan_default();
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto m = blank_mask(12, 12);
        for (auto& v : m.ch_boundary.data) v = static_cast<std::uint8_t>(rng.uniform_int(256));
        const auto d = derive_masks(m, codes, false);
        for (size_t i = 0; i < d.wall.data.size(); ++i)
            REQUIRE((d.wall.data[i] & d.door.data[i]) == 0);
    }
}

TEST_CASE("room core removes wall strip pixels") {
    const auto codes = ChannelCodeTable::rplan_default();
    auto built = blank_mask(8, 8);
    paint_room(built, 2, 2, 4, 4, 1, 0);
    for (int x = 2; x < 6; ++x) built.ch_boundary.at(x, 3) = 127;  // 1x4 wall strip inside

    const auto m = parse_layout(encode_layout_png(built));
    const auto d = derive_masks(m, codes);
    const auto cores = room_cores(m, d);
    REQUIRE(cores.size() == 1);
    CHECK(cores[0].instance_id == 1);
    CHECK(cores[0].core_pixels == 12);
    CHECK_FALSE(cores[0].empty);
}

TEST_CASE("fully walled instance yields an empty flagged core") {
    const auto codes = ChannelCodeTable::rplan_default();
    auto built = blank_mask(4, 4);
    paint_room(built, 1, 1, 2, 2, 1, 0);
    for (int y = 1; y < 3; ++y)
        for (int x = 1; x < 3; ++x) built.ch_boundary.at(x, y) = 127;
    const auto m = parse_layout(encode_layout_png(built));
    const auto cores = room_cores(m, derive_masks(m, codes));
    REQUIRE(cores.size() == 1);
    CHECK(cores[0].empty);
    CHECK(cores[0].core_pixels == 0);
}

TEST_CASE("pixel accounting holds on random fixtures") {
    const auto codes = ChannelCodeTable::rplan_default();
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        auto built = blank_mask(16, 16);
        const int rooms = 1 + static_cast<int>(rng.uniform_int(3));
        for (int i = 0; i < rooms; ++i) {
            const int x0 = static_cast<int>(rng.uniform_int(8));
            const int y0 = static_cast<int>(rng.uniform_int(8));
            paint_room(built, x0, y0, 2 + static_cast<int>(rng.uniform_int(6)),
                       2 + static_cast<int>(rng.uniform_int(6)), i + 1, static_cast<int>(rng.uniform_int(4)));
        }
        // random wall/door daubs
        for (int k = 0; k < 40; ++k) {
            const int x = static_cast<int>(rng.uniform_int(16));
            const int y = static_cast<int>(rng.uniform_int(16));
            built.ch_boundary.at(x, y) = rng.uniform() < 0.7 ? 127 : 255;
        }
        const auto m = parse_layout(encode_layout_png(built));
        const auto d = derive_masks(m, codes);
        const auto cores = room_cores(m, d);
        REQUIRE_FALSE(cores.empty());
        for (const auto& rc : cores) {
            size_t wall_in = 0, door_in = 0;
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 16; ++x) {
                    if (m.ch_instance.at(x, y) != rc.instance_id) continue;
                    if (d.wall.at(x, y)) ++wall_in;
                    else if (d.door.at(x, y)) ++door_in;
                }
            REQUIRE(rc.core_pixels + wall_in + door_in == rc.instance_pixel_count);
        }
    }
}

TEST_CASE("parse and derive are deterministic across repeated runs") {
    auto m = blank_mask(10, 10);
    paint_room(m, 1, 1, 5, 5, 1, 0);
    const auto bytes = encode_layout_png(m);
    const auto p1 = parse_layout(bytes);
    const auto p2 = parse_layout(bytes);
    CHECK(p1.channels_equal(p2));
    const auto bytes2 = encode_layout_png(p1);
    CHECK(bytes == bytes2);
}
