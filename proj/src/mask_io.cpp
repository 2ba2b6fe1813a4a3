#include "ssx/mask_io.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "ssx/errors.hpp"

namespace ssx {

namespace {

// Fills per-instance label/pixel bookkeeping and runs the type invariants.
void index_instances(LayoutMask& m, const ChannelCodeTable& codes) {
    // instance id -> semantic code -> count
    std::map<int, std::map<int, size_t>> hist;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            const int inst = m.ch_instance.at(x, y);
            if (inst == 0) continue;
            if (m.ch_interior.at(x, y) == 0)
                throw InvariantError("instance " + std::to_string(inst) + " pixel outside interior at (" +
                                     std::to_string(x) + "," + std::to_string(y) + ")");
            hist[inst][m.ch_semantic.at(x, y)]++;
        }
    }
    std::map<int, bool> unknown_seen;
    for (const auto& [inst, labels] : hist) {
        size_t total = 0;
        int modal = -1;
        size_t modal_count = 0;
        for (const auto& [code, count] : labels) {
            total += count;
            if (count > modal_count) {  // ties resolve to the smaller code (map order)
                modal = code;
                modal_count = count;
            }
            if (!codes.knows_semantic(code)) unknown_seen[code] = true;
        }
        m.instance_labels[inst] = modal;
        m.instance_pixels[inst] = total;
        if (labels.size() > 1) {
            m.mixed_label_instances.push_back(inst);
        }
    }
    for (const auto& [code, seen] : unknown_seen) {
        (void)seen;
        m.unknown_semantic_codes.push_back(code);
    }
    if (!m.mixed_label_instances.empty()) m.flags.push_back("mixed_label_instances");
    if (!m.unknown_semantic_codes.empty()) m.flags.push_back("unknown_semantic_codes");
}

} // namespace

LayoutMask parse_layout(const std::vector<std::uint8_t>& bytes, const ChannelCodeTable& codes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("png decode failed: " + msg);
    }
    // The file's native layout before any libpng conversion.
    const png_uint_32 native = image.format;
    const int channels = PNG_IMAGE_PIXEL_CHANNELS(native);
    if (native & PNG_FORMAT_FLAG_COLORMAP) {
        png_image_free(&image);
        throw ChannelCountError("indexed-colour PNG, expected 4-channel RGBA");
    }
    if (channels != 4) {
        png_image_free(&image);
        throw ChannelCountError("expected 4 channels, got " + std::to_string(channels));
    }
    if (native & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw DecodeError("16-bit PNG not supported, expected 8-bit per channel");
    }

    image.format = PNG_FORMAT_RGBA;
    const int w = static_cast<int>(image.width);
    const int h = static_cast<int>(image.height);
    std::vector<std::uint8_t> pixels(static_cast<size_t>(PNG_IMAGE_SIZE(image)));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("png read failed: " + msg);
    }

    LayoutMask m;
    m.width = w;
    m.height = h;
    m.ch_boundary = ByteGrid(w, h);
    m.ch_semantic = ByteGrid(w, h);
    m.ch_instance = ByteGrid(w, h);
    m.ch_interior = ByteGrid(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t o = (static_cast<size_t>(y) * w + x) * 4;
            m.ch_boundary.at(x, y) = pixels[o + 0];
            m.ch_semantic.at(x, y) = pixels[o + 1];
            m.ch_instance.at(x, y) = pixels[o + 2];
            m.ch_interior.at(x, y) = pixels[o + 3];
        }
    }
    index_instances(m, codes);
    return m;
}

std::vector<std::uint8_t> encode_layout_png(const LayoutMask& m) {
    std::vector<std::uint8_t> pixels(static_cast<size_t>(m.width) * m.height * 4);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            const size_t o = (static_cast<size_t>(y) * m.width + x) * 4;
            pixels[o + 0] = m.ch_boundary.at(x, y);
            pixels[o + 1] = m.ch_semantic.at(x, y);
            pixels[o + 2] = m.ch_instance.at(x, y);
            pixels[o + 3] = m.ch_interior.at(x, y);
        }
    }
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(m.width);
    image.height = static_cast<png_uint_32>(m.height);
    image.format = PNG_FORMAT_RGBA;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr))
        throw IOError(std::string("png size probe failed: ") + image.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr))
        throw IOError(std::string("png encode failed: ") + image.message);
    out.resize(size);
    return out;
}

LayoutMask parse_layout_file(const std::string& path, const ChannelCodeTable& codes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_layout(bytes, codes);
}

void write_layout_png(const LayoutMask& m, const std::string& path) {
    const auto bytes = encode_layout_png(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

DerivedMasks derive_masks(const LayoutMask& m, const ChannelCodeTable& codes, bool strict) {
    DerivedMasks d;
    d.interior = BinaryGrid(m.width, m.height);
    d.wall = BinaryGrid(m.width, m.height);
    d.door = BinaryGrid(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            d.interior.at(x, y) = m.ch_interior.at(x, y) != 0 ? 1 : 0;
            int code = m.ch_boundary.at(x, y);
            if (!codes.knows_boundary(code)) {
                if (strict) throw UnknownCodeError("unknown boundary code " + std::to_string(code));
                code = codes.snap_boundary(code);
                d.snapped_pixels++;
            }
            switch (codes.boundary_role(code)) {
                case BoundaryRole::Wall:
                    d.wall.at(x, y) = 1;
                    break;
                case BoundaryRole::DoorInterior:
                case BoundaryRole::DoorEntrance:
                    d.door.at(x, y) = 1;
                    break;
                case BoundaryRole::None:
                    break;
            }
        }
    }
    return d;
}

std::vector<RoomCore> room_cores(const LayoutMask& m, const DerivedMasks& d) {
    if (!m.ch_instance.same_shape(d.wall)) throw DimensionError("mask/derived shape mismatch");
    std::vector<RoomCore> cores;
    for (const auto& [inst, pixel_count] : m.instance_pixels) {
        RoomCore rc;
        rc.instance_id = inst;
        rc.room_type = m.instance_labels.at(inst);
        rc.instance_pixel_count = pixel_count;
        rc.core = BinaryGrid(m.width, m.height);
        size_t n = 0;
        for (int y = 0; y < m.height; ++y) {
            for (int x = 0; x < m.width; ++x) {
                if (m.ch_instance.at(x, y) != inst) continue;
                if (d.wall.at(x, y) || d.door.at(x, y)) continue;
                rc.core.at(x, y) = 1;
                ++n;
            }
        }
        rc.core_pixels = n;
        rc.empty = (n == 0);
        cores.push_back(std::move(rc));
    }
    return cores;  // map iteration is already sorted by instance id
}

} // namespace ssx
