#include "ssx/channel_codes.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ssx/errors.hpp"

namespace ssx {

BoundaryRole ChannelCodeTable::boundary_role(int code) const {
    auto it = boundary.find(code);
    if (it == boundary.end()) throw UnknownCodeError("unknown boundary code " + std::to_string(code));
    return it->second;
}

int ChannelCodeTable::snap_boundary(int code) const {
    int best = -1;
    int best_dist = 1 << 20;
    for (const auto& [known, role] : boundary) {
        (void)role;
        const int d = std::abs(known - code);
        if (d < best_dist || (d == best_dist && known < best)) {
            best = known;
            best_dist = d;
        }
    }
    if (best < 0) throw UnknownCodeError("empty boundary code table");
    return best;
}

int ChannelCodeTable::boundary_code(BoundaryRole role) const {
    for (const auto& [code, r] : boundary)
        if (r == role) return code;
    throw ConfigError("no boundary code for requested role");
}

int ChannelCodeTable::semantic_code(const std::string& name) const {
    for (const auto& [code, n] : semantic)
        if (n == name) return code;
    throw ConfigError("no semantic code named '" + name + "'");
}

ChannelCodeTable ChannelCodeTable::rplan_default() {
    ChannelCodeTable t;
    t.boundary = {
        {0, BoundaryRole::None},
        {127, BoundaryRole::Wall},
        {191, BoundaryRole::DoorEntrance},
        {255, BoundaryRole::DoorInterior},
    };
    t.semantic = {
        {0, "living_room"},  {1, "master_room"},   {2, "kitchen"},
        {3, "bathroom"},     {4, "dining_room"},   {5, "child_room"},
        {6, "study_room"},   {7, "second_room"},   {8, "guest_room"},
        {9, "balcony"},      {10, "entrance"},     {11, "storage"},
        {12, "wall_in"},     {13, "external"},     {14, "exterior_wall"},
        {15, "front_door"},  {16, "interior_wall"},{17, "interior_door"},
    };
    t.structural = {13, 14, 15, 16, 17};
    t.interior_inside = 255;
    return t;
}

namespace {

BoundaryRole role_from_name(const std::string& s) {
    if (s == "none") return BoundaryRole::None;
    if (s == "wall") return BoundaryRole::Wall;
    if (s == "door_interior") return BoundaryRole::DoorInterior;
    if (s == "door_entrance") return BoundaryRole::DoorEntrance;
    throw ConfigError("unknown boundary role '" + s + "'");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

// Flat key=value format, '#' comments. Keys: table_version, interior.inside,
// boundary.<code> = <role>, semantic.<code> = <name>, structural = c,c,...
ChannelCodeTable load_code_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open code table: " + path);
    ChannelCodeTable t;
    t.boundary.clear();
    t.semantic.clear();
    t.structural.clear();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "table_version") {
            t.version = std::stoi(val);
        } else if (key == "interior.inside") {
            t.interior_inside = std::stoi(val);
        } else if (key.rfind("boundary.", 0) == 0) {
            t.boundary[std::stoi(key.substr(9))] = role_from_name(val);
        } else if (key.rfind("semantic.", 0) == 0) {
            t.semantic[std::stoi(key.substr(9))] = val;
        } else if (key == "structural") {
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = trim(tok);
                if (!tok.empty()) t.structural.insert(std::stoi(tok));
            }
        } else {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (t.boundary.empty()) throw ConfigError(path + ": no boundary codes defined");
    return t;
}

} // namespace ssx
