#pragma once

#include <string>
#include <vector>

#include "sorso/env.hpp"

namespace sorso {

// Declarative instruction grids compiled into temporal options.
//
// File format (line-oriented, '#' comments, serialized in this key order):
//   game = minipong | minitennis
//   hit_grid_x = v1, v2, ...   # MiniTennis only; court units from the net, [0, 0.5]
//   hit_grid_y = v1, v2, ...   # offset units in [-1, 1], fraction of half contact range
//   wait_target = x, y | noop
//   wait_interrupt = on | off
// Omitted optional keys take the game's defaults.
struct InstructionManifest {
    Game game = Game::MiniPong;
    std::vector<double> hit_grid_x;
    std::vector<double> hit_grid_y;
    bool wait_noop = true;
    Vec2 wait_target;
    bool wait_interrupt = true;
};

// MiniPong: 17 lateral offsets over the full contact range, no-op wait.
// MiniTennis: 5 hit planes x 7 lateral offsets, station wait two-thirds of
// the way from the baseline to the net, laterally centered.
InstructionManifest default_manifest(Game g);

InstructionManifest parse_manifest_text(const std::string& text, const std::string& source);
InstructionManifest load_manifest(const std::string& path);
std::string serialize_manifest(const InstructionManifest& m);
void save_manifest(const InstructionManifest& m, const std::string& path);

bool manifest_equal(const InstructionManifest& a, const InstructionManifest& b);

}  // namespace sorso
