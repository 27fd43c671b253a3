#include "sorso/manifest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sorso/errors.hpp"
#include "sorso/kv.hpp"

namespace sorso {

namespace {

constexpr double kNetX = 0.5;
constexpr double kHalfCourt = 0.5;

void check_grids(const InstructionManifest& m, const std::string& source) {
    if (m.game == Game::MiniPong && !m.hit_grid_x.empty())
        throw ConfigError(source + ": hit_grid_x is not meaningful for minipong");
    if (m.game == Game::MiniTennis && m.hit_grid_x.empty())
        throw ConfigError(source + ": minitennis needs a non-empty hit_grid_x");
    if (m.hit_grid_y.empty()) throw ConfigError(source + ": hit_grid_y must be non-empty");
    for (double v : m.hit_grid_x)
        if (!(v >= 0.0 && v <= kHalfCourt))
            throw ConfigError(source + ": hit_grid_x value " + format_real(v) +
                              " outside [0, " + format_real(kHalfCourt) + "]");
    for (double v : m.hit_grid_y)
        if (!(v >= -1.0 && v <= 1.0))
            throw ConfigError(source + ": hit_grid_y value " + format_real(v) +
                              " outside [-1, 1]");
    if (!m.wait_noop) {
        if (!(m.wait_target.x >= 0.0 && m.wait_target.x <= 1.0 && m.wait_target.y >= 0.0 &&
              m.wait_target.y <= 1.0))
            throw ConfigError(source + ": wait_target outside the court");
        if (m.game == Game::MiniTennis && m.wait_target.x < kNetX)
            throw ConfigError(source + ": wait_target must be on the agent side (x >= 0.5)");
    }
}

std::string join_reals(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ", ";
        out += format_real(vs[i]);
    }
    return out;
}

}  // namespace

InstructionManifest default_manifest(Game g) {
    InstructionManifest m;
    m.game = g;
    if (g == Game::MiniPong) {
        for (int k = -8; k <= 8; ++k) m.hit_grid_y.push_back(k / 8.0);
        m.wait_noop = true;
    } else {
        for (int k = 0; k <= 4; ++k) m.hit_grid_x.push_back(k * kHalfCourt / 4.0);
        for (int k = -3; k <= 3; ++k) m.hit_grid_y.push_back(k / 3.0);
        m.wait_noop = false;
        m.wait_target = {1.0 - 2.0 / 3.0 * kHalfCourt, 0.5};
    }
    m.wait_interrupt = true;
    return m;
}

InstructionManifest parse_manifest_text(const std::string& text, const std::string& source) {
    auto entries = parse_kv_text(text, source);
    Game game = Game::MiniPong;
    bool have_game = false;
    for (const auto& e : entries) {
        if (e.key == "game") {
            if (e.value == "minipong")
                game = Game::MiniPong;
            else if (e.value == "minitennis")
                game = Game::MiniTennis;
            else
                throw ConfigError(source + ":" + std::to_string(e.line) +
                                  ": unknown game `" + e.value + "`");
            have_game = true;
        }
    }
    if (!have_game) throw ConfigError(source + ": missing required key `game`");

    InstructionManifest m = default_manifest(game);
    for (const auto& e : entries) {
        if (e.key == "game") {
            continue;
        } else if (e.key == "hit_grid_x") {
            m.hit_grid_x = kv_to_real_list(e);
        } else if (e.key == "hit_grid_y") {
            m.hit_grid_y = kv_to_real_list(e);
        } else if (e.key == "wait_target") {
            if (e.value == "noop") {
                m.wait_noop = true;
                m.wait_target = {};
            } else {
                auto pair = kv_to_real_list(e);
                if (pair.size() != 2)
                    throw ConfigError(source + ":" + std::to_string(e.line) +
                                      ": wait_target needs `x, y` or `noop`");
                m.wait_noop = false;
                m.wait_target = {pair[0], pair[1]};
            }
        } else if (e.key == "wait_interrupt") {
            m.wait_interrupt = kv_to_on_off(e);
        } else {
            throw ConfigError(source + ":" + std::to_string(e.line) + ": unknown key `" +
                              e.key + "`");
        }
    }
    check_grids(m, source);
    return m;
}

InstructionManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read manifest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest_text(buf.str(), path);
}

std::string serialize_manifest(const InstructionManifest& m) {
    std::ostringstream os;
    os << "game = " << MiniGameEnv::game_name(m.game) << "\n";
    if (m.game == Game::MiniTennis) os << "hit_grid_x = " << join_reals(m.hit_grid_x) << "\n";
    os << "hit_grid_y = " << join_reals(m.hit_grid_y) << "\n";
    if (m.wait_noop)
        os << "wait_target = noop\n";
    else
        os << "wait_target = " << format_real(m.wait_target.x) << ", "
           << format_real(m.wait_target.y) << "\n";
    os << "wait_interrupt = " << (m.wait_interrupt ? "on" : "off") << "\n";
    return os.str();
}

void save_manifest(const InstructionManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write manifest: " + path);
    out << serialize_manifest(m);
}

bool manifest_equal(const InstructionManifest& a, const InstructionManifest& b) {
    return a.game == b.game && a.hit_grid_x == b.hit_grid_x && a.hit_grid_y == b.hit_grid_y &&
           a.wait_noop == b.wait_noop &&
           (a.wait_noop || (a.wait_target.x == b.wait_target.x &&
                            a.wait_target.y == b.wait_target.y)) &&
           a.wait_interrupt == b.wait_interrupt;
}

}  // namespace sorso
