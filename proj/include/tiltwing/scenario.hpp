#pragma once

// Scenario files (see scenarios/*.toml and docs/formats.md). Angles are
// degrees in the file (keys end in _deg or _deg_s) and radians once loaded.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "tiltwing/kvconfig.hpp"
#include "tiltwing/sim.hpp"
#include "tiltwing/sysid.hpp"

namespace tiltwing {

struct Scenario {
    std::string name;
    std::string description;
    std::filesystem::path params_path;  // resolved; empty means built-in defaults
    SimConfig config;
};

// The aero parameter path is resolved relative to base_dir. The controller's
// thrust feed-forward is taken from the parameter file's thrust_ff slots.
// Throws kv::ParseError on unknown keys or bad values and
// std::invalid_argument when the resulting configuration is inconsistent.
Scenario parse_scenario(std::istream& in, const std::filesystem::path& base_dir,
                        const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

// Grid spec for synthetic sweeps: [grid], [noise], seed and an optional
// truth parameter file.
struct SweepSpec {
    SweepGrid grid;
    NoiseSpec noise;
    std::uint64_t seed = 1;
    std::filesystem::path params_path;
    VehicleGeometry geometry;
};

SweepSpec parse_sweep_spec(std::istream& in, const std::filesystem::path& base_dir,
                           const std::string& source = "<grid-spec>");
SweepSpec load_sweep_spec(const std::filesystem::path& path);

// [geometry] section reader shared by both file kinds.
VehicleGeometry read_geometry(const kv::Table& t, const VehicleGeometry& base = {});

}  // namespace tiltwing
