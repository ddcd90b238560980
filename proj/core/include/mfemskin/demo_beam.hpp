#pragma once

#include <filesystem>
#include <vector>

#include "mfemskin/skeleton.hpp"
#include "mfemskin/tet_mesh.hpp"

namespace mfemskin {

/// Box beam along +x, centred on the x axis, split into cells x 6 tets.
struct BeamSpec {
    int cells_x = 16;
    int cells_y = 4;
    int cells_z = 4;
    double length = 4.0;
    double width = 1.0;   // y
    double height = 1.0;  // z
};

TetMesh make_beam_mesh(const BeamSpec& spec);

/// Three joints on the beam axis: root at x = 0, middle, tip.
Skeleton make_beam_skeleton(double length);

/// Middle joint swept about +z from 0 to `max_degrees`, one pose per frame.
std::vector<PoseFrame> make_bend_animation(int frames, double max_degrees);

/// Writes beam.mesh, rig.json and material.json into `out_dir`.
void write_demo_beam(const std::filesystem::path& out_dir, const BeamSpec& spec, int frames,
                     double max_degrees);

}  // namespace mfemskin
