#pragma once

#include <string>
#include <vector>

#include "mfemskin/skeleton.hpp"
#include "mfemskin/tet_mesh.hpp"

namespace mfemskin {

struct PinSet {
    std::vector<int> vertices;
    std::vector<int> bones;       // bone driving each pin
    std::vector<Vec3> rest;       // rest position of each pinned vertex
    double stiffness = 1000.0;    // k_s
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(vertices.size()); }
};

/// Pins every vertex within `radius` of a joint or bone midpoint. The pin
/// follows the bone owning the nearest such site; for a joint site, the
/// incident bone whose segment is closest to the vertex. Throws ConfigError when no
/// vertex qualifies; bones left without pins are reported in `warnings`.
PinSet select_pins(const TetMesh& mesh, const Skeleton& skel, double radius,
                   double stiffness);

/// Default pin radius: 1.5 x mean surface edge length.
double default_pin_radius(const TetMesh& mesh);

/// Stacked pin targets (3|pins|): each rest position carried by its bone's
/// transform, so the identity pose reproduces the rest positions exactly.
VecX pin_targets(const PinSet& pins, const FkResult& fk);

}  // namespace mfemskin
