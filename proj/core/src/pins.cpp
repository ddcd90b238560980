#include "mfemskin/pins.hpp"

#include <limits>

#include "mfemskin/clustering.hpp"
#include "mfemskin/errors.hpp"

namespace mfemskin {

double default_pin_radius(const TetMesh& mesh) { return 1.5 * mesh.mean_surface_edge_length(); }

PinSet select_pins(const TetMesh& mesh, const Skeleton& skel, double radius, double stiffness) {
    if (!(radius > 0.0)) throw ConfigError("pin radius must be positive");
    if (!(stiffness > 0.0)) throw ConfigError("pin stiffness must be positive");

    // A joint site is shared by every bone touching the joint; a midpoint
    // site belongs to its bone alone.
    struct Site {
        Vec3 position;
        std::vector<int> bones;
    };
    std::vector<Site> sites(skel.num_joints());
    for (int j = 0; j < skel.num_joints(); ++j) sites[j].position = skel.joints()[j].rest;
    for (int b = 0; b < skel.num_bones(); ++b) {
        sites[skel.bones()[b].parent_joint].bones.push_back(b);
        sites[skel.bones()[b].child_joint].bones.push_back(b);
    }
    for (int b = 0; b < skel.num_bones(); ++b) sites.push_back({skel.bones()[b].midpoint(), {b}});

    // Among a site's bones, the one whose segment is nearest the vertex
    // (lowest index on ties), so joint pins agree with closest-bone clusters.
    auto nearest_bone = [&skel](const Site& site, const Vec3& p) {
        int best = site.bones.front();
        double best_d = std::numeric_limits<double>::infinity();
        for (int b : site.bones) {
            const Bone& bone = skel.bones()[b];
            const double d = point_segment_distance(p, bone.head, bone.tail);
            if (d < best_d) {
                best_d = d;
                best = b;
            }
        }
        return best;
    };

    PinSet pins;
    pins.stiffness = stiffness;
    const auto& verts = mesh.vertices();
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        double best = std::numeric_limits<double>::infinity();
        const Site* site = nullptr;
        for (const Site& s : sites) {
            const double d = (verts[v] - s.position).norm();
            if (d < best) {
                best = d;
                site = &s;
            }
        }
        if (best <= radius) {
            pins.vertices.push_back(v);
            pins.bones.push_back(nearest_bone(*site, verts[v]));
            pins.rest.push_back(verts[v]);
        }
    }
    if (pins.vertices.empty()) {
        throw ConfigError("no vertex lies within the pin radius " + std::to_string(radius) +
                          " of a joint or bone midpoint");
    }
    std::vector<int> per_bone(skel.num_bones(), 0);
    for (int b : pins.bones) ++per_bone[b];
    for (int b = 0; b < skel.num_bones(); ++b) {
        if (per_bone[b] == 0) pins.warnings.push_back("bone " + std::to_string(b) + " has no pins");
    }
    return pins;
}

VecX pin_targets(const PinSet& pins, const FkResult& fk) {
    VecX targets(3 * pins.size());
    for (int i = 0; i < pins.size(); ++i) {
        targets.segment<3>(3 * i) = fk.bone_transforms[pins.bones[i]].apply(pins.rest[i]);
    }
    return targets;
}

}  // namespace mfemskin
