#include "mfemskin/clustering.hpp"

#include <algorithm>
#include <limits>

#include <json.hpp>

#include "mfemskin/errors.hpp"

namespace mfemskin {

ClusterStrategy parse_cluster_strategy(std::string_view name) {
    if (name == "bone") return ClusterStrategy::ClosestBone;
    if (name == "joint") return ClusterStrategy::ClosestJoint;
    if (name == "hierarchy") return ClusterStrategy::Hierarchy;
    if (name == "user") return ClusterStrategy::User;
    throw ConfigError("unknown clustering strategy '" + std::string(name) +
                      "' (expected bone, joint, hierarchy or user)");
}

std::string_view to_string(ClusterStrategy s) {
    switch (s) {
        case ClusterStrategy::ClosestBone: return "bone";
        case ClusterStrategy::ClosestJoint: return "joint";
        case ClusterStrategy::Hierarchy: return "hierarchy";
        case ClusterStrategy::User: return "user";
    }
    return "bone";
}

std::vector<int> RotationClustering::histogram(int num_bones) const {
    std::vector<int> counts(num_bones, 0);
    for (int b : assignment) ++counts[b];
    return counts;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

namespace {

int closest_bone(const Vec3& p, const Skeleton& skel) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int b = 0; b < skel.num_bones(); ++b) {
        const Bone& bone = skel.bones()[b];
        const double d = point_segment_distance(p, bone.head, bone.tail);
        if (d < best_d) {
            best_d = d;
            best = b;
        }
    }
    return best;
}

int closest_joint_bone(const Vec3& p, const Skeleton& skel) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < skel.num_joints(); ++j) {
        const double d = (p - skel.joints()[j].rest).norm();
        const int bone = skel.bone_for_joint(j);
        if (d < best_d || (d == best_d && bone < best)) {
            best_d = d;
            best = bone;
        }
    }
    return best;
}

int hierarchy_bone(const Vec3& p, const Skeleton& skel) {
    std::vector<double> dist(skel.num_bones());
    double min_d = std::numeric_limits<double>::infinity();
    for (int b = 0; b < skel.num_bones(); ++b) {
        const Bone& bone = skel.bones()[b];
        dist[b] = point_segment_distance(p, bone.head, bone.tail);
        min_d = std::min(min_d, dist[b]);
    }
    const double band = min_d * (1.0 + kHierarchyBand);
    int best = -1;
    int best_depth = -1;
    for (int b = 0; b < skel.num_bones(); ++b) {
        if (dist[b] > band) continue;
        const int depth = skel.depth(skel.bones()[b].child_joint);
        if (depth > best_depth) {
            best_depth = depth;
            best = b;
        }
    }
    return best;
}

}  // namespace

RotationClustering cluster_rotations(const TetMesh& mesh, const Skeleton& skel,
                                     ClusterStrategy strategy,
                                     const std::optional<std::vector<int>>& user_table) {
    if (skel.num_bones() == 0) throw ConfigError("cannot cluster rotations: skeleton has no bones");
    RotationClustering out;
    out.strategy = strategy;
    const int m = mesh.num_tets();
    if (strategy == ClusterStrategy::User) {
        if (!user_table) throw ConfigError("user clustering requested without an assignment table");
        if (static_cast<int>(user_table->size()) != m) {
            throw ConfigError("user clustering has " + std::to_string(user_table->size()) +
                              " entries for " + std::to_string(m) + " tets");
        }
        for (int k = 0; k < m; ++k) {
            const int b = (*user_table)[k];
            if (b < 0 || b >= skel.num_bones()) {
                throw ConfigError("user clustering assigns tet " + std::to_string(k) +
                                  " to unknown bone " + std::to_string(b));
            }
        }
        out.assignment = *user_table;
        return out;
    }

    out.assignment.resize(m);
    for (int k = 0; k < m; ++k) {
        const Vec3 c = mesh.barycenter(k);
        switch (strategy) {
            case ClusterStrategy::ClosestBone: out.assignment[k] = closest_bone(c, skel); break;
            case ClusterStrategy::ClosestJoint: out.assignment[k] = closest_joint_bone(c, skel); break;
            case ClusterStrategy::Hierarchy: out.assignment[k] = hierarchy_bone(c, skel); break;
            case ClusterStrategy::User: break;
        }
    }
    return out;
}

std::vector<int> load_user_clustering(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("clustering JSON: ") + e.what());
    }
    if (!doc.is_array()) throw ConfigError("clustering JSON must be an array of bone indices");
    std::vector<int> table;
    table.reserve(doc.size());
    for (const auto& v : doc) {
        if (!v.is_number_integer()) throw ConfigError("clustering entries must be integers");
        table.push_back(v.get<int>());
    }
    return table;
}

}  // namespace mfemskin
