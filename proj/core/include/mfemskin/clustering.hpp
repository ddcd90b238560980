#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mfemskin/skeleton.hpp"
#include "mfemskin/tet_mesh.hpp"

namespace mfemskin {

enum class ClusterStrategy { ClosestBone, ClosestJoint, Hierarchy, User };

ClusterStrategy parse_cluster_strategy(std::string_view name);
std::string_view to_string(ClusterStrategy s);

struct RotationClustering {
    ClusterStrategy strategy = ClusterStrategy::ClosestBone;
    std::vector<int> assignment;  // per tet bone index

    /// Number of tets per bone.
    std::vector<int> histogram(int num_bones) const;
};

/// Bones within this relative band of the minimum distance compete on
/// hierarchy depth under ClusterStrategy::Hierarchy.
inline constexpr double kHierarchyBand = 0.05;

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);

/// Assigns each tet to one bone by its barycenter. Exact distance ties go to
/// the lowest bone index.
RotationClustering cluster_rotations(const TetMesh& mesh, const Skeleton& skel,
                                     ClusterStrategy strategy,
                                     const std::optional<std::vector<int>>& user_table = {});

std::vector<int> load_user_clustering(const std::string& json_text);

}  // namespace mfemskin
