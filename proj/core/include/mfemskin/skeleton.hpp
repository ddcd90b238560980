#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfemskin/types.hpp"

namespace mfemskin {

struct Joint {
    std::string name;
    std::optional<int> parent;
    Vec3 rest;
};

struct Bone {
    int parent_joint;
    int child_joint;
    Vec3 head;  // rest position of parent_joint
    Vec3 tail;  // rest position of child_joint
    Vec3 midpoint() const { return 0.5 * (head + tail); }
    double length() const { return (tail - head).norm(); }
};

/// Joint hierarchy in topological order (parent index < child index) with a
/// single root at index 0. One bone per non-root joint.
class Skeleton {
public:
    Skeleton() = default;
    explicit Skeleton(std::vector<Joint> joints);

    int num_joints() const { return static_cast<int>(joints_.size()); }
    int num_bones() const { return static_cast<int>(bones_.size()); }
    const std::vector<Joint>& joints() const { return joints_; }
    const std::vector<Bone>& bones() const { return bones_; }

    /// Number of edges between the joint and the root.
    int depth(int joint) const { return depth_[joint]; }

    /// Bone whose proximal end is `joint`; for leaves, the bone ending there.
    int bone_for_joint(int joint) const { return joint_bone_[joint]; }

private:
    std::vector<Joint> joints_;
    std::vector<Bone> bones_;
    std::vector<int> depth_;
    std::vector<int> joint_bone_;
};

/// Per-joint local rotation plus root translation.
struct PoseFrame {
    std::vector<Eigen::Quaterniond> rotations;
    Vec3 root_translation = Vec3::Zero();

    static PoseFrame identity(int num_joints);
};

/// x -> rotation * (x - pivot) + pivot + displacement, evaluated as an
/// update of x so that the identity transform returns x bit-for-bit.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 pivot = Vec3::Zero();
    Vec3 displacement = Vec3::Zero();
    Vec3 apply(const Vec3& x) const {
        return x + ((rotation - Mat3::Identity()) * (x - pivot) + displacement);
    }
};

struct FkResult {
    std::vector<Mat3> joint_rotations;    // world, relative to rest
    std::vector<Vec3> joint_positions;    // world
    std::vector<RigidTransform> bone_transforms;  // rest space -> world
    std::vector<Mat3> bone_rotations() const;
};

/// Checks joint count and quaternion norms (|q| = 1 to 1e-9). Throws
/// ConfigError.
void validate_pose(const Skeleton& skel, const PoseFrame& pose);

/// Root-to-leaf composition. A bone follows the world rotation of its
/// proximal joint.
FkResult forward_kinematics(const Skeleton& skel, const PoseFrame& pose);

struct RigAnimation {
    Skeleton skeleton;
    std::vector<PoseFrame> frames;
};

/// {"joints": [{"name", "parent", "rest"}], "frames": [{"root_translation",
/// "rotations": [[w,x,y,z],...]}]}. Quaternions within 1e-6 of unit length
/// are renormalised; anything further off is rejected.
RigAnimation load_rig(const std::filesystem::path& path);
RigAnimation parse_rig(const std::string& json_text);
std::string rig_to_json(const Skeleton& skel, const std::vector<PoseFrame>& frames);

}  // namespace mfemskin
