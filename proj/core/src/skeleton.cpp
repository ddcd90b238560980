#include "mfemskin/skeleton.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mfemskin/errors.hpp"

namespace mfemskin {

using json = nlohmann::json;

Skeleton::Skeleton(std::vector<Joint> joints) : joints_(std::move(joints)) {
    if (joints_.empty()) throw ConfigError("skeleton has no joints");
    if (joints_[0].parent) throw ConfigError("joint 0 must be the root");
    const int n = num_joints();
    depth_.assign(n, 0);
    joint_bone_.assign(n, -1);
    for (int j = 1; j < n; ++j) {
        const auto& parent = joints_[j].parent;
        if (!parent) {
            throw ConfigError("joint '" + joints_[j].name + "' has no parent; only one root allowed");
        }
        if (*parent < 0 || *parent >= j) {
            throw ConfigError("joint '" + joints_[j].name +
                              "' must have a parent with a smaller index");
        }
        Bone bone{*parent, j, joints_[*parent].rest, joints_[j].rest};
        if (!(bone.length() > 0.0)) {
            throw ConfigError("bone ending at joint '" + joints_[j].name + "' has zero length");
        }
        depth_[j] = depth_[*parent] + 1;
        bones_.push_back(bone);
    }
    if (bones_.empty()) throw ConfigError("skeleton needs at least two joints");
    for (int b = 0; b < num_bones(); ++b) {
        int& owner = joint_bone_[bones_[b].parent_joint];
        if (owner < 0) owner = b;
    }
    for (int b = 0; b < num_bones(); ++b) {
        int& owner = joint_bone_[bones_[b].child_joint];
        if (owner < 0) owner = b;
    }
}

PoseFrame PoseFrame::identity(int num_joints) {
    PoseFrame p;
    p.rotations.assign(num_joints, Eigen::Quaterniond::Identity());
    return p;
}

std::vector<Mat3> FkResult::bone_rotations() const {
    std::vector<Mat3> out;
    out.reserve(bone_transforms.size());
    for (const auto& t : bone_transforms) out.push_back(t.rotation);
    return out;
}

void validate_pose(const Skeleton& skel, const PoseFrame& pose) {
    if (static_cast<int>(pose.rotations.size()) != skel.num_joints()) {
        throw ConfigError("pose has " + std::to_string(pose.rotations.size()) +
                          " rotations, skeleton has " + std::to_string(skel.num_joints()) +
                          " joints");
    }
    for (std::size_t j = 0; j < pose.rotations.size(); ++j) {
        const double norm = pose.rotations[j].norm();
        if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-9) {
            throw ConfigError("rotation of joint " + std::to_string(j) + " is not a unit quaternion");
        }
    }
    if (!pose.root_translation.allFinite()) throw ConfigError("root translation is not finite");
}

FkResult forward_kinematics(const Skeleton& skel, const PoseFrame& pose) {
    validate_pose(skel, pose);
    const auto& joints = skel.joints();
    const int n = skel.num_joints();
    FkResult fk;
    fk.joint_rotations.resize(n);
    fk.joint_positions.resize(n);
    // Joint displacements from rest are propagated instead of positions so
    // the rest pose is reproduced exactly.
    std::vector<Vec3> displacement(n);
    fk.joint_rotations[0] = pose.rotations[0].toRotationMatrix();
    displacement[0] = pose.root_translation;
    for (int j = 1; j < n; ++j) {
        const int p = *joints[j].parent;
        fk.joint_rotations[j] = fk.joint_rotations[p] * pose.rotations[j].toRotationMatrix();
        displacement[j] = displacement[p] + (fk.joint_rotations[p] - Mat3::Identity()) *
                                                (joints[j].rest - joints[p].rest);
    }
    for (int j = 0; j < n; ++j) fk.joint_positions[j] = joints[j].rest + displacement[j];
    fk.bone_transforms.reserve(skel.num_bones());
    for (const Bone& bone : skel.bones()) {
        RigidTransform t;
        t.rotation = fk.joint_rotations[bone.parent_joint];
        t.pivot = bone.head;
        t.displacement = displacement[bone.parent_joint];
        fk.bone_transforms.push_back(t);
    }
    return fk;
}

namespace {

Vec3 read_vec3(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(what + " must be an array of 3 numbers");
    Vec3 v;
    for (int c = 0; c < 3; ++c) {
        if (!j[c].is_number()) throw ConfigError(what + " must be an array of 3 numbers");
        v[c] = j[c].get<double>();
    }
    return v;
}

Eigen::Quaterniond read_quat(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 4) throw ConfigError(what + " must be [w, x, y, z]");
    double q[4];
    for (int c = 0; c < 4; ++c) {
        if (!j[c].is_number()) throw ConfigError(what + " must be [w, x, y, z]");
        q[c] = j[c].get<double>();
    }
    Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
    const double norm = quat.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6) {
        throw ConfigError(what + " is not a unit quaternion");
    }
    quat.normalize();
    return quat;
}

PoseFrame read_frame(const json& f, int num_joints, std::size_t index) {
    const std::string where = "frame " + std::to_string(index);
    PoseFrame pose = PoseFrame::identity(num_joints);
    if (f.contains("root_translation")) {
        pose.root_translation = read_vec3(f["root_translation"], where + " root_translation");
    }
    if (f.contains("rotations")) {
        const json& rots = f["rotations"];
        if (!rots.is_array() || static_cast<int>(rots.size()) != num_joints) {
            throw ConfigError(where + ": expected " + std::to_string(num_joints) + " rotations");
        }
        for (int j = 0; j < num_joints; ++j) {
            pose.rotations[j] = read_quat(rots[j], where + " rotation " + std::to_string(j));
        }
    }
    return pose;
}

}  // namespace

RigAnimation parse_rig(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("rig JSON: ") + e.what());
    }
    if (!doc.contains("joints") || !doc["joints"].is_array()) {
        throw ConfigError("rig JSON: missing \"joints\" array");
    }
    std::vector<Joint> joints;
    for (const json& j : doc["joints"]) {
        Joint joint;
        joint.name = j.value("name", "joint" + std::to_string(joints.size()));
        if (j.contains("parent") && !j["parent"].is_null()) {
            if (!j["parent"].is_number_integer()) throw ConfigError("joint parent must be an integer");
            joint.parent = j["parent"].get<int>();
        }
        if (!j.contains("rest")) throw ConfigError("joint '" + joint.name + "' has no rest position");
        joint.rest = read_vec3(j["rest"], "joint '" + joint.name + "' rest");
        joints.push_back(std::move(joint));
    }
    RigAnimation rig{Skeleton(std::move(joints)), {}};
    if (doc.contains("frames")) {
        const json& frames = doc["frames"];
        if (!frames.is_array()) throw ConfigError("rig JSON: \"frames\" must be an array");
        for (std::size_t i = 0; i < frames.size(); ++i) {
            rig.frames.push_back(read_frame(frames[i], rig.skeleton.num_joints(), i));
        }
    }
    return rig;
}

RigAnimation load_rig(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open rig file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_rig(ss.str());
}

std::string rig_to_json(const Skeleton& skel, const std::vector<PoseFrame>& frames) {
    json doc;
    doc["joints"] = json::array();
    for (const Joint& j : skel.joints()) {
        json jj;
        jj["name"] = j.name;
        jj["parent"] = j.parent ? json(*j.parent) : json(nullptr);
        jj["rest"] = {j.rest.x(), j.rest.y(), j.rest.z()};
        doc["joints"].push_back(jj);
    }
    doc["frames"] = json::array();
    for (const PoseFrame& f : frames) {
        json jf;
        jf["root_translation"] = {f.root_translation.x(), f.root_translation.y(),
                                  f.root_translation.z()};
        jf["rotations"] = json::array();
        for (const auto& q : f.rotations) jf["rotations"].push_back({q.w(), q.x(), q.y(), q.z()});
        doc["frames"].push_back(jf);
    }
    return doc.dump(2);
}

}  // namespace mfemskin
