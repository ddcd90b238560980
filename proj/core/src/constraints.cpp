#include "mfemskin/constraints.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mfemskin/errors.hpp"

namespace mfemskin {

ConstraintSystem::ConstraintSystem(const PinSet& pins, VecX targets, int num_vertices, VecX force)
    : targets_(std::move(targets)), stiffness_(pins.stiffness) {
    if (!(stiffness_ > 0.0)) throw ConfigError("pin stiffness must be positive");
    if (targets_.size() != 3 * pins.size()) throw ConfigError("pin target vector has wrong length");
    if (force.size() == 0) force = VecX::Zero(3 * num_vertices);
    if (force.size() != 3 * num_vertices) throw ConfigError("force vector has wrong length");
    force_ = std::move(force);

    std::vector<Triplet> triplets;
    triplets.reserve(3 * pins.size());
    for (int i = 0; i < pins.size(); ++i) {
        const int v = pins.vertices[i];
        if (v < 0 || v >= num_vertices) throw ConfigError("pinned vertex out of range");
        for (int c = 0; c < 3; ++c) triplets.emplace_back(3 * i + c, 3 * v + c, 1.0);
    }
    selector_.resize(3 * pins.size(), 3 * num_vertices);
    selector_.setFromTriplets(triplets.begin(), triplets.end());
}

SparseMat ConstraintSystem::hessian() const {
    SparseMat h = stiffness_ * (selector_.transpose() * selector_);
    return h;
}

VecX ConstraintSystem::gradient(const VecX& x) const {
    return stiffness_ * (selector_.transpose() * (selector_ * x - targets_)) - force_;
}

double ConstraintSystem::pin_residual(const VecX& x) const {
    if (targets_.size() == 0) return 0.0;
    return (selector_ * x - targets_).cwiseAbs().maxCoeff();
}

VecX ForceSpec::for_frame(int frame, int num_vertices) const {
    VecX f = VecX::Zero(3 * num_vertices);
    auto add = [&](const std::vector<ExternalForce>& list) {
        for (const auto& e : list) {
            if (e.vertex < 0 || e.vertex >= num_vertices) {
                throw ConfigError("force applied to vertex " + std::to_string(e.vertex) +
                                  " outside the mesh");
            }
            f.segment<3>(3 * e.vertex) += e.force;
        }
    };
    add(constant);
    if (frame >= 0 && frame < static_cast<int>(per_frame.size())) add(per_frame[frame]);
    return f;
}

namespace {

std::vector<ExternalForce> read_force_list(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("force list must be an array");
    std::vector<ExternalForce> out;
    for (const auto& e : j) {
        if (!e.contains("vertex") || !e.contains("force")) {
            throw ConfigError("force entries need \"vertex\" and \"force\"");
        }
        const auto& f = e["force"];
        if (!f.is_array() || f.size() != 3) throw ConfigError("\"force\" must be [fx, fy, fz]");
        out.push_back({e["vertex"].get<int>(),
                       Vec3(f[0].get<double>(), f[1].get<double>(), f[2].get<double>())});
    }
    return out;
}

}  // namespace

ForceSpec parse_force_spec(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("forces JSON: ") + e.what());
    }
    ForceSpec spec;
    try {
        if (doc.contains("constant")) spec.constant = read_force_list(doc["constant"]);
        if (doc.contains("frames")) {
            for (const auto& frame : doc["frames"]) spec.per_frame.push_back(read_force_list(frame));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("forces JSON: ") + e.what());
    }
    return spec;
}

ForceSpec load_force_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open forces file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_force_spec(ss.str());
}

}  // namespace mfemskin
