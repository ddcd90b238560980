#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfemskin/pins.hpp"
#include "mfemskin/types.hpp"

namespace mfemskin {

/// Quadratic pin penalty k_s/2 |P x - x_p|^2 plus a constant external load f.
class ConstraintSystem {
public:
    ConstraintSystem(const PinSet& pins, VecX targets, int num_vertices, VecX force);

    const SparseMat& selector() const { return selector_; }  // P, 3|pins| x 3n
    const VecX& targets() const { return targets_; }
    const VecX& force() const { return force_; }
    double stiffness() const { return stiffness_; }
    int num_pins() const { return static_cast<int>(targets_.size() / 3); }
    int num_dofs() const { return static_cast<int>(force_.size()); }

    /// H_x = k_s P^T P
    SparseMat hessian() const;
    /// k_s P^T (P x - x_p) - f
    VecX gradient(const VecX& x) const;
    /// |P x - x_p|_inf
    double pin_residual(const VecX& x) const;

private:
    SparseMat selector_;
    VecX targets_;
    VecX force_;
    double stiffness_;
};

struct ExternalForce {
    int vertex;
    Vec3 force;
};

/// {"constant": [{"vertex": i, "force": [fx, fy, fz]}...],
///  "frames": [[{...}...], ...]}. Per-frame lists add to the constant one;
/// frames past the end of the list get the constant load only.
struct ForceSpec {
    std::vector<ExternalForce> constant;
    std::vector<std::vector<ExternalForce>> per_frame;

    VecX for_frame(int frame, int num_vertices) const;
};

ForceSpec load_force_spec(const std::filesystem::path& path);
ForceSpec parse_force_spec(const std::string& json_text);

}  // namespace mfemskin
