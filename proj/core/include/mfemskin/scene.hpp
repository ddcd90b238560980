#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mfemskin/clustering.hpp"
#include "mfemskin/condensed_solver.hpp"
#include "mfemskin/constraints.hpp"
#include "mfemskin/defgrad.hpp"
#include "mfemskin/material.hpp"
#include "mfemskin/pins.hpp"
#include "mfemskin/skeleton.hpp"
#include "mfemskin/tet_mesh.hpp"

namespace mfemskin {

struct SceneOptions {
    ClusterStrategy strategy = ClusterStrategy::ClosestBone;
    std::optional<std::vector<int>> user_clustering;
    std::optional<double> pin_radius;  // default_pin_radius() when unset
    double pin_stiffness = 1000.0;
};

struct ValidationReport {
    double rel_diff_condensed_vs_kkt = 0.0;
    double stationarity_residual = 0.0;
    double constraint_residual = 0.0;
};

struct FrameReport {
    int frame = 0;
    double assemble_seconds = 0.0;
    double factor_seconds = 0.0;
    double solve_seconds = 0.0;
    double total_seconds = 0.0;
    double volume = 0.0;
    double volume_change_percent = 0.0;
    double max_pin_residual = 0.0;
    std::optional<ValidationReport> validation;
};

struct FrameSolution {
    VecX positions;
    FrameReport report;
};

/// Everything that stays fixed across frames, plus the per-frame solve.
///
/// The rest data, clustering, pins and material derivatives are computed
/// once. solve() reuses the symbolic factorization and is not reentrant: one
/// solve at a time per Scene. Non-quadratic materials are re-linearized at the
/// previous frame's strain before each solve.
class Scene {
public:
    Scene(TetMesh mesh, Skeleton skeleton, const MaterialParams& material,
          const SceneOptions& options = {});

    const TetMesh& mesh() const { return mesh_; }
    const Skeleton& skeleton() const { return skeleton_; }
    const DefGradOperator& defgrad() const { return defgrad_; }
    const RotationClustering& clustering() const { return clustering_; }
    const PinSet& pins() const { return pins_; }
    const GlobalHsGs& material_derivatives() const { return hs_; }
    const VecX& rest_positions() const { return rest_; }
    double rest_volume() const { return rest_volume_; }

    /// Throws ConfigError for a pose that does not match the skeleton and
    /// NumericalError when the solve fails. `force` may be empty.
    FrameSolution solve(const PoseFrame& pose, const VecX& force = {}, bool validate = false,
                        int frame = 0);

    /// The pieces of one frame's system without solving it.
    RotationBlocks rotations_for(const PoseFrame& pose) const;
    ConstraintSystem constraints_for(const PoseFrame& pose, const VecX& force = {}) const;

private:
    TetMesh mesh_;
    Skeleton skeleton_;
    DefGradOperator defgrad_;
    RotationClustering clustering_;
    PinSet pins_;
    std::vector<std::shared_ptr<const MaterialModel>> materials_;
    GlobalHsGs hs_;
    VecX last_strain_;  // only tracked for non-quadratic materials
    VecX rest_;
    double rest_volume_;
    SpdFactorization factorization_;
};

}  // namespace mfemskin
