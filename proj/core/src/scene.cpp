#include "mfemskin/scene.hpp"

#include <chrono>
#include <cmath>

#include "mfemskin/errors.hpp"
#include "mfemskin/kkt_oracle.hpp"
#include "mfemskin/rotation_blocks.hpp"

namespace mfemskin {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Scene::Scene(TetMesh mesh, Skeleton skeleton, const MaterialParams& material,
             const SceneOptions& options)
    : mesh_(std::move(mesh)),
      skeleton_(std::move(skeleton)),
      defgrad_(mesh_),
      clustering_(cluster_rotations(mesh_, skeleton_, options.strategy, options.user_clustering)),
      pins_(select_pins(mesh_, skeleton_, options.pin_radius.value_or(default_pin_radius(mesh_)),
                        options.pin_stiffness)),
      materials_(resolve_materials(material, mesh_.num_tets())),
      hs_(assemble_rest_hs_gs(materials_, mesh_.volumes())),
      rest_(mesh_.rest_positions()),
      rest_volume_(mesh_.total_volume()) {}

RotationBlocks Scene::rotations_for(const PoseFrame& pose) const {
    const FkResult fk = forward_kinematics(skeleton_, pose);
    return build_rotation_blocks(clustering_, fk.bone_rotations());
}

ConstraintSystem Scene::constraints_for(const PoseFrame& pose, const VecX& force) const {
    const FkResult fk = forward_kinematics(skeleton_, pose);
    return ConstraintSystem(pins_, pin_targets(pins_, fk), mesh_.num_vertices(), force);
}

FrameSolution Scene::solve(const PoseFrame& pose, const VecX& force, bool validate, int frame) {
    const auto start = Clock::now();
    FrameReport report;
    report.frame = frame;

    if (!hs_.quadratic && last_strain_.size() == hs_.linearization.size()) {
        hs_ = assemble_global_hs_gs(materials_, mesh_.volumes(), last_strain_);
    }
    const FkResult fk = forward_kinematics(skeleton_, pose);
    const RotationBlocks rotations = build_rotation_blocks(clustering_, fk.bone_rotations());
    const ConstraintSystem constraints(pins_, pin_targets(pins_, fk), mesh_.num_vertices(), force);
    const CondensedSystem system =
        assemble_condensed(defgrad_, rest_, rotations, hs_, constraints);
    report.assemble_seconds = seconds_since(start);

    const auto factor_start = Clock::now();
    factorization_.factorize(system.matrix);
    report.factor_seconds = seconds_since(factor_start);

    const auto solve_start = Clock::now();
    VecX x = system.reference + factorization_.solve(system.rhs);
    report.solve_seconds = seconds_since(solve_start);
    if (!x.allFinite()) throw NumericalError("solve produced non-finite positions");

    report.volume = mesh_volume(mesh_, x);
    report.volume_change_percent = 100.0 * (report.volume - rest_volume_) / rest_volume_;
    report.max_pin_residual = constraints.pin_residual(x);
    report.total_seconds = seconds_since(start);
    if (!hs_.quadratic) {
        last_strain_ = recover_multipliers_and_strain(defgrad_, x, rotations, hs_).strain;
    }

    if (validate) {
        ValidationReport v;
        const MixedState state = recover_multipliers_and_strain(defgrad_, x, rotations, hs_);
        v.constraint_residual = state.constraint_residual;
        const KKTSystem kkt = build_kkt(defgrad_, rotations, hs_, constraints);
        const double scale = std::max(kkt.rhs.cwiseAbs().maxCoeff(), 1e-300);
        v.stationarity_residual =
            stationarity_residual(defgrad_, rotations, hs_, constraints, state.strain, x,
                                  state.multipliers)
                .max() /
            scale;
        if (kkt.size() <= kKktOracleLimit) {
            const MixedSolution oracle = solve_full_kkt(kkt, rotations);
            v.rel_diff_condensed_vs_kkt = (x - oracle.x).cwiseAbs().maxCoeff() /
                                          std::max(oracle.x.cwiseAbs().maxCoeff(), 1e-300);
        } else {
            v.rel_diff_condensed_vs_kkt = std::nan("");
        }
        report.validation = v;
    }
    return {std::move(x), report};
}

}  // namespace mfemskin
