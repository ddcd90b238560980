#pragma once

#include <optional>

#include <Eigen/SparseCholesky>

#include "mfemskin/constraints.hpp"
#include "mfemskin/defgrad.hpp"
#include "mfemskin/material.hpp"
#include "mfemskin/rotation_blocks.hpp"

namespace mfemskin {

/// Vertex-only system left after eliminating strain and multipliers:
///
///   A = H_x + (R^+ B)^T H_s (R^+ B)
///
/// Stored in displacement form around `reference`: the solution is
/// reference + A^-1 rhs, where rhs is minus the gradient of the condensed
/// energy at the reference positions.
struct CondensedSystem {
    SparseMat matrix;
    VecX rhs;
    VecX reference;
    bool hessian_constant = true;
};

/// Throws NumericalError when there are no pins (the system would be
/// singular).
CondensedSystem assemble_condensed(const DefGradOperator& defgrad, const VecX& reference,
                                   const RotationBlocks& rotations, const GlobalHsGs& hs,
                                   const ConstraintSystem& constraints);

/// Sparse LDL^T with the symbolic analysis kept between frames as long as the
/// sparsity pattern does not change.
class SpdFactorization {
public:
    /// Throws NumericalError naming the smallest pivot when A is not SPD.
    void factorize(const SparseMat& a);
    VecX solve(const VecX& rhs) const;

    bool analyzed() const { return analyzed_; }
    int symbolic_analyses() const { return analyses_; }

private:
    bool same_pattern(const SparseMat& a) const;

    Eigen::SimplicialLDLT<SparseMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
    bool analyzed_ = false;
    int analyses_ = 0;
    Eigen::VectorXi outer_;
    Eigen::VectorXi inner_;
};

/// Factorizes and solves one frame. Throws NumericalError for a non-finite
/// result.
VecX solve_frame(const CondensedSystem& system, SpdFactorization& factorization);

/// Strain, multipliers and the constraint residual |Bx - [R]s|_inf.
///
/// s = R^+ B x and lambda = [R] D^-1 (H_s (s - s0) + g_s), which lies in the
/// range of [R]. Across cluster boundaries Bx is generally not in that range,
/// so the residual is reported rather than driven to zero.
struct MixedState {
    VecX strain;       // 6m
    VecX multipliers;  // 9m
    double constraint_residual = 0.0;
};

MixedState recover_multipliers_and_strain(const DefGradOperator& defgrad, const VecX& x,
                                          const RotationBlocks& rotations, const GlobalHsGs& hs);

/// Infinity norms of the Lagrangian gradient blocks. The multiplier block is
/// measured as [R]^T (Bx - [R]s), its component in the range of [R].
struct StationarityResidual {
    double strain = 0.0;
    double position = 0.0;
    double multiplier = 0.0;
    double max() const;
};

StationarityResidual stationarity_residual(const DefGradOperator& defgrad,
                                           const RotationBlocks& rotations, const GlobalHsGs& hs,
                                           const ConstraintSystem& constraints, const VecX& strain,
                                           const VecX& x, const VecX& multipliers);

}  // namespace mfemskin
