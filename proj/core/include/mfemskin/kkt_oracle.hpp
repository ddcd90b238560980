#pragma once

#include "mfemskin/condensed_solver.hpp"

namespace mfemskin {

/// Full saddle-point system over (s, x, nu):
///
///   [ H_s      0        -[R]^T[R] ] [ s  ]   [ H_s s0 - g_s ]
///   [ 0        H_x      B^T[R]    ] [ x  ] = [ k P^T x_p + f ]
///   [ -[R]^T[R] [R]^T B  0        ] [ nu ]   [ 0             ]
///
/// i.e. the block layout with [-R] and B, multipliers restricted to the range
/// of [R] (lambda = [R] nu). Test and --validate use only.
struct KKTSystem {
    SparseMat matrix;
    VecX rhs;
    int strain_dofs = 0;
    int position_dofs = 0;
    int multiplier_dofs = 0;
    int size() const { return strain_dofs + position_dofs + multiplier_dofs; }
};

inline constexpr int kKktOracleLimit = 20000;
inline constexpr int kKktDenseLimit = 2000;

KKTSystem build_kkt(const DefGradOperator& defgrad, const RotationBlocks& rotations,
                    const GlobalHsGs& hs, const ConstraintSystem& constraints);

struct MixedSolution {
    VecX strain;
    VecX x;
    VecX multipliers;  // 9m, [R] nu
};

/// Direct solve: dense LU below kKktDenseLimit unknowns, sparse LU up to
/// `limit`. Throws NumericalError for a singular system or when the size
/// exceeds the limit.
MixedSolution solve_full_kkt(const KKTSystem& kkt, const RotationBlocks& rotations,
                             int limit = kKktOracleLimit);

}  // namespace mfemskin
