#include "mfemskin/kkt_oracle.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>

#include "mfemskin/errors.hpp"

namespace mfemskin {

KKTSystem build_kkt(const DefGradOperator& defgrad, const RotationBlocks& rotations,
                    const GlobalHsGs& hs, const ConstraintSystem& constraints) {
    const int m = defgrad.num_tets();
    const int ns = 6 * m;
    const int nx = constraints.num_dofs();
    const int nl = 6 * m;

    // Constraint rows [R]^T [ -[R]  B ]: the full 9m-row constraint projected
    // onto the range of [R].
    const SparseMat r = rotations.matrix();
    const SparseMat rt = r.transpose();
    const SparseMat c_s = -(rt * r);
    const SparseMat c_x = rt * defgrad.matrix();
    const SparseMat h_s = hs.matrix();
    const SparseMat h_x = constraints.hessian();

    std::vector<Triplet> t;
    auto add = [&t](const SparseMat& block, int row0, int col0, bool transpose) {
        for (int col = 0; col < block.outerSize(); ++col) {
            for (SparseMat::InnerIterator it(block, col); it; ++it) {
                const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
                if (transpose) t.emplace_back(row0 + j, col0 + i, it.value());
                else t.emplace_back(row0 + i, col0 + j, it.value());
            }
        }
    };
    add(h_s, 0, 0, false);
    add(h_x, ns, ns, false);
    add(c_s, ns + nx, 0, false);
    add(c_x, ns + nx, ns, false);
    add(c_s, 0, ns + nx, true);
    add(c_x, ns, ns + nx, true);

    KKTSystem kkt;
    kkt.strain_dofs = ns;
    kkt.position_dofs = nx;
    kkt.multiplier_dofs = nl;
    kkt.matrix.resize(kkt.size(), kkt.size());
    kkt.matrix.setFromTriplets(t.begin(), t.end());
    kkt.matrix.makeCompressed();

    kkt.rhs = VecX::Zero(kkt.size());
    kkt.rhs.head(ns) = h_s * hs.linearization - hs.gradient;
    kkt.rhs.segment(ns, nx) = constraints.stiffness() *
                                  (constraints.selector().transpose() * constraints.targets()) +
                              constraints.force();
    return kkt;
}

MixedSolution solve_full_kkt(const KKTSystem& kkt, const RotationBlocks& rotations, int limit) {
    const int n = kkt.size();
    if (n > limit) {
        throw NumericalError("KKT oracle limited to " + std::to_string(limit) + " unknowns, got " +
                             std::to_string(n));
    }
    VecX sol;
    if (n < kKktDenseLimit) {
        const Eigen::MatrixXd dense(kkt.matrix);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
        if (!lu.isInvertible()) throw NumericalError("KKT system is singular");
        sol = lu.solve(kkt.rhs);
    } else {
        Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(kkt.matrix);
        lu.factorize(kkt.matrix);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("KKT system is singular: " + lu.lastErrorMessage());
        }
        sol = lu.solve(kkt.rhs);
        // One step of iterative refinement against pivoting error.
        const VecX residual = kkt.rhs - kkt.matrix * sol;
        sol += lu.solve(residual);
    }
    if (!sol.allFinite()) throw NumericalError("KKT solve produced non-finite values");

    MixedSolution out;
    out.strain = sol.head(kkt.strain_dofs);
    out.x = sol.segment(kkt.strain_dofs, kkt.position_dofs);
    const VecX nu = sol.tail(kkt.multiplier_dofs);
    out.multipliers.resize(9 * rotations.num_tets());
    for (int k = 0; k < rotations.num_tets(); ++k) {
        out.multipliers.segment<9>(9 * k) = rotations.blocks[k] * nu.segment<6>(6 * k);
    }
    return out;
}

}  // namespace mfemskin
