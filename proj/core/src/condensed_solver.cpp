#include "mfemskin/condensed_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfemskin/errors.hpp"

namespace mfemskin {

using Mat6x12 = Eigen::Matrix<double, 6, 12>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Vec12 = Eigen::Matrix<double, 12, 1>;

CondensedSystem assemble_condensed(const DefGradOperator& defgrad, const VecX& reference,
                                   const RotationBlocks& rotations, const GlobalHsGs& hs,
                                   const ConstraintSystem& constraints) {
    const int m = defgrad.num_tets();
    const int dofs = static_cast<int>(reference.size());
    if (rotations.num_tets() != m || hs.num_tets() != m || constraints.num_dofs() != dofs) {
        throw ConfigError("condensed assembly: inconsistent dimensions");
    }
    if (constraints.num_pins() == 0) {
        throw NumericalError(
            "condensed system is singular: no pinned vertices (rigid motions are unconstrained)");
    }

    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<std::size_t>(m) * 144 + 3 * constraints.num_pins());
    VecX gradient = constraints.gradient(reference);

    for (int k = 0; k < m; ++k) {
        const Tet& tet = defgrad.tet(k);
        const Mat6x12 c = rotations.pinv[k] * defgrad.block(k);
        const Mat12 a = c.transpose() * hs.blocks[k] * c;
        const Vec6 strain = c * gather(tet, reference);
        const Vec6 stress = hs.blocks[k] * (strain - hs.linearization.segment<6>(6 * k)) +
                            hs.gradient.segment<6>(6 * k);
        const Vec12 local_grad = c.transpose() * stress;
        for (int va = 0; va < 4; ++va) {
            for (int i = 0; i < 3; ++i) {
                const int row = 3 * tet[va] + i;
                gradient[row] += local_grad[3 * va + i];
                for (int vb = 0; vb < 4; ++vb)
                    for (int j = 0; j < 3; ++j)
                        triplets.emplace_back(row, 3 * tet[vb] + j, a(3 * va + i, 3 * vb + j));
            }
        }
    }
    const SparseMat hx = constraints.hessian();
    for (int col = 0; col < hx.outerSize(); ++col)
        for (SparseMat::InnerIterator it(hx, col); it; ++it)
            triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());

    CondensedSystem system;
    system.matrix.resize(dofs, dofs);
    system.matrix.setFromTriplets(triplets.begin(), triplets.end());
    system.matrix.makeCompressed();
    system.rhs = -gradient;
    system.reference = reference;
    system.hessian_constant = hs.quadratic;
    return system;
}

bool SpdFactorization::same_pattern(const SparseMat& a) const {
    if (a.outerSize() + 1 != outer_.size() || a.nonZeros() != inner_.size()) return false;
    return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1, outer_.data()) &&
           std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), inner_.data());
}

void SpdFactorization::factorize(const SparseMat& a_in) {
    SparseMat a = a_in;
    a.makeCompressed();
    if (!analyzed_ || !same_pattern(a)) {
        ldlt_.analyzePattern(a);
        outer_ = Eigen::Map<const Eigen::VectorXi>(a.outerIndexPtr(), a.outerSize() + 1);
        inner_ = Eigen::Map<const Eigen::VectorXi>(a.innerIndexPtr(), a.nonZeros());
        analyzed_ = true;
        ++analyses_;
    }
    ldlt_.factorize(a);
    if (ldlt_.info() != Eigen::Success) {
        throw NumericalError("factorization failed: matrix is singular (insufficient pinning?)");
    }
    const VecX d = ldlt_.vectorD();
    const double largest = d.cwiseAbs().maxCoeff();
    Eigen::Index where = 0;
    const double smallest = d.minCoeff(&where);
    if (!std::isfinite(smallest) || smallest <= 1e-14 * largest) {
        std::ostringstream os;
        os << "matrix is not positive definite: smallest pivot " << smallest << " at index "
           << where << " (largest " << largest
           << "); check pinning and the material Hessian";
        throw NumericalError(os.str());
    }
}

VecX SpdFactorization::solve(const VecX& rhs) const { return ldlt_.solve(rhs); }

VecX solve_frame(const CondensedSystem& system, SpdFactorization& factorization) {
    factorization.factorize(system.matrix);
    VecX x = system.reference + factorization.solve(system.rhs);
    if (!x.allFinite()) throw NumericalError("solve produced non-finite positions");
    return x;
}

MixedState recover_multipliers_and_strain(const DefGradOperator& defgrad, const VecX& x,
                                          const RotationBlocks& rotations, const GlobalHsGs& hs) {
    const int m = defgrad.num_tets();
    MixedState state;
    state.strain.resize(6 * m);
    state.multipliers.resize(9 * m);
    for (int k = 0; k < m; ++k) {
        const Vec9 f = defgrad.apply(k, x);
        const Vec6 s = rotations.pinv[k] * f;
        const Vec6 stress = hs.blocks[k] * (s - hs.linearization.segment<6>(6 * k)) +
                            hs.gradient.segment<6>(6 * k);
        state.strain.segment<6>(6 * k) = s;
        state.multipliers.segment<9>(9 * k) = rotations.pinv[k].transpose() * stress;
        state.constraint_residual = std::max(
            state.constraint_residual, (f - rotations.blocks[k] * s).cwiseAbs().maxCoeff());
    }
    return state;
}

double StationarityResidual::max() const { return std::max({strain, position, multiplier}); }

StationarityResidual stationarity_residual(const DefGradOperator& defgrad,
                                           const RotationBlocks& rotations, const GlobalHsGs& hs,
                                           const ConstraintSystem& constraints, const VecX& strain,
                                           const VecX& x, const VecX& multipliers) {
    const int m = defgrad.num_tets();
    StationarityResidual r;
    VecX grad_x = constraints.gradient(x);
    for (int k = 0; k < m; ++k) {
        const Tet& tet = defgrad.tet(k);
        const Vec6 s = strain.segment<6>(6 * k);
        const Vec9 lambda = multipliers.segment<9>(9 * k);
        const Vec6 rs = hs.blocks[k] * (s - hs.linearization.segment<6>(6 * k)) +
                        hs.gradient.segment<6>(6 * k) - rotations.blocks[k].transpose() * lambda;
        r.strain = std::max(r.strain, rs.cwiseAbs().maxCoeff());
        const Vec6 rl = rotations.blocks[k].transpose() *
                        (defgrad.apply(k, x) - rotations.blocks[k] * s);
        r.multiplier = std::max(r.multiplier, rl.cwiseAbs().maxCoeff());
        const Vec12 bt_lambda = defgrad.block(k).transpose() * lambda;
        for (int a = 0; a < 4; ++a) grad_x.segment<3>(3 * tet[a]) += bt_lambda.segment<3>(3 * a);
    }
    r.position = grad_x.cwiseAbs().maxCoeff();
    return r;
}

}  // namespace mfemskin
