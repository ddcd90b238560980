#pragma once

#include <vector>

#include "mfemskin/tet_mesh.hpp"
#include "mfemskin/types.hpp"

namespace mfemskin {

/// Linear map from stacked vertex coordinates to row-major flattened
/// deformation gradients, F_k = Ds_k * Dm_k^-1.
class DefGradOperator {
public:
    explicit DefGradOperator(const TetMesh& mesh);

    /// 9x12 block acting on (x_v0, x_v1, x_v2, x_v3) of tet k.
    const Mat9x12& block(int tet) const { return blocks_[tet]; }
    const std::vector<Mat9x12>& blocks() const { return blocks_; }

    /// Global operator, 9m x 3n.
    const SparseMat& matrix() const { return global_; }

    /// vec(F_k) for one element, without touching the global matrix.
    Vec9 apply(int tet, const VecX& positions) const;

    const Tet& tet(int k) const { return tets_[k]; }
    int num_tets() const { return static_cast<int>(blocks_.size()); }

private:
    std::vector<Tet> tets_;
    std::vector<Mat9x12> blocks_;
    SparseMat global_;
};

/// Gathers the 12 coordinates of a tet from a stacked position vector.
Eigen::Matrix<double, 12, 1> gather(const Tet& tet, const VecX& positions);

}  // namespace mfemskin
