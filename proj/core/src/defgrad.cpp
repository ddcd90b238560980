#include "mfemskin/defgrad.hpp"

#include <Eigen/LU>

#include "mfemskin/errors.hpp"

namespace mfemskin {

Eigen::Matrix<double, 12, 1> gather(const Tet& tet, const VecX& positions) {
    Eigen::Matrix<double, 12, 1> local;
    for (int a = 0; a < 4; ++a) local.segment<3>(3 * a) = positions.segment<3>(3 * tet[a]);
    return local;
}

DefGradOperator::DefGradOperator(const TetMesh& mesh) : tets_(mesh.tets()) {
    const auto& verts = mesh.vertices();
    blocks_.resize(tets_.size());
    std::vector<int> singular;
    for (std::size_t k = 0; k < tets_.size(); ++k) {
        const Tet& t = tets_[k];
        Mat3 dm;
        for (int c = 0; c < 3; ++c) dm.col(c) = verts[t[c + 1]] - verts[t[0]];
        Eigen::FullPivLU<Mat3> lu(dm);
        if (!lu.isInvertible()) {
            singular.push_back(static_cast<int>(k));
            continue;
        }
        const Mat3 dm_inv = lu.inverse();

        // F_ij = sum_c (x_{c+1} - x_0)_i * dm_inv(c, j), row-major vec.
        Mat9x12& b = blocks_[k];
        b.setZero();
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const int row = 3 * i + j;
                double sum = 0.0;
                for (int c = 0; c < 3; ++c) {
                    b(row, 3 * (c + 1) + i) = dm_inv(c, j);
                    sum += dm_inv(c, j);
                }
                b(row, i) = -sum;
            }
        }
    }
    if (!singular.empty()) throw DegenerateElementError(std::move(singular));

    std::vector<Triplet> triplets;
    triplets.reserve(tets_.size() * 36);
    for (std::size_t k = 0; k < tets_.size(); ++k) {
        const Mat9x12& b = blocks_[k];
        for (int row = 0; row < 9; ++row) {
            for (int a = 0; a < 4; ++a) {
                for (int i = 0; i < 3; ++i) {
                    const double value = b(row, 3 * a + i);
                    if (value != 0.0) {
                        triplets.emplace_back(static_cast<int>(9 * k) + row, 3 * tets_[k][a] + i,
                                              value);
                    }
                }
            }
        }
    }
    global_.resize(9 * mesh.num_tets(), 3 * mesh.num_vertices());
    global_.setFromTriplets(triplets.begin(), triplets.end());
}

Vec9 DefGradOperator::apply(int tet, const VecX& positions) const {
    return blocks_[tet] * gather(tets_[tet], positions);
}

}  // namespace mfemskin
