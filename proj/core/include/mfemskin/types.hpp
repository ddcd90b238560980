#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

namespace mfemskin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat9x6 = Eigen::Matrix<double, 9, 6>;
using Mat6x9 = Eigen::Matrix<double, 6, 9>;
using Mat9x12 = Eigen::Matrix<double, 9, 12>;
using VecX = Eigen::VectorXd;
using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Project-wide flattening convention for 3x3 matrices: row-major,
// vec(M)[3*i + j] = M(i, j).
inline Vec9 vec(const Mat3& m) {
    Vec9 v;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) v[3 * i + j] = m(i, j);
    return v;
}

inline Mat3 mat(const Vec9& v) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = v[3 * i + j];
    return m;
}

// Symmetric 6-vector ordering: (xx, yy, zz, xy, xz, yz), plain entries.
inline constexpr int kSymRow[6] = {0, 1, 2, 0, 0, 1};
inline constexpr int kSymCol[6] = {0, 1, 2, 1, 2, 2};

inline Vec6 vec6(const Mat3& s) {
    Vec6 v;
    for (int c = 0; c < 6; ++c) v[c] = s(kSymRow[c], kSymCol[c]);
    return v;
}

inline Mat3 mat6(const Vec6& v) {
    Mat3 s;
    for (int c = 0; c < 6; ++c) {
        s(kSymRow[c], kSymCol[c]) = v[c];
        s(kSymCol[c], kSymRow[c]) = v[c];
    }
    return s;
}

inline Vec6 identity6() {
    Vec6 v;
    v << 1, 1, 1, 0, 0, 0;
    return v;
}

}  // namespace mfemskin
