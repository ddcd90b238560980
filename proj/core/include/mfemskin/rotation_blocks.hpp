#pragma once

#include <vector>

#include "mfemskin/clustering.hpp"
#include "mfemskin/types.hpp"

namespace mfemskin {

/// 9x6 block with columns vec(R * E_c) for the symmetric basis E_c, so that
/// block * vec6(S) = vec(R * S).
Mat9x6 rotation_block(const Mat3& rotation);

/// Left pseudoinverse of rotation_block(R). Uses
/// block^T block = diag(1, 1, 1, 2, 2, 2), which holds for orthonormal R.
Mat6x9 rotation_block_pinv(const Mat3& rotation);

/// Per-element rotation blocks [R_k] and their pseudoinverses.
struct RotationBlocks {
    std::vector<Mat9x6> blocks;
    std::vector<Mat6x9> pinv;

    int num_tets() const { return static_cast<int>(blocks.size()); }
    SparseMat matrix() const;       // 9m x 6m
    SparseMat pinv_matrix() const;  // 6m x 9m
};

/// Throws ConfigError when a rotation is not orthonormal with det +1
/// (tolerance 1e-9).
RotationBlocks build_rotation_blocks(const RotationClustering& clustering,
                                     const std::vector<Mat3>& bone_rotations);

RotationBlocks build_rotation_blocks(const std::vector<Mat3>& element_rotations);

}  // namespace mfemskin
