#include "mfemskin/rotation_blocks.hpp"

#include <cmath>

#include "mfemskin/errors.hpp"

namespace mfemskin {

Mat9x6 rotation_block(const Mat3& rotation) {
    Mat9x6 block;
    for (int c = 0; c < 6; ++c) {
        Mat3 basis = Mat3::Zero();
        basis(kSymRow[c], kSymCol[c]) = 1.0;
        basis(kSymCol[c], kSymRow[c]) = 1.0;
        block.col(c) = vec(rotation * basis);
    }
    return block;
}

Mat6x9 rotation_block_pinv(const Mat3& rotation) {
    static const Vec6 kInvGram = (Vec6() << 1, 1, 1, 0.5, 0.5, 0.5).finished();
    return kInvGram.asDiagonal() * rotation_block(rotation).transpose();
}

namespace {

void check_rotation(const Mat3& r, std::size_t index) {
    const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = r.determinant();
    if (!r.allFinite() || ortho > 1e-9 || std::abs(det - 1.0) > 1e-9) {
        throw ConfigError("rotation " + std::to_string(index) + " is not orthonormal with det +1");
    }
}

}  // namespace

RotationBlocks build_rotation_blocks(const std::vector<Mat3>& element_rotations) {
    RotationBlocks out;
    out.blocks.resize(element_rotations.size());
    out.pinv.resize(element_rotations.size());
    for (std::size_t k = 0; k < element_rotations.size(); ++k) {
        check_rotation(element_rotations[k], k);
        out.blocks[k] = rotation_block(element_rotations[k]);
        out.pinv[k] = rotation_block_pinv(element_rotations[k]);
    }
    return out;
}

RotationBlocks build_rotation_blocks(const RotationClustering& clustering,
                                     const std::vector<Mat3>& bone_rotations) {
    for (std::size_t b = 0; b < bone_rotations.size(); ++b) check_rotation(bone_rotations[b], b);
    std::vector<Mat9x6> bone_blocks(bone_rotations.size());
    std::vector<Mat6x9> bone_pinv(bone_rotations.size());
    for (std::size_t b = 0; b < bone_rotations.size(); ++b) {
        bone_blocks[b] = rotation_block(bone_rotations[b]);
        bone_pinv[b] = rotation_block_pinv(bone_rotations[b]);
    }
    RotationBlocks out;
    out.blocks.reserve(clustering.assignment.size());
    out.pinv.reserve(clustering.assignment.size());
    for (int b : clustering.assignment) {
        if (b < 0 || b >= static_cast<int>(bone_rotations.size())) {
            throw ConfigError("clustering references bone " + std::to_string(b) +
                              " without a rotation");
        }
        out.blocks.push_back(bone_blocks[b]);
        out.pinv.push_back(bone_pinv[b]);
    }
    return out;
}

SparseMat RotationBlocks::matrix() const {
    std::vector<Triplet> triplets;
    triplets.reserve(blocks.size() * 54);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 6; ++j)
                if (blocks[k](i, j) != 0.0)
                    triplets.emplace_back(static_cast<int>(9 * k) + i, static_cast<int>(6 * k) + j,
                                          blocks[k](i, j));
    }
    SparseMat r(9 * num_tets(), 6 * num_tets());
    r.setFromTriplets(triplets.begin(), triplets.end());
    return r;
}

SparseMat RotationBlocks::pinv_matrix() const {
    std::vector<Triplet> triplets;
    triplets.reserve(pinv.size() * 54);
    for (std::size_t k = 0; k < pinv.size(); ++k) {
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 9; ++j)
                if (pinv[k](i, j) != 0.0)
                    triplets.emplace_back(static_cast<int>(6 * k) + i, static_cast<int>(9 * k) + j,
                                          pinv[k](i, j));
    }
    SparseMat p(6 * num_tets(), 9 * num_tets());
    p.setFromTriplets(triplets.begin(), triplets.end());
    return p;
}

}  // namespace mfemskin
