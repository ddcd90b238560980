#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mfemskin/types.hpp"

namespace mfemskin {

using Tet = std::array<int, 4>;
using Face = std::array<int, 3>;

/// Rest-pose tetrahedral mesh. Immutable once built.
///
/// Tets are stored with positive orientation, det(Dm) > 0. Surface faces are
/// the triangles owned by exactly one tet, wound so their normal points out
/// of that tet.
class TetMesh {
public:
    TetMesh() = default;

    /// Validates indices, fixes orientation, computes volumes and the
    /// boundary. Throws ConfigError on bad indices and
    /// DegenerateElementError when any |volume| < 1e-12 * mean volume.
    TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_tets() const { return static_cast<int>(tets_.size()); }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Tet>& tets() const { return tets_; }
    const std::vector<double>& volumes() const { return volumes_; }
    const std::vector<Face>& surface_faces() const { return surface_faces_; }

    /// Sorted unique vertex indices referenced by surface_faces().
    const std::vector<int>& surface_vertices() const { return surface_vertices_; }

    /// Stacked rest coordinates, length 3n.
    VecX rest_positions() const;

    Vec3 barycenter(int tet) const;
    double total_volume() const;
    double mean_surface_edge_length() const;

private:
    std::vector<Vec3> vertices_;
    std::vector<Tet> tets_;
    std::vector<double> volumes_;
    std::vector<Face> surface_faces_;
    std::vector<int> surface_vertices_;
};

/// Reads a MEDIT ASCII .mesh file (Vertices and Tetrahedra sections; other
/// sections are skipped).
TetMesh load_tet_mesh(const std::filesystem::path& path);

void write_tet_mesh(const std::filesystem::path& path, const TetMesh& mesh);

/// Sum of signed tet volumes at the given stacked positions (length 3n).
double mesh_volume(const TetMesh& mesh, const VecX& positions);

/// Writes the boundary surface as OBJ with vertex positions taken from
/// `positions` (length 3n). Only surface vertices are emitted.
void write_surface_obj(const std::filesystem::path& path, const TetMesh& mesh,
                       const VecX& positions);

/// Surface vertex positions packed as float32 triplets in
/// surface_vertices() order.
std::vector<float> pack_surface_positions(const TetMesh& mesh, const VecX& positions);

}  // namespace mfemskin
