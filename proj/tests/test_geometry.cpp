#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "mfemskin/defgrad.hpp"
#include "mfemskin/errors.hpp"
#include "mfemskin/tet_mesh.hpp"
#include "test_support.hpp"

namespace mfemskin {
namespace {

namespace fs = std::filesystem;

fs::path write_temp(const std::string& name, const std::string& text) {
    const fs::path dir = fs::temp_directory_path() / "mfemskin_geometry_tests";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
}

TEST(Flattening, VecMatRoundTrip) {
    std::mt19937 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat3 m = Mat3::Random();
        EXPECT_EQ(mat(vec(m)), m);
        const Mat3 s = testing::random_symmetric(rng);
        EXPECT_EQ(mat6(vec6(s)), s);
    }
    Mat3 m;
    m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    const Vec9 v = vec(m);
    for (int i = 0; i < 9; ++i) EXPECT_EQ(v[i], i + 1) << "row-major order";
}

TEST(TetMesh, UnitTetVolume) {
    const TetMesh mesh = testing::unit_tet();
    ASSERT_EQ(mesh.num_tets(), 1);
    EXPECT_DOUBLE_EQ(mesh.volumes()[0], 1.0 / 6.0);
    EXPECT_EQ(mesh.surface_faces().size(), 4u);
}

TEST(TetMesh, NegativeOrientationIsFixed) {
    const TetMesh mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {{0, 2, 1, 3}});
    EXPECT_DOUBLE_EQ(mesh.volumes()[0], 1.0 / 6.0);
    EXPECT_NEAR(mesh_volume(mesh, mesh.rest_positions()), 1.0 / 6.0, 1e-15);
}

TEST(TetMesh, TwoTetsShareOneFace) {
    const std::vector<Vec3> verts{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
                                  Vec3(1, 1, 1)};
    const std::vector<Tet> tets{{0, 1, 2, 3}, {1, 2, 3, 4}};
    const TetMesh mesh(verts, tets);

    // Brute force: count every face over all tets, keep those seen once.
    std::map<std::array<int, 3>, int> count;
    for (const Tet& t : tets) {
        for (int skip = 0; skip < 4; ++skip) {
            std::array<int, 3> f{};
            int c = 0;
            for (int i = 0; i < 4; ++i)
                if (i != skip) f[c++] = t[i];
            std::sort(f.begin(), f.end());
            ++count[f];
        }
    }
    const auto expected = std::count_if(count.begin(), count.end(),
                                        [](const auto& kv) { return kv.second == 1; });
    EXPECT_EQ(expected, 6);
    ASSERT_EQ(mesh.surface_faces().size(), static_cast<std::size_t>(expected));
    for (const Face& f : mesh.surface_faces()) {
        std::array<int, 3> key = f;
        std::sort(key.begin(), key.end());
        EXPECT_EQ(count[key], 1);
    }
}

TEST(TetMesh, SurfaceFacesPointOutward) {
    const TetMesh mesh = make_beam_mesh({3, 2, 2, 3.0, 1.0, 1.0});
    const VecX x = mesh.rest_positions();
    // Divergence theorem: sum over faces of (centroid . n) * area = 3 V.
    double flux = 0.0;
    for (const Face& f : mesh.surface_faces()) {
        const Vec3 a = x.segment<3>(3 * f[0]), b = x.segment<3>(3 * f[1]), c = x.segment<3>(3 * f[2]);
        flux += ((a + b + c) / 3.0).dot(0.5 * (b - a).cross(c - a));
    }
    EXPECT_NEAR(flux, 3.0 * mesh.total_volume(), 1e-12);
}

TEST(TetMesh, BadIndexAndDegenerateElements) {
    EXPECT_THROW(TetMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2, 3}}), ConfigError);
    try {
        TetMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 0)},
                {{0, 1, 2, 3}, {0, 1, 2, 4}});
        FAIL() << "expected DegenerateElementError";
    } catch (const DegenerateElementError& e) {
        ASSERT_EQ(e.elements().size(), 1u);
        EXPECT_EQ(e.elements()[0], 1);
    }
}

TEST(MeditReader, LoadsUnitTet) {
    const auto p = write_temp("unit.mesh",
                              "MeshVersionFormatted 1\nDimension 3\n# comment\nVertices\n4\n"
                              "0 0 0 0\n1 0 0 0\n0 1 0 0\n0 0 1 0\n"
                              "Triangles\n1\n1 2 3 0\nTetrahedra\n1\n1 2 3 4 0\nEnd\n");
    const TetMesh mesh = load_tet_mesh(p);
    EXPECT_EQ(mesh.num_vertices(), 4);
    EXPECT_EQ(mesh.num_tets(), 1);
    EXPECT_DOUBLE_EQ(mesh.volumes()[0], 1.0 / 6.0);
}

TEST(MeditReader, ReportsLineNumbers) {
    const auto bad_number = write_temp("bad_number.mesh",
                                       "MeshVersionFormatted 1\nDimension 3\nVertices\n2\n"
                                       "0 0 0 0\n1 zero 0 0\n");
    try {
        load_tet_mesh(bad_number);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 6u);
    }
    const auto bad_index = write_temp("bad_index.mesh",
                                      "Vertices\n4\n0 0 0 0\n1 0 0 0\n0 1 0 0\n0 0 1 0\n"
                                      "Tetrahedra\n1\n1 2 3 9 0\nEnd\n");
    try {
        load_tet_mesh(bad_index);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 9u);
    }
    EXPECT_THROW(load_tet_mesh(write_temp("no_tets.mesh", "Vertices\n0\nEnd\n")), ParseError);
    EXPECT_THROW(load_tet_mesh(write_temp("junk.mesh", "Bogus 3\n")), ParseError);
    EXPECT_THROW(load_tet_mesh("/nonexistent/file.mesh"), ConfigError);
}

TEST(MeditReader, WriteReadRoundTrip) {
    const TetMesh mesh = make_beam_mesh({2, 2, 2, 2.0, 1.0, 1.0});
    const auto p = write_temp("beam.mesh", "");
    write_tet_mesh(p, mesh);
    const TetMesh back = load_tet_mesh(p);
    ASSERT_EQ(back.num_tets(), mesh.num_tets());
    EXPECT_EQ(back.tets(), mesh.tets());
    EXPECT_EQ(back.rest_positions(), mesh.rest_positions());
}

TEST(DefGrad, RestIsIdentity) {
    const TetMesh mesh = make_beam_mesh(testing::small_beam_spec());
    const DefGradOperator b(mesh);
    const VecX f = b.matrix() * mesh.rest_positions();
    ASSERT_EQ(f.size(), 9 * mesh.num_tets());
    for (int k = 0; k < mesh.num_tets(); ++k) {
        EXPECT_LT((f.segment<9>(9 * k) - vec(Mat3::Identity())).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(DefGrad, UniformScaleGivesTwoI) {
    const TetMesh mesh = testing::unit_tet();
    const DefGradOperator b(mesh);
    const VecX f = b.matrix() * (2.0 * mesh.rest_positions());
    EXPECT_LT((f - vec(2.0 * Mat3::Identity())).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DefGrad, AffineReproductionMatchesDirectDsDmInverse) {
    const TetMesh mesh = make_beam_mesh({4, 2, 2, 2.0, 1.0, 1.0});
    const DefGradOperator b(mesh);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Mat3 a = Mat3::Random() + 2.0 * Mat3::Identity();
        const Vec3 t = Vec3::Random();
        VecX x(3 * mesh.num_vertices());
        for (int v = 0; v < mesh.num_vertices(); ++v) x.segment<3>(3 * v) = a * mesh.vertices()[v] + t;
        const VecX f = b.matrix() * x;
        for (int k = 0; k < mesh.num_tets(); ++k) {
            const Tet& tet = mesh.tets()[k];
            Mat3 ds, dm;
            for (int c = 0; c < 3; ++c) {
                ds.col(c) = x.segment<3>(3 * tet[c + 1]) - x.segment<3>(3 * tet[0]);
                dm.col(c) = mesh.vertices()[tet[c + 1]] - mesh.vertices()[tet[0]];
            }
            const Vec9 direct = vec(ds * dm.inverse());
            const Vec9 got = f.segment<9>(9 * k);
            EXPECT_LT((got - direct).cwiseAbs().maxCoeff(), 1e-12 * direct.cwiseAbs().maxCoeff());
            EXPECT_LT((got - vec(a)).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff());
            EXPECT_LT((b.apply(k, x) - got).cwiseAbs().maxCoeff(), 1e-14);
        }
    }
}

TEST(MeshVolume, RestAndCubicScaling) {
    const TetMesh mesh = make_beam_mesh(testing::small_beam_spec());
    const VecX x = mesh.rest_positions();
    EXPECT_NEAR(mesh_volume(mesh, x), mesh.total_volume(), 1e-12);
    EXPECT_NEAR(mesh.total_volume(), 4.0, 1e-12);
    EXPECT_NEAR(mesh_volume(mesh, 2.0 * x), 8.0 * mesh.total_volume(), 1e-11);
    EXPECT_GT(*std::min_element(mesh.volumes().begin(), mesh.volumes().end()), 0.0);
}

TEST(SurfaceExport, ObjAndPackedBuffersAgree) {
    const TetMesh mesh = make_beam_mesh({2, 1, 1, 2.0, 1.0, 1.0});
    const auto p = write_temp("beam.obj", "");
    write_surface_obj(p, mesh, mesh.rest_positions());
    std::ifstream in(p);
    int v = 0, f = 0;
    std::string tag;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("v ", 0) == 0) ++v;
        if (line.rfind("f ", 0) == 0) ++f;
    }
    EXPECT_EQ(v, static_cast<int>(mesh.surface_vertices().size()));
    EXPECT_EQ(f, static_cast<int>(mesh.surface_faces().size()));
    const auto packed = pack_surface_positions(mesh, mesh.rest_positions());
    EXPECT_EQ(packed.size(), 3 * mesh.surface_vertices().size());
}

}  // namespace
}  // namespace mfemskin
