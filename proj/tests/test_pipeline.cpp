#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mfemskin/constraints.hpp"
#include "mfemskin/demo_beam.hpp"
#include "mfemskin/errors.hpp"
#include "mfemskin/pipeline.hpp"
#include "test_support.hpp"

namespace mfemskin {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Vec3> obj_vertices(const fs::path& p) {
    std::ifstream in(p);
    std::vector<Vec3> out;
    std::string tag;
    while (in >> tag) {
        if (tag == "v") {
            Vec3 v;
            in >> v.x() >> v.y() >> v.z();
            out.push_back(v);
        } else {
            std::string rest;
            std::getline(in, rest);
        }
    }
    return out;
}

class PipelineTest : public ::testing::Test {
protected:
    void SetUp() override {
        std::random_device rd;
        dir_ = fs::temp_directory_path() / ("mfemskin_pipeline_" + std::to_string(rd()));
        fs::create_directories(dir_);
        // Odd cross-section: no vertex lies on the bone axis.
        write_demo_beam(dir_, {6, 3, 3, 3.0, 1.0, 1.0}, 3, 90.0);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunConfig config(const std::string& out) const {
        RunConfig c;
        c.mesh_path = dir_ / "beam.mesh";
        c.rig_path = dir_ / "rig.json";
        c.material_path = dir_ / "material.json";
        c.out_dir = dir_ / out;
        return c;
    }

    fs::path dir_;
};

TEST_F(PipelineTest, WritesFramesReportAndTiming) {
    RunConfig c = config("out");
    c.validate = true;
    const PipelineResult result = run_pipeline(c);
    ASSERT_EQ(result.frames.size(), 3u);
    EXPECT_EQ(result.model, "beam");
    for (int f = 0; f < 3; ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.obj", f);
        EXPECT_TRUE(fs::exists(c.out_dir / name)) << name;
    }
    const auto report = nlohmann::json::parse(slurp(c.out_dir / "report.json"));
    EXPECT_EQ(report["tets"].get<int>(), result.num_tets);
    ASSERT_EQ(report["frames"].size(), 3u);
    for (const auto& fr : report["frames"]) {
        EXPECT_LT(fr["validation"]["rel_diff_condensed_vs_kkt"].get<double>(), 1e-8);
    }
    EXPECT_TRUE(fs::exists(c.out_dir / "timing.csv"));
}

TEST_F(PipelineTest, IdentityFrameReproducesRestSurface) {
    const RunConfig c = config("out");
    run_pipeline(c);
    const TetMesh mesh = load_tet_mesh(c.mesh_path);
    const auto verts = obj_vertices(c.out_dir / "frame_0000.obj");
    ASSERT_EQ(verts.size(), mesh.surface_vertices().size());
    for (std::size_t i = 0; i < verts.size(); ++i) {
        EXPECT_LT((verts[i] - mesh.vertices()[mesh.surface_vertices()[i]]).norm(), 1e-6);
    }
}

TEST_F(PipelineTest, RerunsAreBitIdentical) {
    run_pipeline(config("a"));
    run_pipeline(config("b"));
    for (const char* f : {"frame_0000.obj", "frame_0001.obj", "frame_0002.obj"}) {
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    }
}

TEST_F(PipelineTest, StageTimesFitInTotal) {
    const PipelineResult result = run_pipeline(config("out"));
    for (const auto& r : result.frames) {
        EXPECT_GE(r.assemble_seconds, 0.0);
        EXPECT_LE(r.assemble_seconds + r.factor_seconds + r.solve_seconds, 1.05 * r.total_seconds + 1e-4);
    }
}

TEST_F(PipelineTest, ConfigErrors) {
    RunConfig c = config("out");
    c.mesh_path = dir_ / "nope.mesh";
    EXPECT_THROW(c.check(), ConfigError);

    c = config("out");
    c.pin_stiffness = 0.0;
    EXPECT_THROW(c.check(), ConfigError);

    c = config("out");
    c.pin_radius = -1.0;
    EXPECT_THROW(c.check(), ConfigError);

    c = config("out");
    c.strategy = ClusterStrategy::User;
    EXPECT_THROW(c.check(), ConfigError);

    c = config("out");
    c.pin_radius = 1e-9;
    EXPECT_THROW(run_pipeline(c), ConfigError);
}

TEST_F(PipelineTest, UserClusteringFromFile) {
    const TetMesh mesh = load_tet_mesh(dir_ / "beam.mesh");
    nlohmann::json table = nlohmann::json::array();
    for (int k = 0; k < mesh.num_tets(); ++k) table.push_back(k % 2);
    std::ofstream(dir_ / "clusters.json") << table.dump();

    RunConfig c = config("out");
    c.strategy = ClusterStrategy::User;
    c.user_clustering_path = dir_ / "clusters.json";
    const PipelineResult result = run_pipeline(c);
    EXPECT_EQ(result.frames.size(), 3u);
    EXPECT_EQ(nlohmann::json::parse(slurp(c.out_dir / "report.json"))["clustering"], "user");
}

TEST(TimingTable, SingleRowWithMean) {
    PipelineResult r;
    r.model = "beam";
    r.num_vertices = 10;
    r.num_tets = 20;
    r.pin_stiffness = 1000;
    r.frames.resize(2);
    r.frames[0].total_seconds = 0.25;
    r.frames[1].total_seconds = 0.75;
    EXPECT_EQ(emit_timing_table(r), "model,V,T,stiffness,sec_per_frame\nbeam,10,20,1000,0.5\n");
}

TEST(ForceSpec, ConstantPlusPerFrame) {
    const ForceSpec spec = parse_force_spec(R"({
        "constant": [{"vertex": 1, "force": [0, -1, 0]}],
        "frames": [[{"vertex": 1, "force": [2, 0, 0]}], [{"vertex": 0, "force": [0, 0, 3]}]]
    })");
    const VecX f0 = spec.for_frame(0, 2);
    const VecX f1 = spec.for_frame(1, 2);
    const VecX f5 = spec.for_frame(5, 2);
    EXPECT_EQ(f0, (VecX(6) << 0, 0, 0, 2, -1, 0).finished());
    EXPECT_EQ(f1, (VecX(6) << 0, 0, 3, 0, -1, 0).finished());
    EXPECT_EQ(f5, (VecX(6) << 0, 0, 0, 0, -1, 0).finished());
    EXPECT_THROW(spec.for_frame(0, 1), ConfigError);
    EXPECT_THROW(parse_force_spec(R"({"constant": [{"vertex": 0}]})"), ConfigError);
    EXPECT_THROW(parse_force_spec("[1, 2"), ConfigError);
}

}  // namespace
}  // namespace mfemskin
