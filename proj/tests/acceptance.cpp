// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mfemskin/condensed_solver.hpp"
#include "mfemskin/demo_beam.hpp"
#include "mfemskin/kkt_oracle.hpp"
#include "mfemskin/pipeline.hpp"
#include "mfemskin/rotation_blocks.hpp"
#include "mfemskin/scene.hpp"
#include "test_support.hpp"

using namespace mfemskin;

namespace {

using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kOracleTol = 1e-8;
constexpr double kOracleSeconds = 30.0;
constexpr double kStationarityTol = 1e-6;  // relative to max |b|
constexpr double kRestTol = 1e-6;
constexpr double kRigidTol = 1e-6;
constexpr double kBlockTol = 1e-12;
constexpr double kGradientTol = 1e-5;
constexpr double kHessianTol = 1e-4;
constexpr double kPinResidualFraction = 0.1;  // of the shortest bone
constexpr double kVolumeChangePercent = 50.0;
constexpr double kSuperpositionTol = 1e-8;
constexpr double kSecondsPerFrame = 1.7;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double max_abs(const VecX& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

const MaterialParams kArap{MaterialKind::Arap, 1e3, 0.0, {}};
const MaterialParams kCorot{MaterialKind::Corotational, 1e3, 1e3, {}};

Scene beam_scene(const BeamSpec& spec, const MaterialParams& material) {
    return Scene(make_beam_mesh(spec), make_beam_skeleton(spec.length), material);
}

// Worst stationarity ratio seen by any solve in this run.
double g_worst_stationarity = 0.0;
int g_stationarity_solves = 0;

void record_stationarity(double ratio) {
    g_worst_stationarity = std::max(g_worst_stationarity, ratio);
    ++g_stationarity_solves;
}

// Ratio of the Lagrangian gradient to max |b|, b being the saddle-point right-hand side.
double stationarity_ratio(const DefGradOperator& defgrad, const RotationBlocks& rot, const GlobalHsGs& hs,
                          const ConstraintSystem& cons, const VecX& x) {
    const MixedState state = recover_multipliers_and_strain(defgrad, x, rot, hs);
    const double b = max_abs(build_kkt(defgrad, rot, hs, cons).rhs);
    return stationarity_residual(defgrad, rot, hs, cons, state.strain, x, state.multipliers).max() /
           std::max(b, 1e-300);
}

// Solve and record stationarity without the (slow) full oracle solve.
FrameSolution checked_solve(Scene& scene, const PoseFrame& pose, const VecX& force = {}) {
    FrameSolution sol = scene.solve(pose, force);
    record_stationarity(stationarity_ratio(scene.defgrad(), scene.rotations_for(pose),
                                           scene.material_derivatives(), scene.constraints_for(pose, force),
                                           sol.positions));
    return sol;
}

// A lone tet, three pins, a random element rotation and random pin targets.
double single_tet_oracle_diff(const MaterialParams& material, std::mt19937& rng) {
    const TetMesh mesh = testing::unit_tet();
    const DefGradOperator defgrad(mesh);
    const auto models = resolve_materials(material, 1);
    GlobalHsGs hs = assemble_rest_hs_gs(models, mesh.volumes());
    PinSet pins;
    pins.stiffness = 1e3;
    for (int v : {0, 1, 2}) {
        pins.vertices.push_back(v);
        pins.bones.push_back(0);
        pins.rest.push_back(mesh.vertices()[v]);
    }
    const Mat3 pin_rotation = testing::random_rotation(rng);
    const Vec3 shift = Vec3::Random();
    VecX targets(9);
    for (int i = 0; i < 3; ++i) targets.segment<3>(3 * i) = pin_rotation * pins.rest[i] + shift;
    const ConstraintSystem cons(pins, targets, 4, {});
    const RotationBlocks rot = build_rotation_blocks(std::vector<Mat3>{testing::random_rotation(rng)});

    VecX x = mesh.rest_positions();
    double diff = 0.0;
    // Two passes so the corotational model is also checked away from rest.
    for (int pass = 0; pass < 2; ++pass) {
        if (pass == 1) {
            hs = assemble_global_hs_gs(models, mesh.volumes(),
                                       recover_multipliers_and_strain(defgrad, x, rot, hs).strain);
        }
        const CondensedSystem sys = assemble_condensed(defgrad, mesh.rest_positions(), rot, hs, cons);
        SpdFactorization fact;
        x = solve_frame(sys, fact);
        const MixedSolution oracle = solve_full_kkt(build_kkt(defgrad, rot, hs, cons), rot);
        diff = std::max(diff, max_abs(x - oracle.x) / max_abs(oracle.x));

        record_stationarity(stationarity_ratio(defgrad, rot, hs, cons, x));
    }
    return diff;
}

Outcome oracle_equivalence() {
    const auto start = Clock::now();
    std::mt19937 rng(2024);
    const BeamSpec spec = testing::small_beam_spec();
    double worst = 0.0;
    int solves = 0;
    for (const MaterialParams& material : {kArap, kCorot}) {
        Scene scene = beam_scene(spec, material);
        for (int i = 0; i < 20; ++i) {
            const FrameSolution sol = scene.solve(testing::random_pose(rng, 3, std::numbers::pi / 2), {}, true);
            record_stationarity(sol.report.validation->stationarity_residual);
            worst = std::max(worst, sol.report.validation->rel_diff_condensed_vs_kkt);
            worst = std::max(worst, single_tet_oracle_diff(material, rng));
            solves += 2;
        }
    }
    const double elapsed = seconds_since(start);
    return {worst < kOracleTol && elapsed < kOracleSeconds,
            fmt("%d solves (beam %d tets + single tet), max rel inf diff %.3e (< %.0e), %.2f s (< %.0f s)",
                solves, make_beam_mesh(spec).num_tets(), worst, kOracleTol, elapsed, kOracleSeconds)};
}

Outcome stationarity() {
    return {g_stationarity_solves > 0 && g_worst_stationarity < kStationarityTol,
            fmt("%d solves, max residual/|b| %.3e (< %.0e)", g_stationarity_solves,
                g_worst_stationarity, kStationarityTol)};
}

Outcome rest_preservation() {
    const auto dir = std::filesystem::temp_directory_path() / "mfemskin_acceptance_asset";
    write_demo_beam(dir, BeamSpec{}, 1, 0.0);
    const TetMesh loaded = load_tet_mesh(dir / "beam.mesh");
    const Skeleton loaded_skeleton = load_rig(dir / "rig.json").skeleton;
    std::filesystem::remove_all(dir);

    double worst = 0.0;
    int cases = 0;
    for (const MaterialParams& material : {kArap, kCorot}) {
        std::vector<std::unique_ptr<Scene>> scenes;
        for (const BeamSpec& spec : {BeamSpec{}, testing::small_beam_spec()}) {
            scenes.push_back(std::make_unique<Scene>(make_beam_mesh(spec), make_beam_skeleton(spec.length),
                                                     material));
        }
        scenes.push_back(std::make_unique<Scene>(loaded, loaded_skeleton, material));
        for (auto& owned : scenes) {
            Scene& scene = *owned;
            const FrameSolution sol =
                checked_solve(scene, PoseFrame::identity(scene.skeleton().num_joints()));
            worst = std::max(worst, max_abs(sol.positions - scene.rest_positions()));
            ++cases;
        }
    }
    return {worst < kRestTol,
            fmt("%d scenes, max displacement %.3e (< %.0e)", cases, worst, kRestTol)};
}

Outcome rigid_invariance() {
    std::mt19937 rng(7);
    Scene scene = beam_scene(BeamSpec{}, kArap);
    const Vec3 root = scene.skeleton().joints()[0].rest;
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        PoseFrame pose = PoseFrame::identity(3);
        pose.rotations[0] = Eigen::Quaterniond(testing::random_rotation(rng));
        pose.root_translation = Vec3::Random();
        const FrameSolution sol = checked_solve(scene, pose);
        const Mat3 r = pose.rotations[0].toRotationMatrix();
        for (int v = 0; v < scene.mesh().num_vertices(); ++v) {
            const Vec3 expected = r * (scene.mesh().vertices()[v] - root) + root + pose.root_translation;
            worst = std::max(worst, (sol.positions.segment<3>(3 * v) - expected).cwiseAbs().maxCoeff());
        }
    }
    return {worst < kRigidTol, fmt("5 rigid poses, ARAP, max inf error %.3e (< %.0e)", worst, kRigidTol)};
}

Outcome rotation_block_algebra() {
    std::mt19937 rng(5);
    double pinv_err = 0.0;
    double product_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Mat3 r = testing::random_rotation(rng);
        const Mat3 s = testing::random_symmetric(rng);
        pinv_err = std::max(
            pinv_err, (rotation_block_pinv(r) * rotation_block(r) - Mat6::Identity()).cwiseAbs().maxCoeff());
        product_err =
            std::max(product_err, (rotation_block(r) * vec6(s) - vec(r * s)).cwiseAbs().maxCoeff());
    }
    return {pinv_err < kBlockTol && product_err < kBlockTol,
            fmt("1000 rotations, |R+R - I| %.3e, |[R]s - vec(RS)| %.3e (< %.0e)", pinv_err, product_err,
                kBlockTol)};
}

Outcome material_derivatives() {
    std::mt19937 rng(11);
    const ArapMaterial arap(1e3);
    const CorotationalMaterial corot(1e3, 1e3);
    double g_err = 0.0;
    double h_err = 0.0;
    for (const MaterialModel* m : {static_cast<const MaterialModel*>(&arap),
                                   static_cast<const MaterialModel*>(&corot)}) {
        for (int i = 0; i < 100; ++i) {
            const Vec6 s = testing::random_state(rng);
            g_err = std::max(g_err, testing::rel_err(m->gradient(s), testing::fd_gradient(*m, s)));
            h_err = std::max(h_err, testing::rel_err(m->hessian(s), testing::fd_hessian(*m, s)));
        }
    }
    return {g_err < kGradientTol && h_err < kHessianTol,
            fmt("2 models x 100 states, gradient rel err %.3e (< %.0e), hessian rel err %.3e (< %.0e)",
                g_err, kGradientTol, h_err, kHessianTol)};
}

Outcome beam_bend() {
    bool ok = true;
    std::string detail;
    for (const MaterialParams& material : {kArap, kCorot}) {
        for (double degrees : {90.0, 120.0}) {
            Scene scene = beam_scene(BeamSpec{}, material);
            double shortest = std::numeric_limits<double>::infinity();
            for (const Bone& b : scene.skeleton().bones()) shortest = std::min(shortest, b.length());
            const double bound = kPinResidualFraction * shortest;
            FrameSolution sol;
            // Step into the pose so corotational runs re-linearize along the way.
            for (const PoseFrame& pose : make_bend_animation(4, degrees)) sol = checked_solve(scene, pose);
            const FrameReport& r = sol.report;
            const bool pass = sol.positions.allFinite() && r.max_pin_residual < bound &&
                              std::abs(r.volume_change_percent) < kVolumeChangePercent;
            ok = ok && pass;
            detail += fmt("%s%s %.0f deg: pin residual %.4f (< %.3f), volume change %+.2f%%",
                          detail.empty() ? "" : "; ", material.kind == MaterialKind::Arap ? "arap" : "corot",
                          degrees, r.max_pin_residual, bound, r.volume_change_percent);
        }
    }
    return {ok, detail};
}

double mean_strain_deviation(const VecX& strain, const std::vector<int>& elements) {
    double sum = 0.0;
    for (int k : elements) sum += (strain.segment<6>(6 * k) - identity6()).norm();
    return sum / static_cast<double>(elements.size());
}

Outcome heterogeneous_ordering() {
    const BeamSpec spec{};
    const TetMesh mesh = make_beam_mesh(spec);
    std::vector<int> stiff, soft;
    for (int k = 0; k < mesh.num_tets(); ++k) {
        (mesh.barycenter(k).x() < 0.5 * spec.length ? stiff : soft).push_back(k);
    }
    MaterialParams material = kArap;
    material.overrides.push_back({stiff, 1e6, 0.0});
    Scene scene(mesh, make_beam_skeleton(spec.length), material);
    const PoseFrame bend = make_bend_animation(1, 90.0)[0];
    const FrameSolution sol = checked_solve(scene, bend);
    const VecX strain = recover_multipliers_and_strain(scene.defgrad(), sol.positions, scene.rotations_for(bend),
                                                       scene.material_derivatives())
                            .strain;
    const double d_stiff = mean_strain_deviation(strain, stiff);
    const double d_soft = mean_strain_deviation(strain, soft);
    return {d_stiff < d_soft, fmt("90 deg bend, mu 1e6 vs 1e3: mean |s - I| stiff %.3e < soft %.3e", d_stiff,
                                  d_soft)};
}

Outcome force_superposition() {
    Scene scene = beam_scene(BeamSpec{}, kArap);
    const PoseFrame pose = make_bend_animation(1, 60.0)[0];
    const int n = scene.mesh().num_vertices();
    // Nine loaded vertices per load case.
    VecX f1 = VecX::Zero(3 * n), f2 = VecX::Zero(3 * n);
    for (int i = 0; i < 9; ++i) {
        f1.segment<3>(3 * (n - 1 - i)) = Vec3(0.0, -50.0, 10.0);
        f2.segment<3>(3 * (n / 2 + i)) = Vec3(20.0, 0.0, -30.0);
    }
    const VecX base = checked_solve(scene, pose).positions;
    const VecX x1 = checked_solve(scene, pose, f1).positions;
    const VecX x2 = checked_solve(scene, pose, f2).positions;
    const VecX x12 = checked_solve(scene, pose, f1 + f2).positions;
    const double err = max_abs(x12 - (x1 + x2 - base));
    return {err < kSuperpositionTol,
            fmt("2 nine-vertex loads, response %.3e, superposition error %.3e (< %.0e)", max_abs(x1 - base), err,
                kSuperpositionTol)};
}

Outcome performance() {
    const BeamSpec spec{30, 8, 8, 8.0, 2.0, 2.0};
    Scene scene = beam_scene(spec, kArap);
    PipelineResult result;
    result.model = "beam_30x8x8";
    result.num_vertices = scene.mesh().num_vertices();
    result.num_tets = scene.mesh().num_tets();
    result.pin_stiffness = scene.pins().stiffness;
    int f = 0;
    for (const PoseFrame& pose : make_bend_animation(5, 90.0)) {
        result.frames.push_back(scene.solve(pose, {}, false, f++).report);
    }
    double mean = 0.0;
    for (const auto& r : result.frames) mean += r.total_seconds;
    mean /= static_cast<double>(result.frames.size());
    std::printf("%s", emit_timing_table(result).c_str());
    return {mean <= kSecondsPerFrame,
            fmt("%d tets, %d frames, %.4f s/frame (<= %.1f)", result.num_tets,
                static_cast<int>(result.frames.size()), mean, kSecondsPerFrame)};
}

}  // namespace

int main() {
    // Stationarity is collected from every other solve, so it runs last.
    const std::vector<std::pair<int, std::pair<const char*, std::function<Outcome()>>>> criteria = {
        {1, {"oracle equivalence", oracle_equivalence}},
        {3, {"rest preservation", rest_preservation}},
        {4, {"rigid invariance", rigid_invariance}},
        {5, {"rotation-block algebra", rotation_block_algebra}},
        {6, {"material derivatives", material_derivatives}},
        {7, {"beam bend", beam_bend}},
        {8, {"heterogeneous ordering", heterogeneous_ordering}},
        {9, {"force superposition", force_superposition}},
        {10, {"performance", performance}},
        {2, {"stationarity", stationarity}},
    };
    int failures = 0;
    for (const auto& [id, entry] : criteria) {
        Outcome outcome{false, ""};
        try {
            outcome = entry.second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failures += !outcome.pass;
        std::printf("[%s] %2d %s: %s\n", outcome.pass ? "PASS" : "FAIL", id, entry.first,
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
