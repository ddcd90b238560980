#include "mfemskin/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mfemskin/errors.hpp"

namespace mfemskin {

using json = nlohmann::json;

void RunConfig::check() const {
    auto must_exist = [](const std::filesystem::path& p, const char* what) {
        if (!std::filesystem::exists(p)) {
            throw ConfigError(std::string(what) + " not found: " + p.string());
        }
    };
    must_exist(mesh_path, "mesh");
    must_exist(rig_path, "rig");
    if (material_path) must_exist(*material_path, "material config");
    if (forces_path) must_exist(*forces_path, "forces file");
    if (strategy == ClusterStrategy::User) {
        if (!user_clustering_path) {
            throw ConfigError("--clustering user requires a clustering table (--clusters FILE)");
        }
        must_exist(*user_clustering_path, "clustering table");
    }
    if (!(pin_stiffness > 0.0)) throw ConfigError("k_s must be positive");
    if (pin_radius && !(*pin_radius > 0.0)) throw ConfigError("pin radius must be positive");
}

namespace {

json report_to_json(const FrameReport& r) {
    json j;
    j["frame"] = r.frame;
    j["assemble_seconds"] = r.assemble_seconds;
    j["factor_seconds"] = r.factor_seconds;
    j["solve_seconds"] = r.solve_seconds;
    j["total_seconds"] = r.total_seconds;
    j["volume"] = r.volume;
    j["volume_change_percent"] = r.volume_change_percent;
    j["max_pin_residual"] = r.max_pin_residual;
    if (r.validation) {
        auto nan_safe = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        j["validation"] = {
            {"frame", r.frame},
            {"rel_diff_condensed_vs_kkt", nan_safe(r.validation->rel_diff_condensed_vs_kkt)},
            {"stationarity_residual", nan_safe(r.validation->stationarity_residual)},
            {"constraint_residual", nan_safe(r.validation->constraint_residual)}};
    }
    return j;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string frame_file(int frame) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%04d.obj", frame);
    return buf;
}

}  // namespace

std::string frame_report_json(const FrameReport& report) { return report_to_json(report).dump(); }

PipelineResult run_pipeline(const RunConfig& config) {
    config.check();
    TetMesh mesh = load_tet_mesh(config.mesh_path);
    RigAnimation rig = load_rig(config.rig_path);
    const MaterialParams material =
        config.material_path ? load_material_params(*config.material_path) : MaterialParams{};
    const ForceSpec forces = config.forces_path ? load_force_spec(*config.forces_path) : ForceSpec{};

    SceneOptions options;
    options.strategy = config.strategy;
    options.pin_radius = config.pin_radius;
    options.pin_stiffness = config.pin_stiffness;
    if (config.user_clustering_path) {
        options.user_clustering = load_user_clustering(read_text(*config.user_clustering_path));
    }

    PipelineResult result;
    result.model = config.mesh_path.stem().string();
    result.num_vertices = mesh.num_vertices();
    result.num_tets = mesh.num_tets();
    result.pin_stiffness = config.pin_stiffness;

    Scene scene(std::move(mesh), std::move(rig.skeleton), material, options);
    if (rig.frames.empty()) rig.frames.push_back(PoseFrame::identity(scene.skeleton().num_joints()));

    std::filesystem::create_directories(config.out_dir);
    json manifest;
    manifest["model"] = result.model;
    manifest["vertices"] = result.num_vertices;
    manifest["tets"] = result.num_tets;
    manifest["pin_stiffness"] = result.pin_stiffness;
    manifest["pins"] = scene.pins().size();
    manifest["clustering"] = std::string(to_string(scene.clustering().strategy));
    manifest["warnings"] = scene.pins().warnings;
    manifest["frames"] = json::array();

    const int n = scene.mesh().num_vertices();
    for (int f = 0; f < static_cast<int>(rig.frames.size()); ++f) {
        FrameSolution solution;
        try {
            solution = scene.solve(rig.frames[f], forces.for_frame(f, n), config.validate, f);
        } catch (const NumericalError& e) {
            throw NumericalError("frame " + std::to_string(f) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("frame " + std::to_string(f) + ": " + e.what());
        }
        const std::string obj = frame_file(f);
        write_surface_obj(config.out_dir / obj, scene.mesh(), solution.positions);
        json entry = report_to_json(solution.report);
        entry["obj"] = obj;
        manifest["frames"].push_back(entry);
        result.frames.push_back(solution.report);
    }

    std::ofstream(config.out_dir / "report.json") << manifest.dump(2) << '\n';
    std::ofstream(config.out_dir / "timing.csv") << emit_timing_table(result);
    return result;
}

std::string emit_timing_table(const PipelineResult& result) {
    double mean = 0.0;
    for (const auto& r : result.frames) mean += r.total_seconds;
    if (!result.frames.empty()) mean /= static_cast<double>(result.frames.size());
    std::ostringstream os;
    os << "model,V,T,stiffness,sec_per_frame\n";
    os << result.model << ',' << result.num_vertices << ',' << result.num_tets << ','
       << result.pin_stiffness << ',' << mean << '\n';
    return os.str();
}

}  // namespace mfemskin
