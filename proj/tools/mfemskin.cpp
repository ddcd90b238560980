// mfemskin: batch skinning, pose service and demo scene generation.
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <csignal>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "mfemskin/demo_beam.hpp"
#include "mfemskin/errors.hpp"
#include "mfemskin/pipeline.hpp"
#include "mfemskin/pose_service.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

mfemskin::PoseServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

struct SceneArgs {
    std::string mesh;
    std::string rig;
    std::string material;
    std::string clusters;
    std::string clustering = "bone";
    double pin_radius = 0.0;
    double ks = 1000.0;
};

void add_scene_options(CLI::App* cmd, SceneArgs& args, bool required) {
    auto* mesh = cmd->add_option("--mesh", args.mesh, "MEDIT .mesh tetrahedral mesh");
    auto* rig = cmd->add_option("--rig", args.rig, "skeleton + animation JSON");
    if (required) {
        mesh->required();
        rig->required();
    }
    cmd->add_option("--material", args.material, "material config JSON");
    cmd->add_option("--clustering", args.clustering, "rotation clustering: bone|joint|hierarchy|user")
        ->check(CLI::IsMember({"bone", "joint", "hierarchy", "user"}));
    cmd->add_option("--clusters", args.clusters, "per-tet bone table for --clustering user");
    cmd->add_option("--pin-radius", args.pin_radius,
                    "pin radius (default 1.5x mean surface edge length)");
    cmd->add_option("--ks", args.ks, "pin stiffness k_s")->capture_default_str();
}

mfemskin::SceneOptions scene_options(const SceneArgs& args) {
    mfemskin::SceneOptions options;
    options.strategy = mfemskin::parse_cluster_strategy(args.clustering);
    if (args.pin_radius > 0.0) options.pin_radius = args.pin_radius;
    options.pin_stiffness = args.ks;
    return options;
}

int run(const SceneArgs& args, const std::string& forces, const std::string& out, bool validate) {
    mfemskin::RunConfig config;
    config.mesh_path = args.mesh;
    config.rig_path = args.rig;
    if (!args.material.empty()) config.material_path = args.material;
    if (!forces.empty()) config.forces_path = forces;
    if (!args.clusters.empty()) config.user_clustering_path = args.clusters;
    config.strategy = mfemskin::parse_cluster_strategy(args.clustering);
    if (args.pin_radius > 0.0) config.pin_radius = args.pin_radius;
    config.pin_stiffness = args.ks;
    config.out_dir = out;
    config.validate = validate;

    const auto result = mfemskin::run_pipeline(config);
    for (const auto& r : result.frames) {
        std::cout << "frame " << r.frame << ": " << r.total_seconds << " s (assemble "
                  << r.assemble_seconds << ", factor " << r.factor_seconds << ", solve "
                  << r.solve_seconds << "), volume change " << r.volume_change_percent
                  << "%, pin residual " << r.max_pin_residual;
        if (r.validation) {
            std::cout << ", kkt diff " << r.validation->rel_diff_condensed_vs_kkt
                      << ", stationarity " << r.validation->stationarity_residual;
        }
        std::cout << '\n';
    }
    std::cout << mfemskin::emit_timing_table(result);
    return 0;
}

int serve(const SceneArgs& args, const std::string& host, int port) {
    std::unique_ptr<mfemskin::Scene> scene;
    if (args.mesh.empty()) {
        mfemskin::BeamSpec spec;
        scene = std::make_unique<mfemskin::Scene>(mfemskin::make_beam_mesh(spec),
                                                  mfemskin::make_beam_skeleton(spec.length),
                                                  mfemskin::MaterialParams{}, scene_options(args));
    } else {
        if (args.rig.empty()) throw mfemskin::ConfigError("--rig is required with --mesh");
        auto options = scene_options(args);
        const auto material = args.material.empty()
                                  ? mfemskin::MaterialParams{}
                                  : mfemskin::load_material_params(args.material);
        scene = std::make_unique<mfemskin::Scene>(mfemskin::load_tet_mesh(args.mesh),
                                                  mfemskin::load_rig(args.rig).skeleton, material,
                                                  options);
    }
    mfemskin::SceneSession session(std::move(scene));
    mfemskin::PoseServer server(session);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cout << "serving on http://" << host << ':' << port << " (GET /scene, POST /pose)\n";
    const bool ok = server.listen(host, port);
    g_server = nullptr;
    if (!ok) throw mfemskin::ConfigError("cannot bind " + host + ":" + std::to_string(port));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed finite element character skinning"};
    app.require_subcommand(1);

    SceneArgs run_args;
    std::string forces, out = "out";
    bool validate = false;
    auto* run_cmd = app.add_subcommand("run", "solve every frame of an animation");
    add_scene_options(run_cmd, run_args, true);
    run_cmd->add_option("--forces", forces, "external force JSON");
    run_cmd->add_option("--out", out, "output directory")->capture_default_str();
    run_cmd->add_flag("--validate", validate, "cross-check each frame against the full KKT solve");

    SceneArgs serve_args;
    std::string host = "127.0.0.1";
    int port = 8080;
    auto* serve_cmd =
        app.add_subcommand("serve", "serve a scene over HTTP (demo beam when no --mesh)");
    add_scene_options(serve_cmd, serve_args, false);
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--port", port)->capture_default_str();

    std::string demo_out = "demo";
    mfemskin::BeamSpec spec;
    int frames = 10;
    double degrees = 100.0;
    auto* demo_cmd = app.add_subcommand("demo-beam", "write a procedural 3-joint beam scene");
    demo_cmd->add_option("--out", demo_out)->capture_default_str();
    demo_cmd->add_option("--cells-x", spec.cells_x)->capture_default_str();
    demo_cmd->add_option("--cells-y", spec.cells_y)->capture_default_str();
    demo_cmd->add_option("--cells-z", spec.cells_z)->capture_default_str();
    demo_cmd->add_option("--length", spec.length)->capture_default_str();
    demo_cmd->add_option("--frames", frames)->capture_default_str();
    demo_cmd->add_option("--degrees", degrees, "final bend angle of the middle joint")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run_cmd) return run(run_args, forces, out, validate);
        if (*serve_cmd) return serve(serve_args, host, port);
        if (*demo_cmd) {
            mfemskin::write_demo_beam(demo_out, spec, frames, degrees);
            std::cout << "wrote " << demo_out << "/beam.mesh, rig.json, material.json\n";
            return 0;
        }
    } catch (const mfemskin::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const mfemskin::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
