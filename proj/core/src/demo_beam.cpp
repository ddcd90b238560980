#include "mfemskin/demo_beam.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "mfemskin/errors.hpp"

namespace mfemskin {

TetMesh make_beam_mesh(const BeamSpec& spec) {
    if (spec.cells_x < 1 || spec.cells_y < 1 || spec.cells_z < 1) {
        throw ConfigError("beam needs at least one cell per axis");
    }
    const int nx = spec.cells_x + 1, ny = spec.cells_y + 1, nz = spec.cells_z + 1;
    auto index = [&](int i, int j, int k) { return (i * ny + j) * nz + k; };

    std::vector<Vec3> vertices;
    vertices.reserve(static_cast<std::size_t>(nx) * ny * nz);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k)
                vertices.emplace_back(spec.length * i / spec.cells_x,
                                      spec.width * (static_cast<double>(j) / spec.cells_y - 0.5),
                                      spec.height * (static_cast<double>(k) / spec.cells_z - 0.5));

    // Kuhn split: one tet per axis permutation, all sharing the main diagonal.
    constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<Tet> tets;
    tets.reserve(6 * static_cast<std::size_t>(spec.cells_x) * spec.cells_y * spec.cells_z);
    for (int i = 0; i < spec.cells_x; ++i) {
        for (int j = 0; j < spec.cells_y; ++j) {
            for (int k = 0; k < spec.cells_z; ++k) {
                for (const auto& perm : kPerms) {
                    int c[3] = {i, j, k};
                    Tet t{};
                    t[0] = index(c[0], c[1], c[2]);
                    for (int step = 0; step < 3; ++step) {
                        ++c[perm[step]];
                        t[step + 1] = index(c[0], c[1], c[2]);
                    }
                    tets.push_back(t);
                }
            }
        }
    }
    return TetMesh(std::move(vertices), std::move(tets));
}

Skeleton make_beam_skeleton(double length) {
    return Skeleton({{"root", std::nullopt, Vec3(0, 0, 0)},
                     {"middle", 0, Vec3(0.5 * length, 0, 0)},
                     {"tip", 1, Vec3(length, 0, 0)}});
}

std::vector<PoseFrame> make_bend_animation(int frames, double max_degrees) {
    std::vector<PoseFrame> out;
    for (int f = 0; f < frames; ++f) {
        const double t = frames > 1 ? static_cast<double>(f) / (frames - 1) : 1.0;
        const double angle = t * max_degrees * std::numbers::pi / 180.0;
        PoseFrame pose = PoseFrame::identity(3);
        pose.rotations[1] = Eigen::Quaterniond(Eigen::AngleAxisd(angle, Vec3::UnitZ()));
        out.push_back(pose);
    }
    return out;
}

void write_demo_beam(const std::filesystem::path& out_dir, const BeamSpec& spec, int frames,
                     double max_degrees) {
    std::filesystem::create_directories(out_dir);
    write_tet_mesh(out_dir / "beam.mesh", make_beam_mesh(spec));
    {
        std::ofstream rig(out_dir / "rig.json");
        if (!rig) throw ConfigError("cannot write rig.json in " + out_dir.string());
        rig << rig_to_json(make_beam_skeleton(spec.length), make_bend_animation(frames, max_degrees))
            << '\n';
    }
    std::ofstream material(out_dir / "material.json");
    if (!material) throw ConfigError("cannot write material.json in " + out_dir.string());
    material << R"({ "model": "arap", "mu": 1000.0, "lambda": 0.0 })" << '\n';
}

}  // namespace mfemskin
