#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfemskin/scene.hpp"

namespace mfemskin {

struct RunConfig {
    std::filesystem::path mesh_path;
    std::filesystem::path rig_path;
    std::optional<std::filesystem::path> material_path;
    std::optional<std::filesystem::path> forces_path;
    std::optional<std::filesystem::path> user_clustering_path;
    ClusterStrategy strategy = ClusterStrategy::ClosestBone;
    std::optional<double> pin_radius;
    double pin_stiffness = 1000.0;
    std::filesystem::path out_dir = "out";
    bool validate = false;

    /// Throws ConfigError for missing files or k_s <= 0.
    void check() const;
};

struct PipelineResult {
    std::string model;
    int num_vertices = 0;
    int num_tets = 0;
    double pin_stiffness = 0.0;
    std::vector<FrameReport> frames;
};

/// Loads inputs, solves every animation frame in order and writes
/// frame_NNNN.obj, report.json and timing.csv into the output directory.
/// Errors from a frame are rethrown with the frame index.
PipelineResult run_pipeline(const RunConfig& config);

/// Columns: model, V, T, k_s, sec/frame (mean).
std::string emit_timing_table(const PipelineResult& result);

std::string frame_report_json(const FrameReport& report);

}  // namespace mfemskin
