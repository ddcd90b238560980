#pragma once

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mfemskin/scene.hpp"

namespace mfemskin {

struct PoseRequest {
    std::uint64_t seq = 0;
    PoseFrame pose;
};

/// {seq, root_translation, rotations[[w,x,y,z]...]}. Throws ConfigError.
PoseRequest parse_pose_request(const std::string& json_text);

/// seq (u64 LE), count (u32 LE), count x 3 float32 LE.
std::string encode_positions(std::uint64_t seq, const std::vector<float>& xyz);

struct DecodedPositions {
    std::uint64_t seq;
    std::vector<float> xyz;
};
DecodedPositions decode_positions(const std::string& bytes);

struct PoseResult {
    std::uint64_t seq = 0;
    bool ok = false;
    bool superseded = false;
    std::vector<float> positions;  // surface vertices, float32 xyz
    FrameReport report;
    std::string error;
};

/// One loaded scene, one solver worker, and a single-slot pose mailbox.
///
/// A pose that is still waiting in the mailbox when a newer one arrives is
/// answered as superseded without being solved. A failed solve is returned as
/// an error and the session keeps running.
class SceneSession {
public:
    SceneSession();
    explicit SceneSession(std::unique_ptr<Scene> scene);
    ~SceneSession();

    SceneSession(const SceneSession&) = delete;
    SceneSession& operator=(const SceneSession&) = delete;

    bool has_scene() const { return scene_ != nullptr; }

    /// Throws ConfigError("no scene") for an empty session.
    std::string scene_json() const;

    /// Blocks until the pose is solved or superseded.
    PoseResult post_pose(const PoseRequest& request);

    std::uint64_t solves_completed() const;

private:
    struct Slot;
    void worker_loop();

    std::unique_ptr<Scene> scene_;
    std::string scene_json_;

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::shared_ptr<Slot> pending_;
    bool stopping_ = false;
    std::uint64_t completed_ = 0;
    std::thread worker_;
};

/// HTTP front end: GET /scene (JSON) and POST /pose (JSON in, binary
/// positions out; JSON {seq, message} on error).
class PoseServer {
public:
    explicit PoseServer(SceneSession& session);
    ~PoseServer();

    /// Binds and serves until stop(). Returns false when binding fails.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it, or -1. Serve with
    /// listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();
    bool is_running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mfemskin
