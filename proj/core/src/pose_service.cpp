#include "mfemskin/pose_service.hpp"

#include <bit>
#include <cmath>

#include <httplib.h>
#include <json.hpp>

#include "mfemskin/errors.hpp"
#include "mfemskin/pipeline.hpp"

namespace mfemskin {

using json = nlohmann::json;

PoseRequest parse_pose_request(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("pose JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("pose JSON must be an object");
    PoseRequest req;
    try {
        req.seq = doc.at("seq").get<std::uint64_t>();
        if (doc.contains("root_translation")) {
            const auto& t = doc["root_translation"];
            if (!t.is_array() || t.size() != 3) throw ConfigError("root_translation must be [x,y,z]");
            req.pose.root_translation = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
        }
        for (const auto& q : doc.at("rotations")) {
            if (!q.is_array() || q.size() != 4) throw ConfigError("rotations must be [w,x,y,z] arrays");
            Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                                    q[3].get<double>());
            const double norm = quat.norm();
            if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6) {
                throw ConfigError("rotation " + std::to_string(req.pose.rotations.size()) +
                                  " is not a unit quaternion");
            }
            req.pose.rotations.push_back(quat.normalized());
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("pose JSON: ") + e.what());
    }
    return req;
}

std::string encode_positions(std::uint64_t seq, const std::vector<float>& xyz) {
    const auto count = static_cast<std::uint32_t>(xyz.size() / 3);
    std::string out;
    out.reserve(12 + 4 * xyz.size());
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((seq >> (8 * b)) & 0xff));
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((count >> (8 * b)) & 0xff));
    for (float f : xyz) {
        const auto bits = std::bit_cast<std::uint32_t>(f);
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
    return out;
}

DecodedPositions decode_positions(const std::string& bytes) {
    auto byte = [&](std::size_t i) { return static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i])); };
    if (bytes.size() < 12) throw ConfigError("position frame shorter than its header");
    DecodedPositions out{0, {}};
    for (int b = 0; b < 8; ++b) out.seq |= byte(b) << (8 * b);
    std::uint32_t count = 0;
    for (int b = 0; b < 4; ++b) count |= static_cast<std::uint32_t>(byte(8 + b)) << (8 * b);
    if (bytes.size() != 12 + 12 * static_cast<std::size_t>(count)) {
        throw ConfigError("position frame size does not match its count");
    }
    out.xyz.resize(3 * static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < out.xyz.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(byte(12 + 4 * i + b)) << (8 * b);
        out.xyz[i] = std::bit_cast<float>(bits);
    }
    return out;
}

struct SceneSession::Slot {
    PoseRequest request;
    PoseResult result;
    bool done = false;
};

namespace {

std::string build_scene_json(const Scene& scene) {
    const TetMesh& mesh = scene.mesh();
    json doc;
    doc["vertex_count"] = mesh.num_vertices();
    doc["tet_count"] = mesh.num_tets();
    doc["surface_vertices"] = mesh.surface_vertices();
    std::vector<int> local(mesh.num_vertices(), -1);
    json rest = json::array();
    for (std::size_t i = 0; i < mesh.surface_vertices().size(); ++i) {
        const int v = mesh.surface_vertices()[i];
        local[v] = static_cast<int>(i);
        for (int c = 0; c < 3; ++c) rest.push_back(mesh.vertices()[v][c]);
    }
    doc["rest_positions"] = std::move(rest);
    json faces = json::array();
    for (const Face& f : mesh.surface_faces()) faces.push_back({local[f[0]], local[f[1]], local[f[2]]});
    doc["faces"] = std::move(faces);
    doc["skeleton"] = json::parse(rig_to_json(scene.skeleton(), {}))["joints"];
    json bones = json::array();
    for (const Bone& b : scene.skeleton().bones()) bones.push_back({b.parent_joint, b.child_joint});
    doc["bones"] = std::move(bones);
    doc["clustering"] = {
        {"strategy", std::string(to_string(scene.clustering().strategy))},
        {"tets_per_bone", scene.clustering().histogram(scene.skeleton().num_bones())}};
    doc["pin_count"] = scene.pins().size();
    return doc.dump();
}

}  // namespace

SceneSession::SceneSession() = default;

SceneSession::SceneSession(std::unique_ptr<Scene> scene) : scene_(std::move(scene)) {
    if (scene_) {
        scene_json_ = build_scene_json(*scene_);
        worker_ = std::thread([this] { worker_loop(); });
    }
}

SceneSession::~SceneSession() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
        if (pending_) {
            pending_->result = {pending_->request.seq, false, false, {}, {}, "session stopped"};
            pending_->done = true;
            pending_.reset();
        }
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
}

std::string SceneSession::scene_json() const {
    if (!scene_) throw ConfigError("no scene");
    return scene_json_;
}

std::uint64_t SceneSession::solves_completed() const {
    std::lock_guard lock(mutex_);
    return completed_;
}

PoseResult SceneSession::post_pose(const PoseRequest& request) {
    if (!scene_) return {request.seq, false, false, {}, {}, "no scene"};
    auto slot = std::make_shared<Slot>();
    slot->request = request;
    std::unique_lock lock(mutex_);
    if (stopping_) return {request.seq, false, false, {}, {}, "session stopped"};
    if (pending_) {
        pending_->result.seq = pending_->request.seq;
        pending_->result.superseded = true;
        pending_->result.error = "superseded by a newer pose";
        pending_->done = true;
    }
    pending_ = slot;
    cv_.notify_all();
    cv_.wait(lock, [&] { return slot->done; });
    return slot->result;
}

void SceneSession::worker_loop() {
    std::unique_lock lock(mutex_);
    while (true) {
        cv_.wait(lock, [&] { return stopping_ || pending_; });
        if (stopping_) return;
        auto slot = std::move(pending_);
        pending_.reset();
        lock.unlock();

        PoseResult result;
        result.seq = slot->request.seq;
        try {
            FrameSolution solution = scene_->solve(slot->request.pose);
            result.positions = pack_surface_positions(scene_->mesh(), solution.positions);
            result.report = solution.report;
            result.ok = true;
        } catch (const std::exception& e) {
            result.error = e.what();
        }

        lock.lock();
        ++completed_;
        slot->result = std::move(result);
        slot->done = true;
        cv_.notify_all();
    }
}

struct PoseServer::Impl {
    explicit Impl(SceneSession& s) : session(s) {
        server.Get("/scene", [this](const httplib::Request&, httplib::Response& res) {
            try {
                res.set_content(session.scene_json(), "application/json");
            } catch (const std::exception& e) {
                res.status = 503;
                res.set_content(json{{"message", e.what()}}.dump(), "application/json");
            }
        });
        server.Post("/pose", [this](const httplib::Request& req, httplib::Response& res) {
            PoseRequest pose;
            try {
                pose = parse_pose_request(req.body);
            } catch (const std::exception& e) {
                res.status = 400;
                res.set_content(json{{"seq", nullptr}, {"message", e.what()}}.dump(),
                                "application/json");
                return;
            }
            const PoseResult result = session.post_pose(pose);
            if (result.ok) {
                res.set_header("X-Frame-Report", frame_report_json(result.report));
                res.set_content(encode_positions(result.seq, result.positions),
                                "application/octet-stream");
                return;
            }
            res.status = result.superseded ? 409 : 422;
            res.set_content(json{{"seq", result.seq}, {"message", result.error}}.dump(),
                            "application/json");
        });
    }

    SceneSession& session;
    httplib::Server server;
};

PoseServer::PoseServer(SceneSession& session) : impl_(std::make_unique<Impl>(session)) {}

PoseServer::~PoseServer() { stop(); }

bool PoseServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int PoseServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool PoseServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void PoseServer::stop() {
    if (impl_) impl_->server.stop();
}

bool PoseServer::is_running() const { return impl_->server.is_running(); }

}  // namespace mfemskin
