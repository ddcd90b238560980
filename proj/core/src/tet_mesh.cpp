#include "mfemskin/tet_mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mfemskin/errors.hpp"

namespace mfemskin {

namespace {

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

// Faces of a positively oriented tet, wound outward.
constexpr int kFaces[4][3] = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};

}  // namespace

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets)
    : vertices_(std::move(vertices)), tets_(std::move(tets)) {
    const int n = num_vertices();
    if (tets_.empty()) throw ConfigError("mesh has no tetrahedra");
    for (std::size_t k = 0; k < tets_.size(); ++k) {
        for (int v : tets_[k]) {
            if (v < 0 || v >= n) {
                throw ConfigError("tet " + std::to_string(k) + " references vertex " +
                                  std::to_string(v) + " outside [0, " + std::to_string(n) + ")");
            }
        }
    }

    volumes_.resize(tets_.size());
    double mean = 0.0;
    for (std::size_t k = 0; k < tets_.size(); ++k) {
        Tet& t = tets_[k];
        double vol = signed_volume(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]], vertices_[t[3]]);
        if (vol < 0) {
            std::swap(t[1], t[2]);
            vol = -vol;
        }
        volumes_[k] = vol;
        mean += vol;
    }
    mean /= static_cast<double>(tets_.size());

    std::vector<int> degenerate;
    for (std::size_t k = 0; k < tets_.size(); ++k) {
        if (!(volumes_[k] > 1e-12 * mean)) degenerate.push_back(static_cast<int>(k));
    }
    if (!degenerate.empty()) throw DegenerateElementError(std::move(degenerate));

    // Boundary faces appear exactly once; keep first-seen order.
    struct FaceRecord {
        int count = 0;
        std::size_t order = 0;
        Face face{};
    };
    std::map<std::array<int, 3>, FaceRecord> faces;
    std::size_t order = 0;
    for (const Tet& t : tets_) {
        for (const auto& f : kFaces) {
            Face face{t[f[0]], t[f[1]], t[f[2]]};
            std::array<int, 3> key = face;
            std::sort(key.begin(), key.end());
            auto& rec = faces[key];
            if (rec.count++ == 0) {
                rec.order = order++;
                rec.face = face;
            }
        }
    }
    std::vector<std::pair<std::size_t, Face>> boundary;
    for (const auto& [key, rec] : faces) {
        if (rec.count == 1) boundary.emplace_back(rec.order, rec.face);
    }
    std::sort(boundary.begin(), boundary.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    surface_faces_.reserve(boundary.size());
    std::set<int> surface;
    for (const auto& [o, face] : boundary) {
        surface_faces_.push_back(face);
        surface.insert(face.begin(), face.end());
    }
    surface_vertices_.assign(surface.begin(), surface.end());
}

VecX TetMesh::rest_positions() const {
    VecX x(3 * num_vertices());
    for (int v = 0; v < num_vertices(); ++v) x.segment<3>(3 * v) = vertices_[v];
    return x;
}

Vec3 TetMesh::barycenter(int tet) const {
    const Tet& t = tets_[tet];
    return 0.25 * (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]] + vertices_[t[3]]);
}

double TetMesh::total_volume() const {
    double total = 0.0;
    for (double v : volumes_) total += v;
    return total;
}

double TetMesh::mean_surface_edge_length() const {
    std::set<std::pair<int, int>> edges;
    for (const Face& f : surface_faces_) {
        for (int e = 0; e < 3; ++e) {
            int a = f[e], b = f[(e + 1) % 3];
            edges.emplace(std::min(a, b), std::max(a, b));
        }
    }
    if (edges.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [a, b] : edges) total += (vertices_[a] - vertices_[b]).norm();
    return total / static_cast<double>(edges.size());
}

namespace {

struct Token {
    std::string text;
    std::size_t line;
};

class TokenStream {
public:
    TokenStream(std::istream& in, std::string path) : path_(std::move(path)) {
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::string tok;
            while (ls >> tok) tokens_.push_back({tok, number});
        }
    }

    bool done() const { return pos_ >= tokens_.size(); }
    const Token& next() {
        if (done()) {
            throw ParseError(path_, tokens_.empty() ? 0 : tokens_.back().line,
                             "unexpected end of file");
        }
        return tokens_[pos_++];
    }

    long long next_int() {
        const Token& t = next();
        try {
            std::size_t used = 0;
            long long v = std::stoll(t.text, &used);
            if (used != t.text.size()) throw std::invalid_argument(t.text);
            return v;
        } catch (const std::exception&) {
            throw ParseError(path_, t.line, "expected integer, got '" + t.text + "'");
        }
    }

    double next_double() {
        const Token& t = next();
        try {
            std::size_t used = 0;
            double v = std::stod(t.text, &used);
            if (used != t.text.size()) throw std::invalid_argument(t.text);
            return v;
        } catch (const std::exception&) {
            throw ParseError(path_, t.line, "expected number, got '" + t.text + "'");
        }
    }

    const std::string& path() const { return path_; }
    std::size_t last_line() const { return pos_ == 0 ? 0 : tokens_[pos_ - 1].line; }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::string path_;
};

// Entries per record for sections we skip.
const std::unordered_map<std::string, int> kSkippedSections = {
    {"Edges", 3},          {"Triangles", 4},       {"Quadrilaterals", 5},
    {"Hexahedra", 9},      {"Corners", 1},         {"RequiredVertices", 1},
    {"Ridges", 1},         {"RequiredEdges", 1},   {"Normals", 3},
    {"Tangents", 3},       {"NormalAtVertices", 2}, {"TangentAtVertices", 2},
    {"Prisms", 7},         {"Pyramids", 6},
};

}  // namespace

TetMesh load_tet_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mesh file " + path.string());
    TokenStream ts(in, path.string());

    std::vector<Vec3> vertices;
    std::vector<Tet> tets;
    bool saw_vertices = false;
    bool saw_tets = false;
    while (!ts.done()) {
        const Token kw = ts.next();
        if (kw.text == "End") break;
        if (kw.text == "MeshVersionFormatted") {
            ts.next_int();
        } else if (kw.text == "Dimension") {
            long long dim = ts.next_int();
            if (dim != 3) throw ParseError(ts.path(), kw.line, "only 3D meshes are supported");
        } else if (kw.text == "Vertices") {
            long long count = ts.next_int();
            if (count < 0) throw ParseError(ts.path(), kw.line, "negative vertex count");
            vertices.reserve(static_cast<std::size_t>(count));
            for (long long i = 0; i < count; ++i) {
                double x = ts.next_double(), y = ts.next_double(), z = ts.next_double();
                ts.next_int();  // reference tag
                vertices.emplace_back(x, y, z);
            }
            saw_vertices = true;
        } else if (kw.text == "Tetrahedra") {
            long long count = ts.next_int();
            if (count < 0) throw ParseError(ts.path(), kw.line, "negative tetrahedron count");
            tets.reserve(static_cast<std::size_t>(count));
            for (long long i = 0; i < count; ++i) {
                Tet t{};
                for (int c = 0; c < 4; ++c) {
                    long long idx = ts.next_int();
                    if (idx < 1 || idx > static_cast<long long>(vertices.size())) {
                        throw ParseError(ts.path(), ts.last_line(),
                                         "tetrahedron " + std::to_string(i) +
                                             " has vertex index " + std::to_string(idx) +
                                             " out of range");
                    }
                    t[c] = static_cast<int>(idx - 1);
                }
                ts.next_int();
                tets.push_back(t);
            }
            saw_tets = true;
        } else if (auto it = kSkippedSections.find(kw.text); it != kSkippedSections.end()) {
            long long count = ts.next_int();
            for (long long i = 0; i < count * it->second; ++i) ts.next();
        } else {
            throw ParseError(ts.path(), kw.line, "unknown keyword '" + kw.text + "'");
        }
    }
    if (!saw_vertices) throw ParseError(ts.path(), 0, "missing Vertices section");
    if (!saw_tets) throw ParseError(ts.path(), 0, "missing Tetrahedra section");
    return TetMesh(std::move(vertices), std::move(tets));
}

void write_tet_mesh(const std::filesystem::path& path, const TetMesh& mesh) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out.precision(17);
    out << "MeshVersionFormatted 1\nDimension 3\n\nVertices\n" << mesh.num_vertices() << '\n';
    for (const Vec3& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << " 0\n";
    out << "\nTetrahedra\n" << mesh.num_tets() << '\n';
    for (const Tet& t : mesh.tets()) {
        out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << ' ' << t[3] + 1 << " 0\n";
    }
    out << "\nEnd\n";
}

double mesh_volume(const TetMesh& mesh, const VecX& positions) {
    auto p = [&](int v) -> Vec3 { return positions.segment<3>(3 * v); };
    double total = 0.0;
    for (const Tet& t : mesh.tets()) total += signed_volume(p(t[0]), p(t[1]), p(t[2]), p(t[3]));
    return total;
}

void write_surface_obj(const std::filesystem::path& path, const TetMesh& mesh,
                       const VecX& positions) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    const auto& surface = mesh.surface_vertices();
    std::vector<int> local(mesh.num_vertices(), -1);
    out.precision(17);
    for (std::size_t i = 0; i < surface.size(); ++i) {
        const int v = surface[i];
        local[v] = static_cast<int>(i);
        out << "v " << positions[3 * v] << ' ' << positions[3 * v + 1] << ' '
            << positions[3 * v + 2] << '\n';
    }
    for (const Face& f : mesh.surface_faces()) {
        out << "f " << local[f[0]] + 1 << ' ' << local[f[1]] + 1 << ' ' << local[f[2]] + 1 << '\n';
    }
}

std::vector<float> pack_surface_positions(const TetMesh& mesh, const VecX& positions) {
    const auto& surface = mesh.surface_vertices();
    std::vector<float> out;
    out.reserve(3 * surface.size());
    for (int v : surface) {
        for (int c = 0; c < 3; ++c) out.push_back(static_cast<float>(positions[3 * v + c]));
    }
    return out;
}

}  // namespace mfemskin
