#include "mfemskin/material.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mfemskin/errors.hpp"

namespace mfemskin {

namespace {

// Weight of each plain 6-vector entry in |S|_F^2.
constexpr double kSymWeight[6] = {1, 1, 1, 2, 2, 2};

double frobenius_dev2(const Vec6& s) {
    const Vec6 d = s - identity6();
    double sum = 0.0;
    for (int c = 0; c < 6; ++c) sum += kSymWeight[c] * d[c] * d[c];
    return sum;
}

double trace_dev(const Vec6& s) { return s[0] + s[1] + s[2] - 3.0; }

}  // namespace

ArapMaterial::ArapMaterial(double mu) : mu_(mu) {
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
}

double ArapMaterial::value(const Vec6& s) const { return mu_ * frobenius_dev2(s); }

Vec6 ArapMaterial::gradient(const Vec6& s) const {
    const Vec6 d = s - identity6();
    Vec6 g;
    for (int c = 0; c < 6; ++c) g[c] = 2.0 * mu_ * kSymWeight[c] * d[c];
    return g;
}

Mat6 ArapMaterial::hessian(const Vec6&) const {
    Mat6 h = Mat6::Zero();
    for (int c = 0; c < 6; ++c) h(c, c) = 2.0 * mu_ * kSymWeight[c];
    return h;
}

CorotationalMaterial::CorotationalMaterial(double mu, double lambda) : mu_(mu), lambda_(lambda) {
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
}

double CorotationalMaterial::value(const Vec6& s) const {
    const double tr = trace_dev(s);
    return mu_ * frobenius_dev2(s) + 0.5 * lambda_ * tr * tr;
}

Vec6 CorotationalMaterial::gradient(const Vec6& s) const {
    const Vec6 d = s - identity6();
    const double tr = trace_dev(s);
    Vec6 g;
    for (int c = 0; c < 6; ++c) g[c] = 2.0 * mu_ * kSymWeight[c] * d[c];
    for (int c = 0; c < 3; ++c) g[c] += lambda_ * tr;
    return g;
}

Mat6 CorotationalMaterial::hessian(const Vec6&) const {
    Mat6 h = Mat6::Zero();
    for (int c = 0; c < 6; ++c) h(c, c) = 2.0 * mu_ * kSymWeight[c];
    h.topLeftCorner<3, 3>().array() += lambda_;
    return h;
}

MaterialKind parse_material_kind(std::string_view name) {
    if (name == "arap") return MaterialKind::Arap;
    if (name == "corotational") return MaterialKind::Corotational;
    throw ConfigError("unknown material model '" + std::string(name) +
                      "' (expected arap or corotational)");
}

std::shared_ptr<const MaterialModel> make_material(MaterialKind kind, double mu, double lambda) {
    switch (kind) {
        case MaterialKind::Arap: return std::make_shared<ArapMaterial>(mu);
        case MaterialKind::Corotational: return std::make_shared<CorotationalMaterial>(mu, lambda);
    }
    throw ConfigError("unknown material kind");
}

namespace {

std::vector<int> read_index_array(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + " must be an array of element indices");
    std::vector<int> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw ConfigError(what + " must contain integers");
        out.push_back(v.get<int>());
    }
    return out;
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

MaterialParams parse_material_params(const std::string& json_text,
                                     const std::filesystem::path& base_dir) {
    const auto doc = parse_json(json_text, "material JSON");
    if (!doc.is_object()) throw ConfigError("material JSON must be an object");
    MaterialParams p;
    p.kind = parse_material_kind(doc.value("model", std::string("arap")));
    p.mu = doc.value("mu", p.mu);
    p.lambda = doc.value("lambda", p.lambda);
    if (doc.contains("overrides")) {
        for (const auto& o : doc["overrides"]) {
            MaterialOverride ov{{}, o.value("mu", p.mu), o.value("lambda", p.lambda)};
            if (o.contains("elements")) {
                ov.elements = read_index_array(o["elements"], "override \"elements\"");
            } else if (o.contains("region_file")) {
                std::filesystem::path region = o["region_file"].get<std::string>();
                if (region.is_relative()) region = base_dir / region;
                ov.elements = read_index_array(parse_json(read_file(region), region.string()),
                                               region.string());
            } else {
                throw ConfigError("material override needs \"elements\" or \"region_file\"");
            }
            p.overrides.push_back(std::move(ov));
        }
    }
    return p;
}

MaterialParams load_material_params(const std::filesystem::path& path) {
    return parse_material_params(read_file(path), path.parent_path());
}

std::vector<std::shared_ptr<const MaterialModel>> resolve_materials(const MaterialParams& params,
                                                                    int num_tets) {
    std::map<std::pair<double, double>, std::shared_ptr<const MaterialModel>> cache;
    auto get = [&](double mu, double lambda) {
        auto& slot = cache[{mu, lambda}];
        if (!slot) slot = make_material(params.kind, mu, lambda);
        return slot;
    };
    std::vector<std::shared_ptr<const MaterialModel>> out(num_tets, get(params.mu, params.lambda));
    for (const auto& ov : params.overrides) {
        auto model = get(ov.mu, ov.lambda);
        for (int k : ov.elements) {
            if (k < 0 || k >= num_tets) {
                throw ConfigError("material override references element " + std::to_string(k) +
                                  " outside [0, " + std::to_string(num_tets) + ")");
            }
            out[k] = model;
        }
    }
    return out;
}

double energy_value(const MaterialModel& model, const Vec6& s) { return model.value(s); }

ElementEnergyData element_gradient_hessian(const MaterialModel& model, const Vec6& s,
                                           double volume) {
    return {volume * model.hessian(s), volume * model.gradient(s)};
}

SparseMat GlobalHsGs::matrix() const {
    std::vector<Triplet> triplets;
    triplets.reserve(blocks.size() * 36);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const int base = static_cast<int>(6 * k);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                if (blocks[k](i, j) != 0.0) triplets.emplace_back(base + i, base + j, blocks[k](i, j));
    }
    SparseMat h(6 * num_tets(), 6 * num_tets());
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
}

GlobalHsGs assemble_global_hs_gs(const std::vector<std::shared_ptr<const MaterialModel>>& models,
                                 const std::vector<double>& volumes, const VecX& s_values) {
    const std::size_t m = volumes.size();
    if (models.size() != m) {
        throw ConfigError("material table has " + std::to_string(models.size()) +
                          " entries for " + std::to_string(m) + " elements");
    }
    if (static_cast<std::size_t>(s_values.size()) != 6 * m) {
        throw ConfigError("strain vector has wrong length");
    }
    GlobalHsGs out;
    out.blocks.resize(m);
    out.gradient.resize(6 * m);
    out.linearization = s_values;
    for (std::size_t k = 0; k < m; ++k) {
        if (!models[k]) throw ConfigError("element " + std::to_string(k) + " has no material");
        const Vec6 s = s_values.segment<6>(6 * k);
        const auto data = element_gradient_hessian(*models[k], s, volumes[k]);
        out.blocks[k] = data.hessian;
        out.gradient.segment<6>(6 * k) = data.gradient;
        out.quadratic = out.quadratic && models[k]->is_quadratic();
    }
    return out;
}

GlobalHsGs assemble_rest_hs_gs(const std::vector<std::shared_ptr<const MaterialModel>>& models,
                               const std::vector<double>& volumes) {
    VecX s(6 * volumes.size());
    for (std::size_t k = 0; k < volumes.size(); ++k) s.segment<6>(6 * k) = identity6();
    return assemble_global_hs_gs(models, volumes, s);
}

}  // namespace mfemskin
