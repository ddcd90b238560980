#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfemskin/types.hpp"

namespace mfemskin {

/// Strain energy density over the symmetric stretch 6-vector s.
///
/// Derivatives are taken with respect to the plain entries of s, so the
/// off-diagonal components carry the factor 2 from their mirrored slot.
class MaterialModel {
public:
    virtual ~MaterialModel() = default;
    virtual double value(const Vec6& s) const = 0;
    virtual Vec6 gradient(const Vec6& s) const = 0;
    virtual Mat6 hessian(const Vec6& s) const = 0;
    /// True when the Hessian does not depend on s.
    virtual bool is_quadratic() const = 0;
    virtual std::string name() const = 0;
};

/// mu * |S - I|_F^2
class ArapMaterial final : public MaterialModel {
public:
    explicit ArapMaterial(double mu);
    double value(const Vec6& s) const override;
    Vec6 gradient(const Vec6& s) const override;
    Mat6 hessian(const Vec6& s) const override;
    bool is_quadratic() const override { return true; }
    std::string name() const override { return "arap"; }
    double mu() const { return mu_; }

private:
    double mu_;
};

/// mu * |S - I|_F^2 + lambda/2 * tr(S - I)^2
class CorotationalMaterial final : public MaterialModel {
public:
    CorotationalMaterial(double mu, double lambda);
    double value(const Vec6& s) const override;
    Vec6 gradient(const Vec6& s) const override;
    Mat6 hessian(const Vec6& s) const override;
    bool is_quadratic() const override { return true; }
    std::string name() const override { return "corotational"; }
    double mu() const { return mu_; }
    double lambda() const { return lambda_; }

private:
    double mu_;
    double lambda_;
};

enum class MaterialKind { Arap, Corotational };

MaterialKind parse_material_kind(std::string_view name);

struct MaterialOverride {
    std::vector<int> elements;
    double mu;
    double lambda;
};

/// Homogeneous defaults plus optional per-element overrides.
struct MaterialParams {
    MaterialKind kind = MaterialKind::Arap;
    double mu = 1e3;
    double lambda = 0.0;
    std::vector<MaterialOverride> overrides;
};

/// Reads the material JSON. Relative "region_file" paths resolve against the
/// config's directory; region files hold a JSON array of element indices.
MaterialParams load_material_params(const std::filesystem::path& path);
MaterialParams parse_material_params(const std::string& json_text,
                                     const std::filesystem::path& base_dir = {});

std::shared_ptr<const MaterialModel> make_material(MaterialKind kind, double mu, double lambda);

/// One model per element, shared between elements with equal parameters.
/// Throws ConfigError for invalid parameters or out-of-range override
/// elements.
std::vector<std::shared_ptr<const MaterialModel>> resolve_materials(const MaterialParams& params,
                                                                    int num_tets);

double energy_value(const MaterialModel& model, const Vec6& s);

/// Per-element gradient and Hessian, both scaled by the element volume.
struct ElementEnergyData {
    Mat6 hessian;
    Vec6 gradient;
};

ElementEnergyData element_gradient_hessian(const MaterialModel& model, const Vec6& s,
                                           double volume);

/// Block-diagonal H_s (6m x 6m) and stacked g_s (6m).
struct GlobalHsGs {
    std::vector<Mat6> blocks;
    VecX gradient;
    /// Point the derivatives were taken at.
    VecX linearization;
    bool quadratic = true;

    SparseMat matrix() const;
    int num_tets() const { return static_cast<int>(blocks.size()); }
};

GlobalHsGs assemble_global_hs_gs(const std::vector<std::shared_ptr<const MaterialModel>>& models,
                                 const std::vector<double>& volumes, const VecX& s_values);

/// Evaluated at s = vec6(I) for every element.
GlobalHsGs assemble_rest_hs_gs(const std::vector<std::shared_ptr<const MaterialModel>>& models,
                               const std::vector<double>& volumes);

}  // namespace mfemskin
