#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace frontlab {

enum class NonlinearityKind { cubic, tabulated };

struct ReactionValue {
    double value;
    double derivative;
    double potential;
};

// Bistable reaction term with zeros 0 < theta < 1. The cubic kind is
// f(u) = s*u*(1-u)*(u-theta); the tabulated kind is a cubic Hermite fit through
// (u, f, f') samples. Immutable after construction.
class BistableNonlinearity {
public:
    static BistableNonlinearity cubic(double theta, double scale = 1.0);
    static BistableNonlinearity tabulated(std::vector<double> u, std::vector<double> f, std::vector<double> df);
    static BistableNonlinearity from_csv(const std::filesystem::path& path);
    static BistableNonlinearity from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

    NonlinearityKind kind() const { return kind_; }
    double theta() const { return theta_; }
    double scale() const { return scale_; }
    double derivative_at_0() const { return df0_; }
    double derivative_at_1() const { return df1_; }
    double potential_at_1() const { return F1_; }
    // sup |f'| and sup |f''| over [0,1] on the validation grid.
    double lipschitz_bound() const { return lip_; }
    double curvature_bound() const { return curv_; }

    double value(double u) const;
    double derivative(double u) const;
    double second_derivative(double u) const;
    double potential(double u) const;
    ReactionValue evaluate(double u) const;

    // Uniform grid of `n` points on [0,1] plus the three roots, sorted.
    std::vector<double> validation_grid(int n = 1000) const;

    nlohmann::json to_json() const;

private:
    BistableNonlinearity() = default;
    void finish();
    double table_value(double u, int order) const;
    double table_potential(double u) const;

    NonlinearityKind kind_ = NonlinearityKind::cubic;
    double theta_ = 0.5;
    double scale_ = 1.0;
    std::vector<double> tu_, tf_, tdf_, tF_;
    std::string table_source_;
    double df0_ = 0.0, df1_ = 0.0, F1_ = 0.0, lip_ = 0.0, curv_ = 0.0;
};

ReactionValue evaluate(const BistableNonlinearity& f, double u);

struct ConditionResult {
    std::string name;
    bool evaluated = false;
    bool pass = false;
    double witness_u = 0.0;
    double witness_value = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ConditionResult> conditions;  // F2, F3, F4, F8 in that order
    double integral = 0.0;
    bool pass() const;
    nlohmann::json to_json() const;
};

ValidationReport validate_bistable(const BistableNonlinearity& f, int grid_size = 1000, double tol = 1e-9);

enum class BlendKind { quintic, cubic, linear };

BlendKind blend_from_string(const std::string& s);
std::string to_string(BlendKind b);

// f(x,u) = chi(x) f1(u) + (1 - chi(x)) f2(u) with chi = 1 on x >= 0, 0 on x <= -x0.
class SpatialReaction {
public:
    SpatialReaction(BistableNonlinearity f1, BistableNonlinearity f2, double x0, BlendKind blend = BlendKind::quintic);

    const BistableNonlinearity& f1() const { return f1_; }
    const BistableNonlinearity& f2() const { return f2_; }
    double x0() const { return x0_; }
    BlendKind blend() const { return blend_; }
    double c_f() const { return cf_; }
    double lipschitz_bound() const;

    double chi(double x1) const;
    double value(double x1, double u) const;
    double derivative(double x1, double u) const;
    double value_with_chi(double chi, double u) const {
        return chi * f1_.value(u) + (1.0 - chi) * f2_.value(u);
    }

    nlohmann::json to_json() const;

private:
    BistableNonlinearity f1_, f2_;
    double x0_;
    BlendKind blend_;
    double cf_ = 0.0;
};

double eval_spatial(const SpatialReaction& r, double x1, double u);
double derive_cf(const SpatialReaction& r);

}  // namespace frontlab
