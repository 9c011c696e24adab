#include "frontlab/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "frontlab/errors.hpp"
#include "frontlab/numerics.hpp"

namespace frontlab {

namespace {

constexpr int kMinTablePoints = 256;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t\r"));
        cell.erase(cell.find_last_not_of(" \t\r") + 1);
        out.push_back(cell);
    }
    return out;
}

}  // namespace

BistableNonlinearity BistableNonlinearity::cubic(double theta, double scale) {
    if (!(theta > 0.0 && theta < 1.0)) throw PreconditionError("cubic nonlinearity needs theta in (0,1)");
    if (!(scale > 0.0)) throw PreconditionError("cubic nonlinearity needs scale > 0");
    BistableNonlinearity f;
    f.kind_ = NonlinearityKind::cubic;
    f.theta_ = theta;
    f.scale_ = scale;
    f.finish();
    return f;
}

BistableNonlinearity BistableNonlinearity::tabulated(std::vector<double> u, std::vector<double> fv, std::vector<double> df) {
    if (u.size() != fv.size() || u.size() != df.size())
        throw PreconditionError("tabulated nonlinearity: column lengths differ");
    if (static_cast<int>(u.size()) < kMinTablePoints)
        throw PreconditionError("tabulated nonlinearity needs at least 256 samples");
    for (std::size_t i = 1; i < u.size(); ++i)
        if (!(u[i] > u[i - 1])) throw PreconditionError("tabulated nonlinearity: u must be strictly increasing");
    if (u.front() > 0.0 || u.back() < 1.0)
        throw DomainError("tabulated nonlinearity: table support must contain [0,1]");
    BistableNonlinearity f;
    f.kind_ = NonlinearityKind::tabulated;
    f.tu_ = std::move(u);
    f.tf_ = std::move(fv);
    f.tdf_ = std::move(df);
    f.tF_.assign(f.tu_.size(), 0.0);
    for (std::size_t i = 1; i < f.tu_.size(); ++i) {
        const double h = f.tu_[i] - f.tu_[i - 1];
        f.tF_[i] = f.tF_[i - 1] + h * (f.tf_[i - 1] + f.tf_[i]) / 2.0 + h * h * (f.tdf_[i - 1] - f.tdf_[i]) / 12.0;
    }
    // Interior zero: first sign change from negative to positive inside (0,1).
    f.theta_ = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 1; i < f.tu_.size(); ++i) {
        const double a = f.tu_[i - 1], b = f.tu_[i];
        if (b <= 0.0 || a >= 1.0) continue;
        const double fa = f.table_value(std::max(a, 0.0), 0), fb = f.table_value(std::min(b, 1.0), 0);
        if (fa < 0.0 && fb >= 0.0) {
            double lo = std::max(a, 0.0), hi = std::min(b, 1.0);
            for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
                const double mid = 0.5 * (lo + hi);
                (f.table_value(mid, 0) < 0.0 ? lo : hi) = mid;
            }
            f.theta_ = 0.5 * (lo + hi);
            break;
        }
    }
    f.finish();
    return f;
}

BistableNonlinearity BistableNonlinearity::from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open nonlinearity table " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty nonlinearity table " + path.string());
    const auto header = split_csv_line(line);
    int iu = -1, ifv = -1, idf = -1;
    for (int k = 0; k < static_cast<int>(header.size()); ++k) {
        if (header[k] == "u") iu = k;
        if (header[k] == "f") ifv = k;
        if (header[k] == "df") idf = k;
    }
    if (iu < 0 || ifv < 0 || idf < 0) throw ConfigError("nonlinearity table needs columns u,f,df: " + path.string());
    std::vector<double> u, fv, df;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        const int need = std::max({iu, ifv, idf});
        if (static_cast<int>(cells.size()) <= need) throw ConfigError("short row in " + path.string());
        u.push_back(std::stod(cells[iu]));
        fv.push_back(std::stod(cells[ifv]));
        df.push_back(std::stod(cells[idf]));
    }
    auto f = tabulated(std::move(u), std::move(fv), std::move(df));
    f.table_source_ = path.string();
    return f;
}

BistableNonlinearity BistableNonlinearity::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cubic") return cubic(j.at("theta").get<double>(), j.value("scale", 1.0));
    if (kind == "tabulated") {
        std::filesystem::path p = j.at("table").get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        auto f = from_csv(p);
        f.table_source_ = j.at("table").get<std::string>();
        return f;
    }
    throw ConfigError("unknown nonlinearity kind '" + kind + "'");
}

void BistableNonlinearity::finish() {
    df0_ = derivative(0.0);
    df1_ = derivative(1.0);
    F1_ = potential(1.0);
    lip_ = 0.0;
    curv_ = 0.0;
    auto grid = validation_grid(1000);
    if (kind_ == NonlinearityKind::cubic) grid.push_back((1.0 + theta_) / 3.0);
    for (double u : grid) {
        lip_ = std::max(lip_, std::abs(derivative(u)));
        curv_ = std::max(curv_, std::abs(second_derivative(u)));
    }
}

double BistableNonlinearity::table_value(double u, int order) const {
    if (u < tu_.front() || u > tu_.back()) throw DomainError("u outside table support");
    auto it = std::upper_bound(tu_.begin(), tu_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - tu_.begin());
    i = i == 0 ? 0 : i - 1;
    if (i >= tu_.size() - 1) i = tu_.size() - 2;
    const double h = tu_[i + 1] - tu_[i];
    const double t = (u - tu_[i]) / h;
    const double y0 = tf_[i], y1 = tf_[i + 1], d0 = tdf_[i] * h, d1 = tdf_[i + 1] * h;
    const double t2 = t * t, t3 = t2 * t;
    switch (order) {
        case 0:
            return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
        case 1:
            return ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * d0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * d1) / h;
        default:
            return ((12 * t - 6) * y0 + (6 * t - 4) * d0 + (-12 * t + 6) * y1 + (6 * t - 2) * d1) / (h * h);
    }
}

double BistableNonlinearity::table_potential(double u) const {
    auto primitive = [&](double x) {
        if (x < tu_.front() || x > tu_.back()) throw DomainError("u outside table support");
        auto it = std::upper_bound(tu_.begin(), tu_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - tu_.begin());
        i = i == 0 ? 0 : i - 1;
        if (i >= tu_.size() - 1) i = tu_.size() - 2;
        const double h = tu_[i + 1] - tu_[i];
        const double t = (x - tu_[i]) / h;
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
        const double a00 = t4 / 2 - t3 + t, a10 = t4 / 4 - 2 * t3 / 3 + t2 / 2;
        const double a01 = -t4 / 2 + t3, a11 = t4 / 4 - t3 / 3;
        return tF_[i] + h * (a00 * tf_[i] + a10 * h * tdf_[i] + a01 * tf_[i + 1] + a11 * h * tdf_[i + 1]);
    };
    return primitive(u) - primitive(0.0);
}

double BistableNonlinearity::value(double u) const {
    if (kind_ == NonlinearityKind::tabulated) return table_value(u, 0);
    if (u < 0.0) return df0_ * u;
    if (u > 1.0) return df1_ * (u - 1.0);
    return scale_ * u * (1.0 - u) * (u - theta_);
}

double BistableNonlinearity::derivative(double u) const {
    if (kind_ == NonlinearityKind::tabulated) return table_value(u, 1);
    const double v = std::clamp(u, 0.0, 1.0);
    return scale_ * (-3.0 * v * v + 2.0 * (1.0 + theta_) * v - theta_);
}

double BistableNonlinearity::second_derivative(double u) const {
    if (kind_ == NonlinearityKind::tabulated) return table_value(u, 2);
    if (u < 0.0 || u > 1.0) return 0.0;
    return scale_ * (-6.0 * u + 2.0 * (1.0 + theta_));
}

double BistableNonlinearity::potential(double u) const {
    if (kind_ == NonlinearityKind::tabulated) return table_potential(u);
    auto poly = [&](double v) {
        return scale_ * v * v * (-v * v / 4.0 + (1.0 + theta_) * v / 3.0 - theta_ / 2.0);
    };
    if (u < 0.0) return 0.5 * df0_ * u * u;
    if (u > 1.0) return poly(1.0) + 0.5 * df1_ * (u - 1.0) * (u - 1.0);
    return poly(u);
}

ReactionValue BistableNonlinearity::evaluate(double u) const {
    return {value(u), derivative(u), potential(u)};
}

std::vector<double> BistableNonlinearity::validation_grid(int n) const {
    std::vector<double> g;
    g.reserve(n + 3);
    for (int i = 0; i < n; ++i) g.push_back(static_cast<double>(i) / (n - 1));
    g.push_back(0.0);
    g.push_back(1.0);
    if (std::isfinite(theta_)) g.push_back(theta_);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

nlohmann::json BistableNonlinearity::to_json() const {
    if (kind_ == NonlinearityKind::cubic) return {{"kind", "cubic"}, {"theta", theta_}, {"scale", scale_}};
    return {{"kind", "tabulated"}, {"table", table_source_}};
}

ReactionValue evaluate(const BistableNonlinearity& f, double u) {
    return f.evaluate(u);
}

bool ValidationReport::pass() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.evaluated && c.pass; });
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json j;
    j["pass"] = pass();
    j["integral"] = integral;
    j["conditions"] = nlohmann::json::array();
    for (const auto& c : conditions) {
        j["conditions"].push_back({{"name", c.name},
                                   {"evaluated", c.evaluated},
                                   {"pass", c.pass},
                                   {"witness_u", c.witness_u},
                                   {"witness_value", c.witness_value},
                                   {"detail", c.detail}});
    }
    return j;
}

ValidationReport validate_bistable(const BistableNonlinearity& f, int grid_size, double tol) {
    if (grid_size < 100) throw PreconditionError("validate_bistable needs grid_size >= 100");
    ValidationReport rep;

    ConditionResult f2{"F2", true, true, 0.0, 0.0, "f(0) = f(1) = 0"};
    const double v0 = f.value(0.0), v1 = f.value(1.0);
    if (std::abs(v0) > tol) {
        f2.pass = false;
        f2.witness_u = 0.0;
        f2.witness_value = v0;
    } else if (std::abs(v1) > tol) {
        f2.pass = false;
        f2.witness_u = 1.0;
        f2.witness_value = v1;
    } else {
        f2.witness_u = 1.0;
        f2.witness_value = v1;
    }
    rep.conditions.push_back(f2);

    ConditionResult f3{"F3", true, true, 0.0, f.derivative_at_0(), "f'(0) < 0 and f'(1) < 0"};
    if (!(f.derivative_at_0() < 0.0)) {
        f3.pass = false;
    } else if (!(f.derivative_at_1() < 0.0)) {
        f3.pass = false;
        f3.witness_u = 1.0;
        f3.witness_value = f.derivative_at_1();
    }
    rep.conditions.push_back(f3);

    ConditionResult f4{"F4", true, true, 0.0, 0.0, "f < 0 on (0,theta), f > 0 on (theta,1)"};
    const double th = f.theta();
    if (!std::isfinite(th)) {
        f4.pass = false;
        f4.detail = "no interior zero with a negative-to-positive sign change";
    } else {
        for (double u : f.validation_grid(grid_size)) {
            if (u <= 0.0 || u >= 1.0 || u == th) continue;
            const double v = f.value(u);
            if ((u < th && !(v < 0.0)) || (u > th && !(v > 0.0))) {
                f4.pass = false;
                f4.witness_u = u;
                f4.witness_value = v;
                break;
            }
        }
    }
    rep.conditions.push_back(f4);

    ConditionResult f8{"F8", false, false, 1.0, 0.0, "integral of f over [0,1] > 0"};
    rep.integral = f.potential_at_1();
    if (f4.pass) {
        f8.evaluated = true;
        f8.pass = rep.integral > 0.0;
        f8.witness_value = rep.integral;
    } else {
        f8.detail = "skipped after sign-structure failure";
    }
    rep.conditions.push_back(f8);
    return rep;
}

BlendKind blend_from_string(const std::string& s) {
    if (s == "quintic") return BlendKind::quintic;
    if (s == "cubic") return BlendKind::cubic;
    if (s == "linear") return BlendKind::linear;
    throw ConfigError("unknown blend kind '" + s + "'");
}

std::string to_string(BlendKind b) {
    switch (b) {
        case BlendKind::quintic: return "quintic";
        case BlendKind::cubic: return "cubic";
        case BlendKind::linear: return "linear";
    }
    return "quintic";
}

SpatialReaction::SpatialReaction(BistableNonlinearity f1, BistableNonlinearity f2, double x0, BlendKind blend)
    : f1_(std::move(f1)), f2_(std::move(f2)), x0_(x0), blend_(blend) {
    if (!(x0_ > 0.0)) throw PreconditionError("transition-zone width x0 must be positive");
    if (f1_.theta() > f2_.theta()) throw PreconditionError("interior zeros must satisfy theta1 <= theta2");
    cf_ = derive_cf(*this);
}

double SpatialReaction::lipschitz_bound() const {
    return std::max(f1_.lipschitz_bound(), f2_.lipschitz_bound());
}

double SpatialReaction::chi(double x1) const {
    if (x1 >= 0.0) return 1.0;
    if (x1 <= -x0_) return 0.0;
    const double s = (x1 + x0_) / x0_;
    switch (blend_) {
        case BlendKind::quintic: return smoothstep5(s);
        case BlendKind::cubic: return s * s * (3.0 - 2.0 * s);
        case BlendKind::linear: return s;
    }
    return s;
}

double SpatialReaction::value(double x1, double u) const {
    const double c = chi(x1);
    if (c == 1.0) return f1_.value(u);
    if (c == 0.0) return f2_.value(u);
    return value_with_chi(c, u);
}

double SpatialReaction::derivative(double x1, double u) const {
    const double c = chi(x1);
    if (c == 1.0) return f1_.derivative(u);
    if (c == 0.0) return f2_.derivative(u);
    return c * f1_.derivative(u) + (1.0 - c) * f2_.derivative(u);
}

nlohmann::json SpatialReaction::to_json() const {
    return {{"f1", f1_.to_json()}, {"f2", f2_.to_json()}, {"x0", x0_}, {"blend", to_string(blend_)}};
}

double eval_spatial(const SpatialReaction& r, double x1, double u) {
    return r.value(x1, u);
}

double derive_cf(const SpatialReaction& r) {
    const int n = 100000;
    double sup = std::abs(r.f1().derivative(1.0) - r.f2().derivative(1.0));
    for (int k = 0; k < n; ++k) {
        const double u = static_cast<double>(k) / n;
        sup = std::max(sup, std::abs(r.f1().value(u) - r.f2().value(u)) / (1.0 - u));
    }
    return sup * (1.0 + 1e-12);
}

}  // namespace frontlab
