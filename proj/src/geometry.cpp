#include "flowlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flowlab {

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double norm(std::span<const double> x) { return std::sqrt(squared_norm(x)); }

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

PointN unit_radial(const PointN& x) {
    if (!all_finite(x)) throw std::invalid_argument("unit_radial: non-finite input");
    const double r = norm(x);
    PointN out(x.size(), 0.0);
    if (r == 0.0) return out;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / r;
    return out;
}

// ---------------------------------------------------------------------------
// DriftField

DriftField DriftField::constant(double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
        throw std::invalid_argument("DriftField: constant value must be finite and >= 0");
    DriftField f;
    f.kind_ = Kind::Constant;
    f.constant_value_ = value;
    f.bound_ = value;
    f.lipschitz_ = 0.0;
    return f;
}

DriftField DriftField::table(std::vector<double> radii, std::vector<double> values,
                             double bound, double lipschitz) {
    if (radii.size() != values.size() || radii.size() < 2)
        throw std::invalid_argument("DriftField: table needs >= 2 matching knots");
    if (!std::is_sorted(radii.begin(), radii.end()) || radii.front() < 0.0)
        throw std::invalid_argument("DriftField: table radii must be sorted and >= 0");
    DriftField f;
    f.kind_ = Kind::Table;
    f.knot_r_ = std::move(radii);
    f.knot_v_ = std::move(values);
    f.bound_ = bound;
    f.lipschitz_ = lipschitz;
    f.validate();
    return f;
}

DriftField DriftField::named(const std::string& family,
                             const std::map<std::string, double>& params,
                             double bound, double lipschitz) {
    if (family != "gaussian_bump")
        throw std::invalid_argument("DriftField: unknown family '" + family + "'");
    for (const char* key : {"amplitude", "center", "width"})
        if (!params.count(key))
            throw std::invalid_argument(std::string("DriftField: missing param '") + key + "'");
    if (params.at("width") <= 0.0)
        throw std::invalid_argument("DriftField: width must be > 0");
    DriftField f;
    f.kind_ = Kind::Named;
    f.family_ = family;
    f.params_ = params;
    f.bound_ = bound;
    f.lipschitz_ = lipschitz;
    f.validate();
    return f;
}

double DriftField::operator()(double r) const {
    if (!(r >= 0.0)) throw std::invalid_argument("DriftField: radius must be >= 0");
    r *= scale_;
    switch (kind_) {
        case Kind::Constant:
            return constant_value_;
        case Kind::Table: {
            if (r <= knot_r_.front()) return knot_v_.front();
            if (r >= knot_r_.back()) return knot_v_.back();
            const auto it = std::upper_bound(knot_r_.begin(), knot_r_.end(), r);
            const std::size_t j = static_cast<std::size_t>(it - knot_r_.begin());
            const double t = (r - knot_r_[j - 1]) / (knot_r_[j] - knot_r_[j - 1]);
            return knot_v_[j - 1] + t * (knot_v_[j] - knot_v_[j - 1]);
        }
        case Kind::Named: {
            const double a = params_.at("amplitude");
            const double c = params_.at("center");
            const double w = params_.at("width");
            const double z = (r - c) / w;
            return a * std::exp(-z * z);
        }
    }
    return 0.0;
}

void DriftField::validate() const {
    // Sample grid check of the declared bound and Lipschitz constant.
    const double r_max = (kind_ == Kind::Table && !knot_r_.empty())
                             ? std::max(100.0, knot_r_.back() * 2.0)
                             : 100.0;
    const int samples = 4096;
    double prev_r = 0.0, prev_v = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double r = r_max * static_cast<double>(i) / samples;
        const double val = (*this)(r);
        if (!(val >= 0.0) || val > bound_ + 1e-12 * std::max(1.0, bound_))
            throw std::invalid_argument("DriftField: sampled value outside [0, bound]");
        if (i > 0) {
            const double slope = std::abs(val - prev_v) / (r - prev_r);
            if (slope > lipschitz_ + 1e-9 * std::max(1.0, lipschitz_))
                throw std::invalid_argument("DriftField: sampled slope exceeds Lipschitz constant");
        }
        prev_r = r;
        prev_v = val;
    }
}

DriftField DriftField::rescaled(double lambda) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("DriftField: rescale factor must be > 0");
    DriftField f = *this;
    f.scale_ *= lambda;
    f.lipschitz_ *= lambda;
    return f;
}

std::string DriftField::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Constant: os << "constant(" << constant_value_ << ")"; break;
        case Kind::Table: os << "table[" << knot_r_.size() << " knots]"; break;
        case Kind::Named: os << family_; break;
    }
    if (scale_ != 1.0) os << "@scale=" << scale_;
    return os.str();
}

// ---------------------------------------------------------------------------

PointN truncated_drift(const PointN& x, const DriftField& field, double truncation) {
    if (!(truncation > 0.0)) throw std::invalid_argument("truncated_drift: N must be > 0");
    if (!all_finite(x)) throw std::invalid_argument("truncated_drift: non-finite input");
    const double r = norm(x);
    PointN out(x.size(), 0.0);
    if (r == 0.0) return out;
    const double denom = std::max(r, 1.0 / truncation);
    const double mag = field(r) / denom;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = mag * x[i] / r;
    return out;
}

double radial_projection_bound(const PointN& a, const PointN& b) {
    if (a.size() != b.size()) throw std::invalid_argument("radial_projection_bound: dimension mismatch");
    if (!all_finite(a) || !all_finite(b))
        throw std::invalid_argument("radial_projection_bound: non-finite input");
    const double na = norm(a);
    const double nb = norm(b);
    const double eps = 1e-12;
    if (na > 0.5 + eps)
        throw std::invalid_argument("radial_projection_bound: |a| must be <= 1/2");
    if (nb < 1.0 - eps || nb > 2.5 + eps)
        throw std::invalid_argument("radial_projection_bound: |b| must lie in [1, 5/2]");
    return nb - dot(a, b) / nb;
}

// ---------------------------------------------------------------------------
// Region

Region Region::half_space(int n, double level, double lateral_radius) {
    if (n < 1) throw std::invalid_argument("Region: dimension must be >= 1");
    if (n > 1 && !(lateral_radius > 0.0))
        throw std::invalid_argument("Region: lateral radius must be > 0");
    Region r;
    r.kind = Kind::HalfSpace;
    r.dimension = n;
    r.level = level;
    r.lateral_radius = lateral_radius;
    r.lateral_center.assign(static_cast<std::size_t>(n - 1), 0.0);
    return r;
}

Region Region::ball_complement(int n, PointN center, double radius) {
    if (n < 1) throw std::invalid_argument("Region: dimension must be >= 1");
    if (static_cast<int>(center.size()) != n)
        throw std::invalid_argument("Region: center dimension mismatch");
    if (!(radius > 0.0)) throw std::invalid_argument("Region: radius must be > 0");
    Region r;
    r.kind = Kind::BallComplement;
    r.dimension = n;
    r.center = std::move(center);
    r.radius = radius;
    return r;
}

Region Region::lateral_disc(int n, double level, double radius,
                            std::vector<double> lateral_center) {
    if (n < 1) throw std::invalid_argument("Region: dimension must be >= 1");
    if (n > 1 && !(radius > 0.0)) throw std::invalid_argument("Region: radius must be > 0");
    if (lateral_center.empty()) lateral_center.assign(static_cast<std::size_t>(n - 1), 0.0);
    if (static_cast<int>(lateral_center.size()) != n - 1)
        throw std::invalid_argument("Region: lateral center dimension mismatch");
    Region r;
    r.kind = Kind::LateralDisc;
    r.dimension = n;
    r.level = level;
    r.lateral_radius = radius;
    r.lateral_center = std::move(lateral_center);
    return r;
}

Region Region::cylinder(int n, const PointN& corner, double delta) {
    if (n < 2) throw std::invalid_argument("Region: cylinder needs dimension >= 2");
    if (static_cast<int>(corner.size()) != n)
        throw std::invalid_argument("Region: corner dimension mismatch");
    if (!(delta > 0.0)) throw std::invalid_argument("Region: delta must be > 0");
    Region r;
    r.kind = Kind::Cylinder;
    r.dimension = n;
    r.level = corner[0];
    r.delta = delta;
    r.lateral_center.assign(corner.begin() + 1, corner.end());
    return r;
}

double Region::distance_to_origin() const {
    switch (kind) {
        case Kind::HalfSpace:
            return std::max(0.0, level);
        case Kind::BallComplement:
            return std::max(0.0, radius - norm(center));
        case Kind::LateralDisc: {
            const double lat = norm(lateral_center);
            const double lat_gap = std::max(0.0, lat - lateral_radius);
            return std::sqrt(level * level + lat_gap * lat_gap);
        }
        case Kind::Cylinder: {
            const double lat = norm(lateral_center);
            const double lat_gap = std::max(0.0, lat - delta);
            const double vert_gap = (level > 0.0) ? level : std::max(0.0, -(level + delta));
            return std::sqrt(vert_gap * vert_gap + lat_gap * lat_gap);
        }
    }
    return 0.0;
}

} // namespace flowlab
