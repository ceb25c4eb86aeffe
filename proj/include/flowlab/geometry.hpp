#ifndef FLOWLAB_GEOMETRY_HPP
#define FLOWLAB_GEOMETRY_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace flowlab {

/// A point of R^n. Plain coordinates, dimensionless units.
using PointN = std::vector<double>;

double norm(std::span<const double> x);
double squared_norm(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> x);

/// x/|x| for x != 0, the zero vector for x = 0.
PointN unit_radial(const PointN& x);

/// Nonnegative bounded Lipschitz radial drift profile F(r).
///
/// The bound and Lipschitz constant are declared by the caller and checked
/// against a sample grid at construction; evaluation outside [0, bound]
/// or slopes beyond the declared constant are rejected there.
class DriftField {
public:
    enum class Kind { Constant, Table, Named };

    /// F == value everywhere. The workhorse.
    static DriftField constant(double value);

    /// Piecewise-linear interpolation over (radius, value) knots;
    /// constant extrapolation beyond the last knot.
    static DriftField table(std::vector<double> radii, std::vector<double> values,
                            double bound, double lipschitz);

    /// Named families. Currently "gaussian_bump" with params
    /// {amplitude, center, width}.
    static DriftField named(const std::string& family,
                            const std::map<std::string, double>& params,
                            double bound, double lipschitz);

    double operator()(double r) const;

    Kind kind() const { return kind_; }
    double bound() const { return bound_; }
    double lipschitz() const { return lipschitz_; }
    bool is_zero() const { return bound_ == 0.0; }

    /// The field r -> F(lambda * r), as produced by the space-time scaling
    /// of the flow. Bound unchanged, Lipschitz constant scales by lambda.
    DriftField rescaled(double lambda) const;

    std::string describe() const;

    // serialization accessors
    double constant_value() const { return constant_value_; }
    const std::vector<double>& knot_radii() const { return knot_r_; }
    const std::vector<double>& knot_values() const { return knot_v_; }
    const std::string& family() const { return family_; }
    const std::map<std::string, double>& params() const { return params_; }
    double eval_scale() const { return scale_; }

private:
    DriftField() = default;
    void validate() const;

    Kind kind_ = Kind::Constant;
    double bound_ = 0.0;
    double lipschitz_ = 0.0;
    double constant_value_ = 0.0;
    std::vector<double> knot_r_;
    std::vector<double> knot_v_;
    std::string family_;
    std::map<std::string, double> params_;
    double scale_ = 1.0; // evaluation uses F(scale_ * r)
};

/// Truncated drift f_N(x) = F(|x|) / (|x| v 1/N) * u(x).
/// Agrees with the untruncated drift whenever |x| >= 1/N.
PointN truncated_drift(const PointN& x, const DriftField& field, double truncation);

/// (b - a) . u(b) for a in the closed 1/2-ball and 1 <= |b| <= 5/2.
/// The result is >= 1/2 over that whole domain; exposed so drift-projection
/// diagnostics can be logged per stage.
double radial_projection_bound(const PointN& a, const PointN& b);

/// Initial regions for the flow. Only the shapes the experiments use.
struct Region {
    enum class Kind { HalfSpace, BallComplement, LateralDisc, Cylinder };

    Kind kind = Kind::HalfSpace;
    int dimension = 1;

    // HalfSpace {x : x1 >= level}; lateral_radius is the truncation radius
    // of the boundary disc used for discretization.
    // LateralDisc {level} x B_{lateral_radius}(lateral_center).
    // Cylinder (level, level + delta) x B_delta(lateral_center).
    double level = 0.0;
    double lateral_radius = 0.0;
    double delta = 0.0;
    std::vector<double> lateral_center; // size dimension-1

    // BallComplement: complement of the ball of this radius about center.
    PointN center;
    double radius = 0.0;

    static Region half_space(int n, double level, double lateral_radius);
    static Region ball_complement(int n, PointN center, double radius);
    static Region lateral_disc(int n, double level, double radius,
                               std::vector<double> lateral_center = {});
    static Region cylinder(int n, const PointN& corner, double delta);

    /// Euclidean distance from the origin to the (closed) region.
    double distance_to_origin() const;
};

} // namespace flowlab

#endif
