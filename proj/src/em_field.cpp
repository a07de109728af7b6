#include "holopos/em_field.hpp"

#include <cmath>

namespace holopos::em_field {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
const std::complex<double> kI{0.0, 1.0};

}  // namespace

void validate(const DipoleSource& source) {
    const double norm =
        std::sqrt(source.t_x * source.t_x + source.t_y * source.t_y + source.t_z * source.t_z);
    if (std::abs(norm - 1.0) > 1e-12)
        throw std::invalid_argument("dipole orientation must be a unit vector");
    if (!(source.lambda > 0.0)) throw std::invalid_argument("wavelength must be positive");
    if (!(source.l_s > 0.0)) throw std::invalid_argument("dipole length must be positive");
    if (!(source.x_C > 0.0))
        throw std::invalid_argument("source must be strictly in front of the surface (x_C > 0)");
    if (!(source.Z0 > 0.0)) throw std::invalid_argument("impedance must be positive");
}

std::complex<double> chi(const DipoleSource& source) {
    if (!(source.lambda > 0.0)) throw std::invalid_argument("wavelength must be positive");
    return {source.Z0 * source.I_in * source.l_s / (2.0 * source.lambda), 0.0};
}

std::complex<double> green_scalar(double r, double k, double Z0) {
    if (!(r > 0.0)) throw DegenerateGeometry("green_scalar requires r > 0");
    return -kI * k * Z0 * std::exp(-kI * (k * r)) / (4.0 * kPi * r);
}

SphericalCoords spherical_from_point(const DipoleSource& source, double y, double z) {
    validate(source);
    const double dy = y - source.y_C;
    const double dz = z - source.z_C;
    const double r = std::sqrt(source.x_C * source.x_C + dy * dy + dz * dz);
    if (!(r > 0.0)) throw DegenerateGeometry("observation point coincides with the source");
    SphericalCoords c;
    c.r = r;
    c.theta = std::acos(dz / r);
    // Quadrant chosen so that r_hat(theta, phi) reproduces
    // (-x_C, y - y_C, z - z_C)/r componentwise.
    c.phi = std::atan2(dy, -source.x_C);
    return c;
}

SphericalBasis spherical_basis(double theta, double phi) {
    const double st = std::sin(theta), ct = std::cos(theta);
    const double sp = std::sin(phi), cp = std::cos(phi);
    SphericalBasis b;
    b.r_hat = {st * cp, st * sp, ct};
    b.theta_hat = {ct * cp, ct * sp, -st};
    b.phi_hat = {-sp, cp, 0.0};
    return b;
}

ComplexVec3 analytic_field(const DipoleSource& source, double y, double z) {
    validate(source);
    const double dy = y - source.y_C;
    const double dz = z - source.z_C;
    const double r = std::sqrt(source.x_C * source.x_C + dy * dy + dz * dz);
    if (!(r > 0.0)) throw DegenerateGeometry("observation point coincides with the source");
    const double rx = -source.x_C / r;
    const double ry = dy / r;
    const double rz = dz / r;
    const double rt = rx * source.t_x + ry * source.t_y + rz * source.t_z;
    const double k = source.k();
    const std::complex<double> amp = -kI * chi(source) * std::exp(-kI * (k * r)) / r;
    return {amp * (source.t_x - rt * rx), amp * (source.t_y - rt * ry),
            amp * (source.t_z - rt * rz)};
}

ComplexVec3 general_farfield(const std::function<std::complex<double>(double, double)>& R_theta,
                             const std::function<std::complex<double>(double, double)>& R_phi,
                             const SphericalCoords& coords, double k, double Z0) {
    const std::complex<double> G = green_scalar(coords.r, k, Z0);
    const std::complex<double> rt = R_theta(coords.theta, coords.phi);
    const std::complex<double> rp = R_phi(coords.theta, coords.phi);
    const SphericalBasis b = spherical_basis(coords.theta, coords.phi);
    return {G * (rt * b.theta_hat.x + rp * b.phi_hat.x),
            G * (rt * b.theta_hat.y + rp * b.phi_hat.y),
            G * (rt * b.theta_hat.z + rp * b.phi_hat.z)};
}

ComplexVec3 dyadic_green_field(const DipoleSource& source, double y, double z) {
    validate(source);
    const double px = -source.x_C;
    const double py = y - source.y_C;
    const double pz = z - source.z_C;
    const double r = std::sqrt(px * px + py * py + pz * pz);
    if (!(r > 0.0)) throw DegenerateGeometry("observation point coincides with the source");
    const double k = source.k();
    const double kr = k * r;
    // Dyadic kernel a*I - b*(p_hat p_hat^T) with the full near-field series.
    const std::complex<double> a = 1.0 - kI / kr - 1.0 / (kr * kr);
    const std::complex<double> b = 1.0 - 3.0 * kI / kr - 3.0 / (kr * kr);
    const std::complex<double> g = std::exp(-kI * kr) / (4.0 * kPi * r);
    const double ux = px / r, uy = py / r, uz = pz / r;
    const double ut = ux * source.t_x + uy * source.t_y + uz * source.t_z;
    const std::complex<double> scale = -kI * k * source.Z0 * source.I_in * source.l_s * g;
    return {scale * (a * source.t_x - b * ut * ux), scale * (a * source.t_y - b * ut * uy),
            scale * (a * source.t_z - b * ut * uz)};
}

std::complex<double> hu_scalar_signal(const DipoleSource& source, double y, double z,
                                      bool with_angle_factor) {
    validate(source);
    const SphericalCoords c = spherical_from_point(source, y, z);
    const std::complex<double> G = green_scalar(c.r, source.k(), source.Z0);
    return with_angle_factor ? G * std::sqrt(source.x_C / c.r) : G;
}

namespace {

// Common geometry of the center-expansion models: distance r_C from source to
// the surface center, and the projection of the in-plane offset d = (0, y, z)
// on the propagation direction rC_hat = (-x_C, -y_C, -z_C)/r_C.
struct CenterExpansion {
    double r_C;
    double d_par;   // rC_hat . d
    double d2;      // |d|^2
};

CenterExpansion center_expansion(const DipoleSource& source, double y, double z) {
    validate(source);
    const double r_C = std::sqrt(source.x_C * source.x_C + source.y_C * source.y_C +
                                 source.z_C * source.z_C);
    if (!(r_C > 0.0)) throw DegenerateGeometry("source coincides with the surface center");
    CenterExpansion ce;
    ce.r_C = r_C;
    ce.d_par = (-source.y_C * y - source.z_C * z) / r_C;
    ce.d2 = y * y + z * z;
    return ce;
}

}  // namespace

std::complex<double> planar_signal(const DipoleSource& source, double y, double z) {
    const CenterExpansion ce = center_expansion(source, y, z);
    const double k = source.k();
    return green_scalar(ce.r_C, k, source.Z0) * std::exp(-kI * (k * ce.d_par));
}

std::complex<double> fresnel_signal(const DipoleSource& source, double y, double z) {
    const CenterExpansion ce = center_expansion(source, y, z);
    const double k = source.k();
    // d^2 - d_par^2 = sin^2(psi) |d|^2; written this way it stays exact at d=0.
    const double phase = ce.d_par + (ce.d2 - ce.d_par * ce.d_par) / (2.0 * ce.r_C);
    return green_scalar(ce.r_C, k, source.Z0) * std::exp(-kI * (k * phase));
}

}  // namespace holopos::em_field
