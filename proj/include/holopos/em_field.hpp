#pragma once

#include <complex>
#include <functional>
#include <stdexcept>

namespace holopos::em_field {

inline constexpr double kFreeSpaceImpedanceOhm = 376.730313668;

// Hertzian dipole transmitter. The observation surface lies in the x=0 plane,
// so x_C > 0 places the source strictly in front of it.
struct DipoleSource {
    double x_C;          // centroid, meters
    double y_C;
    double z_C;
    double t_x;          // unit orientation vector
    double t_y;
    double t_z;
    double I_in = 1.0;   // feed current, amperes
    double l_s;          // dipole length, meters
    double lambda;       // wavelength, meters
    double Z0 = kFreeSpaceImpedanceOhm;  // medium impedance, ohms

    double k() const { return 2.0 * 3.141592653589793238462643383279502884 / lambda; }
};

// Square observation region centered at the origin of the x=0 plane.
struct ObservationSurface {
    double L;  // side length, meters
};

struct SphericalCoords {
    double r;      // meters, > 0
    double theta;  // (0, pi)
    double phi;    // (-pi, pi]
};

struct ComplexVec3 {
    std::complex<double> ex;
    std::complex<double> ey;
    std::complex<double> ez;
};

struct Vec3 {
    double x;
    double y;
    double z;
};

// Orthonormal spherical basis attached to (theta, phi).
struct SphericalBasis {
    Vec3 r_hat;
    Vec3 theta_hat;
    Vec3 phi_hat;
};

struct DegenerateGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Throws std::invalid_argument when a source violates its invariants
// (non-unit orientation beyond 1e-12, non-positive lambda/l_s/x_C).
void validate(const DipoleSource& source);

// chi = Z0 * I_in * l_s / (2 lambda); the single amplitude constant of the
// dipole field, in volts.
std::complex<double> chi(const DipoleSource& source);

// Scalar spherical-wave kernel G(r) = -i k Z0 e^{-ikr} / (4 pi r).
std::complex<double> green_scalar(double r, double k, double Z0);

// Spherical coordinates of the observation point (0, y, z) as seen from the
// source, oriented so that the radial unit vector points from the source
// toward the surface: r_hat = (-x_C, y - y_C, z - z_C)/r.
SphericalCoords spherical_from_point(const DipoleSource& source, double y, double z);

SphericalBasis spherical_basis(double theta, double phi);

// Far-field dipole model: e_a = -i chi (e^{-ikr}/r) [t_a - (r_hat . t) r_a].
ComplexVec3 analytic_field(const DipoleSource& source, double y, double z);

// Field of an arbitrary radiation vector given by its transverse components:
//   e = G(r) * (R_theta theta_hat + R_phi phi_hat).
ComplexVec3 general_farfield(const std::function<std::complex<double>(double, double)>& R_theta,
                             const std::function<std::complex<double>(double, double)>& R_phi,
                             const SphericalCoords& coords, double k, double Z0);

// Exact field of the point dipole through the dyadic Green's function,
// including the 1/(kr) and 1/(kr)^2 near-field terms.
ComplexVec3 dyadic_green_field(const DipoleSource& source, double y, double z);

// Scalar model with angle-of-arrival amplitude factor:
//   s = G(r) sqrt(x_C / r).
// Passing with_angle_factor = false degenerates to the bare spherical wave
// G(r) (the pure spherical-wave literature model).
std::complex<double> hu_scalar_signal(const DipoleSource& source, double y, double z,
                                      bool with_angle_factor = true);

// Planar approximation around the surface center: the spherical wave from the
// source is replaced by G(r_C) with a linear phase in the in-plane offset d,
//   s = G(r_C) e^{-ik (rC_hat . d)},   d = (0, y, z).
std::complex<double> planar_signal(const DipoleSource& source, double y, double z);

// Fresnel approximation: planar phase plus the quadratic correction
//   e^{-ik (d^2 - (rC_hat . d)^2) / (2 r_C)}.
std::complex<double> fresnel_signal(const DipoleSource& source, double y, double z);

}  // namespace holopos::em_field
