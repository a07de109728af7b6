#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "holopos/em_field.hpp"
#include "holopos/quadrature.hpp"

namespace holopos::fim {

// Condition-number cap for the 3x3 information blocks; beyond this the bound
// values are numerically meaningless and SingularInformation is thrown.
inline constexpr double kConditionCap = 1e12;

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3d = std::array<double, 3>;

// 3x6 complex matrix of field derivatives. Rows are the cartesian field
// components (e_x, e_y, e_z); columns the parameters in the fixed order
// (t_x, t_y, t_z, x_C, y_C, z_C).
struct FieldJacobian {
    std::array<std::array<std::complex<double>, 6>, 3> d{};
};

// 6x6 real symmetric Fisher information matrix over the same parameter order.
// Orientation entries are dimensionless, position entries carry 1/m^2, and the
// mixed block carries 1/m; length_scale (set to x_C on assembly) is used to
// balance the blocks before any inversion.
struct FisherMatrix {
    std::array<std::array<double, 6>, 6> m{};
    double sigma2 = 1.0;
    double length_scale = 1.0;
    double quad_error_bound = 0.0;  // summed absolute quadrature error estimates
    std::size_t quad_cells = 0;

    Mat3 block_tt() const;  // orientation-orientation (rows/cols 0..2)
    Mat3 block_tc() const;  // orientation-position (rows 0..2, cols 3..5)
    Mat3 block_cc() const;  // position-position (rows/cols 3..5)
};

struct CrbReport {
    Vec3d crb_known{};    // m^2, orientation treated as known
    Vec3d crb_unknown{};  // m^2, orientation as nuisance parameters
    Vec3d delta_rcrb{};   // dimensionless relative loss per axis
    double cond_tt = 0.0;
    double cond_cc = 0.0;
    double cond_schur = 0.0;
    double quad_error_bound = 0.0;
};

// An information block is too ill-conditioned to invert meaningfully.
struct SingularInformation : std::runtime_error {
    SingularInformation(const std::string& which, double condition_number)
        : std::runtime_error(which + " block is numerically singular (condition number " +
                             std::to_string(condition_number) + ")"),
          condition_number(condition_number) {}
    double condition_number;
};

// Closed-form derivatives of the dipole field at the surface point (0, y, z)
// with respect to all six parameters.
FieldJacobian field_jacobian(const em_field::DipoleSource& source, double y, double z);

// [F]_mn = (2/sigma2) * Re{ integral over the surface of
//          sum_a  de_a/dp_m * conj(de_a/dp_n) }  dy dz.
// The upper triangle is integrated (21 adaptive quadratures) and mirrored.
FisherMatrix assemble_fim(const em_field::DipoleSource& source,
                          const em_field::ObservationSurface& surface, double sigma2,
                          const quadrature::QuadTols& tols = {});

// diag(F_cc^{-1}): position bounds when the orientation is known.
Vec3d crb_known(const FisherMatrix& F);

// diag((F_cc - F_tc^T F_tt^{-1} F_tc)^{-1}): position bounds with unknown
// orientation, via the Schur-complement path (solves on 3x3 blocks only).
Vec3d crb_unknown(const FisherMatrix& F);

// Maximum relative disagreement across the three diagonal entries between the
// Schur-complement form and its matrix-inversion-lemma expansion
//   [F_cc^{-1}]_ii + [F_cc^{-1} F_tc^T (F_tt - F_tc F_cc^{-1} F_tc^T)^{-1}
//                     F_tc F_cc^{-1}]_ii.
// Contract: <= 1e-8 for well-conditioned inputs.
double mil_residual(const FisherMatrix& F);

// sqrt((CRB_u - CRB)/CRB) per axis; a component whose difference underflows
// (negative by roundoff) is reported as 0.
Vec3d delta_rcrb(const FisherMatrix& F);

// Bundle of all bound quantities plus conditioning diagnostics.
CrbReport crb_report(const FisherMatrix& F);

}  // namespace holopos::fim
