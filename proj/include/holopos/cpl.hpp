#pragma once

#include <array>
#include <utility>

#include "holopos/fim.hpp"
#include "holopos/quadrature.hpp"

namespace holopos::cpl {

// Parameters of the centered-vertical-dipole geometry: the source sits on the
// line through the surface center, perpendicular to it, at depth x_C, with
// rho = L / x_C and SNR = 2 |chi|^2 / sigma^2.
struct CplParams {
    double rho;
    double k;
    double x_C;
    double snr;
};

// The ten dimensionless surface integrals that the closed-form Fisher entries
// are built from. I1, I6 and I9 are evaluated from their closed forms; the
// rest by adaptive quadrature of their integrands over [-rho/2, rho/2]^2.
struct ScriptIntegrals {
    double i1, i2, i3, i4, i5, i6, i7, i8, i9, i10;
    double quad_error_bound;  // summed absolute quadrature error estimates
};

// Closed-form bounds on the [F_t] diagonal integrals, from inscribed and
// circumscribed disks of the normalized half-side a = rho/2 (the convention
// under which quadrature is bracketed at every tested rho).
struct FtElementBounds {
    double lb11, ub11;  // bracket the integral of (u^2+v^2)/(1+u^2+v^2)^2
    double lb22, ub22;  // bracket the integral of (1+u^2)/(1+u^2+v^2)^2
};

// Diagonal/sparse Fisher blocks of the centered vertical dipole.
struct CplFimBlocks {
    std::array<double, 3> f_cc_diag;  // (x_C, y_C, z_C), units 1/m^2
    std::array<double, 3> f_tt_diag;  // (t_x, t_y, t_z), dimensionless
    double f_tc_13;                   // (t_x, z_C) coupling, 1/m
    double f_tc_31;                   // (t_z, x_C) coupling, 1/m
};

// Depth/lateral bounds in the high-frequency regime x_C >> lambda; regime_ok
// is false (a warning, not an error) when x_C / lambda < 100.
struct HighFreqCrb {
    double crb_x;
    double crb_y;
    bool regime_ok;
};

// Memoized on (rho, tolerances); safe for concurrent callers.
ScriptIntegrals script_integrals(double rho, const quadrature::QuadTols& tols = {});

// Closed-form disk bounds bracketing the third integral (value via the
// inscribed/circumscribed disks of radius a and a*sqrt(2), a = rho/2).
std::pair<double, double> i3_bounds(double rho);

FtElementBounds ft_element_bounds(double rho);

CplFimBlocks fim_blocks_cpl(const CplParams& p, const quadrature::QuadTols& tols = {});

// All six position bounds plus diagnostics, from the closed-form rational
// expressions in (SNR, k, x_C) and the script integrals.
fim::CrbReport crb_cpl(const CplParams& p, const quadrature::QuadTols& tols = {});

HighFreqCrb crb_highfreq(const CplParams& p, const quadrature::QuadTols& tols = {});

// Parameter-free limits of the bounds as rho -> infinity:
//   CRB(x_C) -> lambda^2 / (SNR 3 pi^3),
//   CRB(y_C) * ln(rho) -> lambda^2 / (SNR 3 pi^3),
//   CRB(z_C) * ln(rho) -> lambda^2 / (SNR pi^3);
// returned as the finite-rho evaluations of these expressions (pure algebra,
// no regime guard).
std::array<double, 3> crb_asymptotic(double lambda, double snr, double rho);

}  // namespace holopos::cpl
