#pragma once

#include <string>
#include <vector>

#include "csv_output.hpp"
#include "holopos/em_field.hpp"
#include "holopos/quadrature.hpp"

namespace holopos::cli {

// Scenario and noise description shared by every subcommand.  The noise level
// can be given either as an SNR (the transmitter constants are then normalized
// so that the field amplitude constant chi equals 1 volt) or as an explicit
// noise variance together with the physical transmitter constants; the two
// routes cannot be mixed, and with no noise flags the default SNR applies.
struct RunConfig {
    // Geometry (meters) and orientation (unit vector).
    double x_C = 6.0;
    double y_C = 0.0;
    double z_C = 0.0;
    double t_x = 0.0;
    double t_y = 0.0;
    double t_z = 1.0;
    double lambda = 0.01;

    // Route 1: SNR in dB, defined as 10 log10(2 |chi|^2 / sigma^2).
    double snr_db = 10.0;
    bool snr_given = false;

    // Route 2: explicit noise variance plus transmitter constants.
    double sigma2 = 0.0;
    bool sigma2_given = false;
    double I_in = 1.0;
    bool I_in_given = false;
    double l_s = 0.0;  // 0 means "default to lambda/4"
    bool l_s_given = false;

    // Quadrature tolerances forwarded to the integration routines.
    double quad_rel_tol = 1e-9;
    double quad_abs_tol = 1e-12;

    std::string out_path;  // empty = stdout
};

// The fully resolved scenario: a valid source and a noise variance consistent
// with the requested SNR convention.
struct ResolvedScenario {
    em_field::DipoleSource source;
    double sigma2 = 0.0;
    double snr_linear = 0.0;  // 2 |chi|^2 / sigma^2
};

// Applies the exactly-one-route rule and builds the source.  Throws
// std::invalid_argument with an actionable message on violations.
ResolvedScenario resolve_scenario(const RunConfig& config);

quadrature::QuadTols quad_tols(const RunConfig& config);

// Sweeps must be non-empty and strictly increasing; `name` appears in the
// error message.
void require_strictly_increasing(const std::vector<double>& values, const std::string& name);

// Writes the metadata block common to every subcommand: tool and format
// versions, the command name, scenario parameters, and the noise level in both
// SNR conventions (with and without the factor 2).
void write_common_metadata(CsvWriter& csv, const std::string& command, const RunConfig& config,
                           const ResolvedScenario& scenario);

}  // namespace holopos::cli
