#include "run_config.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace holopos::cli {

ResolvedScenario resolve_scenario(const RunConfig& config) {
    const bool chi_route = config.sigma2_given;
    const bool chi_params_given = config.I_in_given || config.l_s_given;
    if (config.snr_given && (chi_route || chi_params_given))
        throw std::invalid_argument(
            "give exactly one noise description: either --snr-db alone, or --sigma2 with "
            "optional --i-in/--l-s (the two routes cannot be mixed)");
    if (!config.snr_given && !chi_route && chi_params_given)
        throw std::invalid_argument(
            "--i-in/--l-s describe the explicit-variance route and require --sigma2");
    // With no noise flags at all, the default SNR applies (route 1).

    ResolvedScenario out;
    em_field::DipoleSource& s = out.source;
    s.x_C = config.x_C;
    s.y_C = config.y_C;
    s.z_C = config.z_C;
    s.t_x = config.t_x;
    s.t_y = config.t_y;
    s.t_z = config.t_z;
    s.lambda = config.lambda;
    s.Z0 = em_field::kFreeSpaceImpedanceOhm;
    s.l_s = config.l_s_given ? config.l_s : config.lambda / 4.0;

    if (chi_route) {
        if (!(config.sigma2 > 0.0))
            throw std::invalid_argument("--sigma2 must be positive");
        s.I_in = config.I_in_given ? config.I_in : 1.0;
        out.sigma2 = config.sigma2;
    } else {
        // Normalize the amplitude constant chi = Z0 I_in l_s / (2 lambda) to 1 V.
        s.I_in = 2.0 * s.lambda / (s.Z0 * s.l_s);
        const double snr_linear = std::pow(10.0, config.snr_db / 10.0);
        if (!(snr_linear > 0.0)) throw std::invalid_argument("SNR must be finite");
        out.sigma2 = 2.0 / snr_linear;
    }
    em_field::validate(s);

    const double chi_mag = std::abs(em_field::chi(s));
    out.snr_linear = 2.0 * chi_mag * chi_mag / out.sigma2;
    return out;
}

quadrature::QuadTols quad_tols(const RunConfig& config) {
    quadrature::QuadTols tols;
    tols.rel_tol = config.quad_rel_tol;
    tols.abs_tol = config.quad_abs_tol;
    return tols;
}

void require_strictly_increasing(const std::vector<double>& values, const std::string& name) {
    if (values.empty())
        throw std::invalid_argument(name + " must contain at least one value");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1]))
            throw std::invalid_argument(name + " must be strictly increasing (entry " +
                                        std::to_string(i + 1) + " is " +
                                        format_number(values[i]) + " after " +
                                        format_number(values[i - 1]) + ")");
}

void write_common_metadata(CsvWriter& csv, const std::string& command, const RunConfig& config,
                           const ResolvedScenario& scenario) {
    csv.add_metadata("tool_version", kToolVersion);
    csv.add_metadata("format_version", kFormatVersion);
    csv.add_metadata("command", command);
    csv.add_metadata("x_C_m", scenario.source.x_C);
    csv.add_metadata("y_C_m", scenario.source.y_C);
    csv.add_metadata("z_C_m", scenario.source.z_C);
    csv.add_metadata("t_x", scenario.source.t_x);
    csv.add_metadata("t_y", scenario.source.t_y);
    csv.add_metadata("t_z", scenario.source.t_z);
    csv.add_metadata("lambda_m", scenario.source.lambda);
    csv.add_metadata("l_s_m", scenario.source.l_s);
    csv.add_metadata("I_in_A", scenario.source.I_in);
    csv.add_metadata("Z0_ohm", scenario.source.Z0);
    csv.add_metadata("sigma2_V2_per_m2", scenario.sigma2);
    const double chi_mag = std::abs(em_field::chi(scenario.source));
    csv.add_metadata("chi_V", chi_mag);
    // Both SNR conventions found in the literature: with and without the
    // factor 2 in front of |chi|^2.
    csv.add_metadata("snr_db_two_chi2_over_sigma2", 10.0 * std::log10(scenario.snr_linear));
    csv.add_metadata("snr_db_chi2_over_sigma2", 10.0 * std::log10(scenario.snr_linear / 2.0));
    csv.add_metadata("quad_rel_tol", config.quad_rel_tol);
    csv.add_metadata("quad_abs_tol", config.quad_abs_tol);
}

}  // namespace holopos::cli
