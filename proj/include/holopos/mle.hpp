#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "holopos/em_field.hpp"

namespace holopos::mle {

// ---------------------------------------------------------------------------
// Receive-dipole grid
// ---------------------------------------------------------------------------

struct EmptyGrid : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Square grid of short vertical receive dipoles filling the observation
// surface. Element centers sit at (0, m*lambda/2, n*lambda/2) for integer
// indices 1 <= |m|,|n| <= n_r (index 0 excluded), so the grid has (2*n_r)^2
// elements. Elements are stored row-major over m in (-n_r..-1, 1..n_r) and n
// in the same order; index_of() maps an (m, n) pair to the storage slot.
struct ReceiverGrid {
    std::vector<double> y;  // element centers, meters, aligned with z/m/n
    std::vector<double> z;
    std::vector<int> m_index;
    std::vector<int> n_index;
    double l_r;     // element length, meters (<= lambda/10)
    double lambda;  // carrier wavelength, meters
    int n_r;        // index bound: floor(L / lambda)

    std::size_t size() const { return y.size(); }
};

// Throws EmptyGrid when floor(L/lambda) < 1 and std::invalid_argument when
// l_r is non-positive or exceeds lambda/10.
ReceiverGrid build_grid(double L, double lambda, double l_r);

// Storage slot of element (m, n); m and n must be nonzero with |m|,|n| <= n_r.
std::size_t index_of(const ReceiverGrid& grid, int m, int n);

// ---------------------------------------------------------------------------
// Voltage synthesis
// ---------------------------------------------------------------------------

// Complex voltages observed at the grid elements: V_mn = l_r e_z(r_mn) + nu_mn
// with nu_mn i.i.d. circularly-symmetric complex Gaussian of total variance
// sigma2_nu = 2 sigma2 l_r / lambda (sigma2_nu/2 per quadrature component).
struct VoltageField {
    std::vector<std::complex<double>> v;  // aligned with ReceiverGrid storage
    double sigma2_nu;
};

// Deterministic for a given seed: noise is generated by a fixed Box-Muller
// transform over std::mt19937_64 draws, independent of platform libraries.
VoltageField synthesize(const em_field::DipoleSource& source, const ReceiverGrid& grid,
                        double sigma2, std::uint64_t rng_seed);

// ---------------------------------------------------------------------------
// Likelihood models
// ---------------------------------------------------------------------------

// The three voltage models the estimators fit:
//   kAnalytic — l_r * e_z from the full dipole field (uses the trial
//               orientation as well as the trial position);
//   kHuScalar — l_r * I_in * l_s * G(r) sqrt(x/r), the scalar model with the
//               angle-of-arrival amplitude factor (position only);
//   kPlanar   — l_r * I_in * l_s * G(r_C) with a linear phase ramp across the
//               surface (position only).
// The scalar models' proportionality constant is exactly known: it carries the
// transmitter constants I_in * l_s so the on-axis amplitude matches the true
// field; neither model is penalized for amplitude ignorance.
enum class EstimatorKind { kAnalytic, kHuScalar, kPlanar };

// Amplitude constants of the transmitter treated as exactly known by every
// estimator (they fix the model's proportionality factor).
struct SourceConstants {
    double I_in;
    double l_s;
    double lambda;
    double Z0;

    static SourceConstants from(const em_field::DipoleSource& source);
};

// Model voltages h_mn at trial parameters, aligned with the grid storage.
// trial_t is ignored by kHuScalar and kPlanar; it must be a unit vector for
// kAnalytic. Requires trial_u.x > 0.
std::vector<std::complex<double>> model_voltages(EstimatorKind kind, const em_field::Vec3& trial_t,
                                                 const em_field::Vec3& trial_u,
                                                 const ReceiverGrid& grid,
                                                 const SourceConstants& constants);

// -sum |V_mn - h_mn|^2 for a precomputed model vector.
double log_likelihood(const VoltageField& observed, const std::vector<std::complex<double>>& model);

// -sum |V_mn - h_mn|^2 with h evaluated at the trial parameters.
double log_likelihood(EstimatorKind kind, const em_field::Vec3& trial_t,
                      const em_field::Vec3& trial_u, const VoltageField& observed,
                      const ReceiverGrid& grid, const SourceConstants& constants);

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

// Axis-aligned search region for the position estimate.
struct SearchBox {
    em_field::Vec3 lo;
    em_field::Vec3 hi;
};

struct OptimizerSettings {
    int coarse_per_axis = 9;        // coarse position grid, points per axis
    int n_theta = 8;                // orientation hypotheses: polar angle count
    int n_phi = 16;                 // orientation hypotheses: azimuth count
    double fine_x_step_fraction = 0.125;  // dense x scan step in wavelengths; 0 disables
    int multistarts = 3;            // simplex refinements from the best candidates
    double rel_tol = 1e-8;          // relative cost spread that ends refinement
    double size_tol = 1e-8;         // simplex coordinate spread that also ends it
    int max_iterations = 2000;      // simplex iteration cap per start
};

struct MleConfig {
    EstimatorKind estimator = EstimatorKind::kAnalytic;
    bool orientation_known = false;           // kAnalytic only
    em_field::Vec3 known_orientation{0.0, 0.0, 1.0};
    SearchBox box{};
    int trials = 200;
    std::uint64_t seed = 0;
    OptimizerSettings optimizer{};
    int workers = 0;  // 0 = hardware concurrency
};

struct TrialResult {
    em_field::Vec3 u_hat{};  // position estimate, meters
    // Orientation estimate for kAnalytic with unknown orientation,
    // canonicalized to t_x >= 0 (then t_z >= 0, then t_y >= 0) since the sign
    // of the orientation only flips the global phase. Echoes the known
    // orientation for kAnalytic with orientation_known; zero for the
    // orientation-free scalar models.
    em_field::Vec3 t_hat{};
    double log_lik = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Maximizes the chosen model's likelihood over the search box (and over the
// orientation half-sphere t_x >= 0 when it is unknown): multi-start coarse
// grid, a dense scan along x at the most promising transverse positions, then
// derivative-free simplex refinement. Throws NoConvergence when no start
// reaches the relative-cost tolerance within the iteration cap.
TrialResult estimate(EstimatorKind kind, const VoltageField& observed, const ReceiverGrid& grid,
                     const SourceConstants& constants, const MleConfig& config);

// ---------------------------------------------------------------------------
// Monte-Carlo benchmark
// ---------------------------------------------------------------------------

// Ground-truth setup for a benchmark run; the grid is rebuilt from (L,
// source.lambda, l_r) and voltages are drawn with field-noise variance sigma2.
struct Scenario {
    em_field::DipoleSource source;
    double L;      // observation surface side, meters
    double l_r;    // receive element length, meters
    double sigma2; // continuous field noise variance
};

struct RmseSummary {
    std::array<double, 3> rmse{};  // per coordinate, meters, over converged trials
    int trials = 0;                // attempted
    int convergence_failures = 0;  // excluded from the RMSE
    std::vector<TrialResult> trial_results;  // in trial order (failed slots flagged)
};

// Runs config.trials independent trials; trial t draws its noise from seed
// XOR t, so results are reproducible and identical for any worker count.
RmseSummary monte_carlo(const MleConfig& config, const Scenario& scenario);

// ---------------------------------------------------------------------------
// z-component Cramer-Rao bounds
// ---------------------------------------------------------------------------

// Position CRBs (orientation known) when only the z-component of the field is
// observed: the 3x3 Fisher matrix uses just the e_z derivative row.
// Continuous variant: (2/sigma2) * integral over the surface.
std::array<double, 3> crb_z_component(const em_field::DipoleSource& source,
                                      const em_field::ObservationSurface& surface, double sigma2);

// Discrete variant over the receive grid with per-element noise variance
// sigma2_nu = 2 sigma2 l_r / lambda: (2 l_r^2 / sigma2_nu) * sum over elements.
std::array<double, 3> crb_z_component(const em_field::DipoleSource& source,
                                      const ReceiverGrid& grid, double sigma2);

}  // namespace holopos::mle
