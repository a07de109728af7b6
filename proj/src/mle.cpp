#include "holopos/mle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <utility>

#include "holopos/fim.hpp"
#include "holopos/quadrature.hpp"

namespace holopos::mle {

namespace {

using em_field::DipoleSource;
using em_field::Vec3;
using std::complex;

constexpr double kPi = 3.141592653589793238462643383279502884;

DipoleSource trial_source(const SourceConstants& c, const Vec3& t, const Vec3& u) {
    DipoleSource s;
    s.x_C = u.x;
    s.y_C = u.y;
    s.z_C = u.z;
    s.t_x = t.x;
    s.t_y = t.y;
    s.t_z = t.z;
    s.I_in = c.I_in;
    s.l_s = c.l_s;
    s.lambda = c.lambda;
    s.Z0 = c.Z0;
    return s;
}

// Single-element model voltage; synthesize() and every likelihood path share
// this so a noiseless observation matches its own model bit for bit. The
// scalar models carry the exactly-known proportionality constant I_in * l_s
// (their on-axis amplitude then matches the true field's).
complex<double> model_voltage_at(EstimatorKind kind, const DipoleSource& s, double y, double z,
                                 double l_r) {
    switch (kind) {
        case EstimatorKind::kAnalytic:
            return l_r * em_field::analytic_field(s, y, z).ez;
        case EstimatorKind::kHuScalar:
            return l_r * s.I_in * s.l_s * em_field::hu_scalar_signal(s, y, z);
        case EstimatorKind::kPlanar:
            return l_r * s.I_in * s.l_s * em_field::planar_signal(s, y, z);
    }
    throw std::invalid_argument("unknown estimator kind");
}

// Uniform double in (0, 1]: 53 random bits, shifted away from zero so that
// log() below is always finite. Implemented directly (instead of the
// library's distributions) so streams are identical across platforms.
double uniform_unit(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 1.0) * 0x1p-53;
}

// One circularly-symmetric complex standard normal via the Box-Muller map.
complex<double> complex_standard_normal(std::mt19937_64& gen) {
    const double u1 = uniform_unit(gen);
    const double u2 = uniform_unit(gen);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return {radius * std::cos(2.0 * kPi * u2), radius * std::sin(2.0 * kPi * u2)};
}

Vec3 angles_to_orientation(double theta, double phi) {
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

// The orientation sign only flips the model's global phase (the search runs
// on the half-sphere t_x >= 0), so estimates are reported with t_x >= 0,
// breaking ties toward t_z >= 0 and then t_y >= 0.
Vec3 canonicalize_orientation(Vec3 t) {
    const bool flip =
        t.x < 0.0 || (t.x == 0.0 && (t.z < 0.0 || (t.z == 0.0 && t.y < 0.0)));
    if (flip) {
        t.x = -t.x;
        t.y = -t.y;
        t.z = -t.z;
    }
    return t;
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

Vec3 clamp_to_box(const Vec3& u, const SearchBox& box) {
    return {clamp(u.x, box.lo.x, box.hi.x), clamp(u.y, box.lo.y, box.hi.y),
            clamp(u.z, box.lo.z, box.hi.z)};
}

// Likelihood evaluation engine for one observation. Positions are clamped to
// the search box so the optimizer can roam freely while every evaluation
// stays in the admissible region.
class Objective {
  public:
    Objective(EstimatorKind kind, const VoltageField& observed, const ReceiverGrid& grid,
              const SourceConstants& constants, const SearchBox& box)
        : kind_(kind), v_(observed), grid_(grid), constants_(constants), box_(box) {
        norm_v2_ = 0.0;
        for (const auto& vi : v_.v) norm_v2_ += std::norm(vi);
    }

    double log_lik(const Vec3& u, const Vec3& t) const {
        const DipoleSource s = trial_source(constants_, t, clamp_to_box(u, box_));
        double acc = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i)
            acc += std::norm(v_.v[i] -
                             model_voltage_at(kind_, s, grid_.y[i], grid_.z[i], grid_.l_r));
        return -acc;
    }

    // Best orientation hypothesis on an n_theta x n_phi half-sphere grid (plus
    // the vertical pole). The model is linear in the orientation, so three
    // basis field maps give the likelihood of every hypothesis:
    //   -|V - H t|^2 = -|V|^2 + 2 t.Re(S) - t^T Q t,
    // with S_b = sum_i V_i conj(H_ib) and Q_bg = Re sum_i H_ib conj(H_ig).
    std::pair<double, Vec3> best_orientation(const Vec3& u, int n_theta, int n_phi) const {
        const Vec3 uc = clamp_to_box(u, box_);
        const DipoleSource s = trial_source(constants_, Vec3{0.0, 0.0, 1.0}, uc);
        const complex<double> chi_v = em_field::chi(s);
        const double k = s.k();

        complex<double> S[3] = {};
        double Q[3][3] = {};
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const double xb = -uc.x;
            const double yb = grid_.y[i] - uc.y;
            const double zb = grid_.z[i] - uc.z;
            const double r = std::sqrt(xb * xb + yb * yb + zb * zb);
            const complex<double> g = complex<double>(0.0, -1.0) * chi_v *
                                      std::exp(complex<double>(0.0, -k * r)) / r *
                                      grid_.l_r;
            const double rx = xb / r, ry = yb / r, rz = zb / r;
            // z-component of the field of the three cartesian unit moments.
            const complex<double> h[3] = {g * (-rx * rz), g * (-ry * rz),
                                          g * (1.0 - rz * rz)};
            for (int b = 0; b < 3; ++b) {
                S[b] += v_.v[i] * std::conj(h[b]);
                for (int c = b; c < 3; ++c) Q[b][c] += (h[b] * std::conj(h[c])).real();
            }
        }
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < b; ++c) Q[b][c] = Q[c][b];

        double best = -std::numeric_limits<double>::infinity();
        Vec3 best_t{0.0, 0.0, 1.0};
        auto consider = [&](const Vec3& t) {
            double quad = 0.0, lin = 0.0;
            const double tv[3] = {t.x, t.y, t.z};
            for (int b = 0; b < 3; ++b) {
                lin += tv[b] * S[b].real();
                for (int c = 0; c < 3; ++c) quad += tv[b] * Q[b][c] * tv[c];
            }
            const double ll = -norm_v2_ + 2.0 * lin - quad;
            if (ll > best) {
                best = ll;
                best_t = t;
            }
        };
        consider(Vec3{0.0, 0.0, 1.0});
        for (int i = 0; i < n_theta; ++i) {
            const double theta = kPi * (i + 0.5) / n_theta;
            for (int j = 0; j < n_phi; ++j) {
                const double phi = -kPi / 2.0 + kPi * (j + 0.5) / n_phi;
                consider(angles_to_orientation(theta, phi));
            }
        }
        return {best, best_t};
    }

    const SearchBox& box() const { return box_; }

  private:
    EstimatorKind kind_;
    const VoltageField& v_;
    const ReceiverGrid& grid_;
    const SourceConstants& constants_;
    SearchBox box_;
    double norm_v2_;
};

struct Candidate {
    Vec3 u;
    Vec3 t;
    double ll;
};

struct SimplexOutcome {
    std::vector<double> point;
    double value;  // maximized log-likelihood
    bool converged;
    int iterations;
};

// Nelder-Mead ascent of f (maximization) from a start point with per-axis
// initial steps; stops when the simplex's cost spread falls below
// rel_tol * |best| or its coordinate spread falls below size_tol (the latter
// handles near-perfect fits, where the cost tends to zero and a relative
// criterion alone would never trigger).
SimplexOutcome nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           const std::vector<double>& start, const std::vector<double>& steps,
                           double rel_tol, double size_tol, int max_iterations) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> val(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += steps[i];
    for (std::size_t i = 0; i <= n; ++i) val[i] = -f(pts[i]);  // minimize val

    const double alpha = 1.0, gamma = 2.0, beta = 0.5, delta = 0.5;
    int iter = 0;
    bool converged = false;
    std::vector<std::size_t> order(n + 1);
    for (; iter < max_iterations; ++iter) {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        double coord_spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t d = 0; d < n; ++d)
                coord_spread = std::max(coord_spread, std::abs(pts[i][d] - pts[best][d]));
        if (std::abs(val[worst] - val[best]) <= rel_tol * std::abs(val[best]) ||
            coord_spread <= size_tol) {
            converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
        }
        for (std::size_t d = 0; d < n; ++d) centroid[d] /= static_cast<double>(n);

        auto blend = [&](double coeff) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d)
                p[d] = centroid[d] + coeff * (pts[worst][d] - centroid[d]);
            return p;
        };

        const std::vector<double> refl = blend(-alpha);
        const double f_refl = -f(refl);
        if (f_refl < val[order[0]]) {
            const std::vector<double> expd = blend(-gamma);
            const double f_expd = -f(expd);
            if (f_expd < f_refl) {
                pts[worst] = expd;
                val[worst] = f_expd;
            } else {
                pts[worst] = refl;
                val[worst] = f_refl;
            }
        } else if (f_refl < val[second]) {
            pts[worst] = refl;
            val[worst] = f_refl;
        } else {
            const bool outside = f_refl < val[worst];
            const std::vector<double> ctr = blend(outside ? -beta : beta);
            const double f_ctr = -f(ctr);
            if (f_ctr < (outside ? f_refl : val[worst])) {
                pts[worst] = ctr;
                val[worst] = f_ctr;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        pts[i][d] = pts[best][d] + delta * (pts[i][d] - pts[best][d]);
                    val[i] = -f(pts[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (val[i] < val[best]) best = i;
    return {pts[best], -val[best], converged, iter};
}

void validate_box(const SearchBox& box) {
    if (!(box.lo.x <= box.hi.x && box.lo.y <= box.hi.y && box.lo.z <= box.hi.z))
        throw std::invalid_argument("search box is empty");
    if (!(box.lo.x > 0.0))
        throw std::invalid_argument("search box must keep the source in front of the surface");
}

void validate_unit(const Vec3& t) {
    const double n2 = t.x * t.x + t.y * t.y + t.z * t.z;
    if (std::abs(n2 - 1.0) > 1e-10)
        throw std::invalid_argument("orientation must be a unit vector");
}

std::array<double, 3> invert3_diagonal(const Eigen::Matrix3d& F, const char* which) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(F, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().cwiseAbs().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    const double cond = lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo;
    if (!(cond < fim::kConditionCap)) throw fim::SingularInformation(which, cond);
    const Eigen::Matrix3d inv = F.ldlt().solve(Eigen::Matrix3d::Identity());
    return {inv(0, 0), inv(1, 1), inv(2, 2)};
}

}  // namespace

ReceiverGrid build_grid(double L, double lambda, double l_r) {
    if (!(lambda > 0.0)) throw std::invalid_argument("wavelength must be positive");
    if (!(l_r > 0.0)) throw std::invalid_argument("element length must be positive");
    if (l_r > lambda / 10.0)
        throw std::invalid_argument("element length must satisfy l_r <= lambda/10");
    const int n_r = static_cast<int>(std::floor(L / lambda));
    if (n_r < 1) throw EmptyGrid("surface side must exceed one wavelength");

    ReceiverGrid grid;
    grid.l_r = l_r;
    grid.lambda = lambda;
    grid.n_r = n_r;
    const std::size_t side = 2 * static_cast<std::size_t>(n_r);
    grid.y.reserve(side * side);
    grid.z.reserve(side * side);
    grid.m_index.reserve(side * side);
    grid.n_index.reserve(side * side);
    for (int m = -n_r; m <= n_r; ++m) {
        if (m == 0) continue;
        for (int n = -n_r; n <= n_r; ++n) {
            if (n == 0) continue;
            grid.y.push_back(m * lambda / 2.0);
            grid.z.push_back(n * lambda / 2.0);
            grid.m_index.push_back(m);
            grid.n_index.push_back(n);
        }
    }
    return grid;
}

std::size_t index_of(const ReceiverGrid& grid, int m, int n) {
    if (m == 0 || n == 0 || std::abs(m) > grid.n_r || std::abs(n) > grid.n_r)
        throw std::out_of_range("grid index out of range");
    const std::size_t row = static_cast<std::size_t>(m < 0 ? m + grid.n_r : m + grid.n_r - 1);
    const std::size_t col = static_cast<std::size_t>(n < 0 ? n + grid.n_r : n + grid.n_r - 1);
    return row * (2 * static_cast<std::size_t>(grid.n_r)) + col;
}

VoltageField synthesize(const DipoleSource& source, const ReceiverGrid& grid, double sigma2,
                        std::uint64_t rng_seed) {
    em_field::validate(source);
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("noise variance must be non-negative");
    if (source.lambda != grid.lambda)
        throw std::invalid_argument("grid and source wavelengths differ");

    VoltageField out;
    out.sigma2_nu = 2.0 * sigma2 * grid.l_r / grid.lambda;
    out.v.resize(grid.size());
    const double noise_scale = std::sqrt(out.sigma2_nu / 2.0);  // per quadrature component
    std::mt19937_64 gen(rng_seed);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const complex<double> h =
            model_voltage_at(EstimatorKind::kAnalytic, source, grid.y[i], grid.z[i], grid.l_r);
        out.v[i] = h + noise_scale * complex_standard_normal(gen);
    }
    return out;
}

SourceConstants SourceConstants::from(const DipoleSource& source) {
    return {source.I_in, source.l_s, source.lambda, source.Z0};
}

std::vector<complex<double>> model_voltages(EstimatorKind kind, const Vec3& t, const Vec3& u,
                                            const ReceiverGrid& grid,
                                            const SourceConstants& constants) {
    if (!(u.x > 0.0)) throw std::invalid_argument("trial position must have x > 0");
    const DipoleSource s = trial_source(constants, t, u);
    std::vector<complex<double>> h(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        h[i] = model_voltage_at(kind, s, grid.y[i], grid.z[i], grid.l_r);
    return h;
}

double log_likelihood(const VoltageField& observed, const std::vector<complex<double>>& model) {
    if (observed.v.size() != model.size())
        throw std::invalid_argument("observation/model size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) acc += std::norm(observed.v[i] - model[i]);
    return -acc;
}

double log_likelihood(EstimatorKind kind, const Vec3& trial_t, const Vec3& trial_u,
                      const VoltageField& observed, const ReceiverGrid& grid,
                      const SourceConstants& constants) {
    return log_likelihood(observed, model_voltages(kind, trial_t, trial_u, grid, constants));
}

TrialResult estimate(EstimatorKind kind, const VoltageField& observed, const ReceiverGrid& grid,
                     const SourceConstants& constants, const MleConfig& config) {
    validate_box(config.box);
    if (observed.v.size() != grid.size())
        throw std::invalid_argument("observation/grid size mismatch");
    const OptimizerSettings& opt = config.optimizer;
    if (opt.coarse_per_axis < 1 || opt.multistarts < 1 || opt.max_iterations < 1)
        throw std::invalid_argument("optimizer settings must be positive");

    const bool search_orientation = kind == EstimatorKind::kAnalytic && !config.orientation_known;
    Vec3 fixed_t{0.0, 0.0, 1.0};
    if (kind == EstimatorKind::kAnalytic && config.orientation_known) {
        validate_unit(config.known_orientation);
        fixed_t = config.known_orientation;
    }

    const Objective obj(kind, observed, grid, constants, config.box);
    const SearchBox& box = config.box;

    // Coarse position grid (midpoint when an axis has a single sample).
    auto axis_points = [&](double lo, double hi) {
        std::vector<double> pts;
        if (opt.coarse_per_axis == 1 || hi == lo) {
            pts.push_back(0.5 * (lo + hi));
            return pts;
        }
        for (int i = 0; i < opt.coarse_per_axis; ++i)
            pts.push_back(lo + (hi - lo) * i / (opt.coarse_per_axis - 1));
        return pts;
    };

    std::vector<Candidate> coarse;
    for (double x : axis_points(box.lo.x, box.hi.x))
        for (double y : axis_points(box.lo.y, box.hi.y))
            for (double z : axis_points(box.lo.z, box.hi.z)) {
                const Vec3 u{x, y, z};
                if (search_orientation) {
                    auto [ll, t] = obj.best_orientation(u, opt.n_theta, opt.n_phi);
                    coarse.push_back({u, t, ll});
                } else {
                    coarse.push_back({u, fixed_t, obj.log_lik(u, fixed_t)});
                }
            }
    std::sort(coarse.begin(), coarse.end(),
              [](const Candidate& a, const Candidate& b) { return a.ll > b.ll; });

    // Keep the strongest starts, discarding near-duplicates of a better one.
    const double min_sep = grid.lambda / 4.0;
    std::vector<Candidate> starts;
    for (const Candidate& c : coarse) {
        if (static_cast<int>(starts.size()) >= opt.multistarts) break;
        bool close = false;
        for (const Candidate& s : starts)
            close = close || (std::abs(c.u.x - s.u.x) < min_sep &&
                              std::abs(c.u.y - s.u.y) < min_sep &&
                              std::abs(c.u.z - s.u.z) < min_sep);
        if (!close) starts.push_back(c);
    }

    // Dense scan along x: the likelihood oscillates fastest in range, with
    // near-periodic local maxima the coarse grid cannot separate.
    if (opt.fine_x_step_fraction > 0.0 && box.hi.x > box.lo.x) {
        const double step = grid.lambda * opt.fine_x_step_fraction;
        for (Candidate& s : starts) {
            for (double x = box.lo.x; x <= box.hi.x + 0.5 * step; x += step) {
                const Vec3 u{std::min(x, box.hi.x), s.u.y, s.u.z};
                if (search_orientation) {
                    auto [ll, t] = obj.best_orientation(u, opt.n_theta, opt.n_phi);
                    if (ll > s.ll) s = {u, t, ll};
                } else {
                    const double ll = obj.log_lik(u, fixed_t);
                    if (ll > s.ll) s = {u, fixed_t, ll};
                }
            }
        }
    }

    // Simplex refinement from each start; the best converged run wins.
    TrialResult result;
    bool have_result = false;
    for (const Candidate& s : starts) {
        std::vector<double> start{s.u.x, s.u.y, s.u.z};
        std::vector<double> steps;
        for (int d = 0; d < 3; ++d) {
            const double lo = d == 0 ? box.lo.x : (d == 1 ? box.lo.y : box.lo.z);
            const double hi = d == 0 ? box.hi.x : (d == 1 ? box.hi.y : box.hi.z);
            const double width = hi - lo;
            double h = std::min(grid.lambda / 8.0, width > 0.0 ? width / 8.0 : grid.lambda / 8.0);
            if (h <= 0.0) h = grid.lambda / 8.0;
            steps.push_back(h);
        }
        if (search_orientation) {
            const double theta = std::acos(clamp(s.t.z, -1.0, 1.0));
            const double phi = std::atan2(s.t.y, s.t.x);
            start.push_back(theta);
            start.push_back(phi);
            steps.push_back(0.05);
            steps.push_back(0.05);
        }

        auto f = [&](const std::vector<double>& p) {
            const Vec3 u{p[0], p[1], p[2]};
            const Vec3 t = search_orientation ? angles_to_orientation(p[3], p[4]) : fixed_t;
            return obj.log_lik(u, t);
        };
        const SimplexOutcome run =
            nelder_mead(f, start, steps, opt.rel_tol, opt.size_tol, opt.max_iterations);
        if (!run.converged) continue;
        if (!have_result || run.value > result.log_lik) {
            result.u_hat = clamp_to_box(Vec3{run.point[0], run.point[1], run.point[2]}, box);
            result.t_hat = search_orientation
                               ? canonicalize_orientation(
                                     angles_to_orientation(run.point[3], run.point[4]))
                               : (kind == EstimatorKind::kAnalytic ? fixed_t : Vec3{0.0, 0.0, 0.0});
            result.log_lik = run.value;
            result.converged = true;
            result.iterations = run.iterations;
            have_result = true;
        }
    }
    if (!have_result)
        throw NoConvergence("simplex refinement did not reach the cost tolerance from any start");
    return result;
}

RmseSummary monte_carlo(const MleConfig& config, const Scenario& scenario) {
    if (config.trials < 1) throw std::invalid_argument("need at least one trial");
    em_field::validate(scenario.source);
    const ReceiverGrid grid = build_grid(scenario.L, scenario.source.lambda, scenario.l_r);
    const SourceConstants constants = SourceConstants::from(scenario.source);

    const int trials = config.trials;
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    std::vector<char> failed(static_cast<std::size_t>(trials), 0);

    unsigned hw = std::thread::hardware_concurrency();
    int workers = config.workers > 0 ? config.workers : static_cast<int>(hw > 0 ? hw : 1);
    workers = std::min(workers, trials);

    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run_range = [&](int begin, int stride) {
        for (int t = begin; t < trials; t += stride) {
            try {
                const VoltageField v = synthesize(scenario.source, grid, scenario.sigma2,
                                                  config.seed ^ static_cast<std::uint64_t>(t));
                results[static_cast<std::size_t>(t)] =
                    estimate(config.estimator, v, grid, constants, config);
            } catch (const NoConvergence&) {
                failed[static_cast<std::size_t>(t)] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers <= 1) {
        run_range(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, w, workers);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    RmseSummary summary;
    summary.trials = trials;
    summary.trial_results = std::move(results);
    const Vec3 truth{scenario.source.x_C, scenario.source.y_C, scenario.source.z_C};
    std::array<double, 3> sq{};
    int ok = 0;
    for (int t = 0; t < trials; ++t) {
        if (failed[static_cast<std::size_t>(t)]) {
            ++summary.convergence_failures;
            summary.trial_results[static_cast<std::size_t>(t)].converged = false;
            continue;
        }
        const Vec3& u = summary.trial_results[static_cast<std::size_t>(t)].u_hat;
        sq[0] += (u.x - truth.x) * (u.x - truth.x);
        sq[1] += (u.y - truth.y) * (u.y - truth.y);
        sq[2] += (u.z - truth.z) * (u.z - truth.z);
        ++ok;
    }
    for (int d = 0; d < 3; ++d)
        summary.rmse[static_cast<std::size_t>(d)] =
            ok > 0 ? std::sqrt(sq[static_cast<std::size_t>(d)] / ok)
                   : std::numeric_limits<double>::quiet_NaN();
    return summary;
}

std::array<double, 3> crb_z_component(const DipoleSource& source,
                                      const em_field::ObservationSurface& surface, double sigma2) {
    em_field::validate(source);
    if (!(sigma2 > 0.0)) throw std::invalid_argument("noise variance must be positive");
    if (!(surface.L > 0.0)) throw std::invalid_argument("surface side must be positive");

    const double half = surface.L / 2.0;
    const quadrature::Rect2 domain{-half, half, -half, half};
    Eigen::Matrix3d F;
    for (int a = 0; a < 3; ++a) {
        for (int b = a; b < 3; ++b) {
            const auto integrand = [&source, a, b](double y, double z) {
                const fim::FieldJacobian J = fim::field_jacobian(source, y, z);
                return (J.d[2][3 + a] * std::conj(J.d[2][3 + b])).real();
            };
            const quadrature::QuadResult q = quadrature::integrate2d(integrand, domain);
            F(a, b) = F(b, a) = (2.0 / sigma2) * q.value;
        }
    }
    return invert3_diagonal(F, "z-component position information");
}

std::array<double, 3> crb_z_component(const DipoleSource& source, const ReceiverGrid& grid,
                                      double sigma2) {
    em_field::validate(source);
    if (!(sigma2 > 0.0)) throw std::invalid_argument("noise variance must be positive");
    const double sigma2_nu = 2.0 * sigma2 * grid.l_r / grid.lambda;

    Eigen::Matrix3d F = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const fim::FieldJacobian J = fim::field_jacobian(source, grid.y[i], grid.z[i]);
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                F(a, b) += (J.d[2][3 + a] * std::conj(J.d[2][3 + b])).real();
    }
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            F(a, b) *= 2.0 * grid.l_r * grid.l_r / sigma2_nu;
            F(b, a) = F(a, b);
        }
    return invert3_diagonal(F, "z-component position information");
}

}  // namespace holopos::mle
