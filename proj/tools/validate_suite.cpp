#include "validate_suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "holopos/cpl.hpp"
#include "holopos/em_field.hpp"
#include "holopos/fim.hpp"
#include "holopos/mle.hpp"
#include "holopos/quadrature.hpp"

namespace holopos::cli {
namespace {

namespace he = em_field;
namespace hf = fim;
namespace hq = quadrature;

constexpr double kPi = 3.141592653589793238462643383279502884;

struct CheckSink {
    std::ostream& out;
    int failures = 0;

    void report(bool pass, const std::string& name, const std::string& margin) {
        char line[256];
        std::snprintf(line, sizeof(line), "%s  %-46s %s\n", pass ? "PASS" : "FAIL", name.c_str(),
                      margin.c_str());
        out << line;
        if (!pass) ++failures;
    }
};

std::string fmt(const char* pattern, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b);
    return buf;
}

he::DipoleSource random_source(std::mt19937& gen) {
    std::uniform_real_distribution<double> ux(1.0, 8.0);
    std::uniform_real_distribution<double> uyz(-1.0, 1.0);
    std::uniform_real_distribution<double> ulam(0.02, 0.2);
    std::normal_distribution<double> un(0.0, 1.0);

    he::DipoleSource s;
    s.x_C = ux(gen);
    s.y_C = uyz(gen);
    s.z_C = uyz(gen);
    double tx = un(gen), ty = un(gen), tz = un(gen);
    const double norm = std::sqrt(tx * tx + ty * ty + tz * tz);
    s.t_x = tx / norm;
    s.t_y = ty / norm;
    s.t_z = tz / norm;
    s.lambda = ulam(gen);
    s.l_s = s.lambda / 4.0;
    s.Z0 = he::kFreeSpaceImpedanceOhm;
    s.I_in = 2.0 * s.lambda / (s.Z0 * s.l_s);  // |chi| = 1
    return s;
}

// Reference field evaluated from the raw formula without the unit-orientation
// guard, so orientation components can be perturbed for finite differencing:
//   e = -i chi (e^{-ikr}/r) [t - (r_hat . t) r_hat].
he::ComplexVec3 raw_field(const he::DipoleSource& s, const std::array<double, 3>& t,
                          const std::array<double, 3>& u, double y, double z) {
    const double dx = -u[0], dy = y - u[1], dz = z - u[2];
    const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
    const std::array<double, 3> rh{dx / r, dy / r, dz / r};
    const double rt = rh[0] * t[0] + rh[1] * t[1] + rh[2] * t[2];
    const std::complex<double> chi = he::chi(s);
    const std::complex<double> amp =
        std::complex<double>(0.0, -1.0) * chi * std::exp(std::complex<double>(0.0, -s.k() * r)) /
        r;
    return {amp * (t[0] - rt * rh[0]), amp * (t[1] - rt * rh[1]), amp * (t[2] - rt * rh[2])};
}

// Largest relative disagreement between `jac` and a central finite difference
// of the raw field over all 18 entries; *where records the worst (row, col).
double jacobian_fd_error(const std::function<hf::FieldJacobian(const he::DipoleSource&, double,
                                                               double)>& jac,
                         const he::DipoleSource& s, double y, double z, int* where = nullptr) {
    const hf::FieldJacobian J = jac(s, y, z);

    double scale = 0.0;
    for (const auto& row : J.d)
        for (const auto& entry : row) scale = std::max(scale, std::abs(entry));

    std::array<double, 3> t{s.t_x, s.t_y, s.t_z};
    std::array<double, 3> u{s.x_C, s.y_C, s.z_C};
    double worst = 0.0;
    for (int p = 0; p < 6; ++p) {
        const bool orient = p < 3;
        std::array<double, 3>& v = orient ? t : u;
        const int idx = orient ? p : p - 3;
        const double h = orient ? 1e-6 : 1e-6 * std::max(1.0, std::abs(v[idx]));
        const double saved = v[idx];
        v[idx] = saved + h;
        const he::ComplexVec3 fp = raw_field(s, t, u, y, z);
        v[idx] = saved - h;
        const he::ComplexVec3 fm = raw_field(s, t, u, y, z);
        v[idx] = saved;
        const std::complex<double> fd[3] = {(fp.ex - fm.ex) / (2.0 * h),
                                            (fp.ey - fm.ey) / (2.0 * h),
                                            (fp.ez - fm.ez) / (2.0 * h)};
        for (int c = 0; c < 3; ++c) {
            const double err = std::abs(J.d[c][p] - fd[c]) / scale;
            if (err > worst) {
                worst = err;
                if (where) *where = 10 * c + p;
            }
        }
    }
    return worst;
}

void check_gradients(CheckSink& sink) {
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> upt(-2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const he::DipoleSource s = random_source(gen);
        worst = std::max(worst, jacobian_fd_error(&hf::field_jacobian, s, upt(gen), upt(gen)));
    }
    sink.report(worst <= 1e-6, "field-gradient-vs-finite-difference",
                fmt("max_rel_err=%.3g tol=%.3g (100 configs)", worst, 1e-6));
}

void check_gradient_mutation_detection(CheckSink& sink) {
    // A deliberately corrupted derivative (sign flip on d e_x / d y_C) must be
    // caught by the same finite-difference comparison, and the worst entry
    // must localize at the corrupted one.
    const auto mutated = [](const he::DipoleSource& s, double y, double z) {
        hf::FieldJacobian J = hf::field_jacobian(s, y, z);
        J.d[0][4] = -J.d[0][4];
        return J;
    };
    std::mt19937 gen(77);
    std::uniform_real_distribution<double> upt(-2.0, 2.0);
    double worst = 0.0;
    bool localized = true;
    for (int i = 0; i < 5; ++i) {
        int where = -1;
        const double err = jacobian_fd_error(mutated, random_source(gen), upt(gen), upt(gen),
                                             &where);
        worst = std::max(worst, err);
        localized = localized && where == 4;  // component e_x, parameter y_C
    }
    sink.report(worst > 1e-3 && localized, "gradient-check-detects-injected-sign-flip",
                fmt("mutated_rel_err=%.3g detection_floor=%.3g, localized", worst, 1e-3));
}

// Closed-form Fisher blocks of the centered vertical dipole against the
// general quadrature assembly.
double cpl_vs_quadrature_error(double L, const hq::QuadTols& tols) {
    he::DipoleSource s;
    s.x_C = 6.0;
    s.y_C = s.z_C = 0.0;
    s.t_x = s.t_y = 0.0;
    s.t_z = 1.0;
    s.lambda = 0.01;
    s.l_s = s.lambda / 4.0;
    s.Z0 = he::kFreeSpaceImpedanceOhm;
    s.I_in = 2.0 * s.lambda / (s.Z0 * s.l_s);
    const double snr = 10.0;       // 10 dB
    const double sigma2 = 2.0 / snr;

    const cpl::CplParams p{L / s.x_C, s.k(), s.x_C, snr};
    const cpl::CplFimBlocks blocks = cpl::fim_blocks_cpl(p, tols);
    const hf::FisherMatrix F = hf::assemble_fim(s, he::ObservationSurface{L}, sigma2, tols);
    const hf::Mat3 cc = F.block_cc(), tt = F.block_tt(), tc = F.block_tc();

    double worst = 0.0;
    const auto rel = [&worst](double closed, double quad) {
        worst = std::max(worst, std::abs(closed - quad) / std::abs(closed));
    };
    for (int i = 0; i < 3; ++i) {
        rel(blocks.f_cc_diag[i], cc[i][i]);
        rel(blocks.f_tt_diag[i], tt[i][i]);
    }
    rel(blocks.f_tc_13, tc[0][2]);
    rel(blocks.f_tc_31, tc[2][0]);
    return worst;
}

void check_cpl_vs_quadrature(CheckSink& sink) {
    double worst = 0.0;
    for (double L : {0.6, 3.0, 6.0}) worst = std::max(worst, cpl_vs_quadrature_error(L, {}));
    sink.report(worst <= 1e-6, "closed-form-vs-quadrature-fisher-blocks",
                fmt("max_rel_err=%.3g tol=%.3g (L = 0.6, 3, 6 m)", worst, 1e-6));

    hq::QuadTols tight;
    tight.rel_tol = 1e-11;
    tight.abs_tol = 1e-14;
    const double tightened = cpl_vs_quadrature_error(3.0, tight);
    sink.report(tightened <= 1e-6, "closed-form-vs-quadrature-tightened-tolerance",
                fmt("max_rel_err=%.3g tol=%.3g (rel_tol 1e-11)", tightened, 1e-6));
}

void check_integral_asymptotes(CheckSink& sink) {
    const cpl::ScriptIntegrals si = cpl::script_integrals(1e3);
    const double e1 = std::abs(si.i1 / (3.0 * kPi / 4.0) - 1.0);
    const double e6 = std::abs(si.i6 / (9.0 * kPi / 8.0) - 1.0);
    const double e9 = std::abs(si.i9 / (kPi / 2.0) - 1.0);
    const double worst = std::max({e1, e6, e9});
    sink.report(worst <= 5e-3, "surface-integral-asymptotes",
                fmt("max_rel_err=%.3g tol=%.3g (limits 3pi/4, 9pi/8, pi/2)", worst, 5e-3));
}

void check_i3_bracket(CheckSink& sink) {
    double margin = 1e300;
    bool ok = true;
    for (double rho : {0.5, 1.0, 5.0, 50.0, 1e3}) {
        const cpl::ScriptIntegrals si = cpl::script_integrals(rho);
        const auto [lb, ub] = cpl::i3_bounds(rho);
        ok = ok && lb <= si.i3 && si.i3 <= ub;
        margin = std::min({margin, si.i3 - lb, ub - si.i3});
    }
    sink.report(ok, "third-integral-disk-bracket",
                fmt("min_slack=%.3g over 5 aspect ratios (must be >= %.3g)", margin, 0.0));
}

void check_bound_ordering(CheckSink& sink) {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> uL(0.5, 4.0);
    double worst_violation = 0.0;  // positive = CRB_u below CRB
    double worst_residual = 0.0;
    for (int i = 0; i < 50; ++i) {
        const he::DipoleSource s = random_source(gen);
        const hf::FisherMatrix F = hf::assemble_fim(s, he::ObservationSurface{uL(gen)}, 0.02);
        const hf::Vec3d known = hf::crb_known(F);
        const hf::Vec3d unknown = hf::crb_unknown(F);
        for (int d = 0; d < 3; ++d)
            worst_violation = std::max(worst_violation, (known[d] - unknown[d]) / known[d]);
        worst_residual = std::max(worst_residual, hf::mil_residual(F));
    }
    sink.report(worst_violation <= 1e-10, "unknown-orientation-bound-dominates",
                fmt("worst_violation=%.3g tol=%.3g (50 random geometries)", worst_violation,
                    1e-10));
    sink.report(worst_residual <= 1e-8, "matrix-inversion-lemma-residual",
                fmt("max_residual=%.3g tol=%.3g (same set)", worst_residual, 1e-8));
}

void check_lateral_bound_equality(CheckSink& sink) {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> urho(0.3, 5.0);
    std::uniform_real_distribution<double> ux(1.0, 8.0);
    std::uniform_real_distribution<double> uk(30.0, 700.0);
    bool exact = true;
    for (int i = 0; i < 10; ++i) {
        const cpl::CplParams p{urho(gen), uk(gen), ux(gen), 10.0};
        const hf::CrbReport rep = cpl::crb_cpl(p);
        exact = exact && rep.crb_unknown[1] == rep.crb_known[1];
    }
    sink.report(exact, "lateral-bound-unaffected-by-orientation",
                "bitwise equality on 10 centered-vertical geometries");
}

void check_i1_consistency(CheckSink& sink) {
    double worst = 0.0;
    for (double rho : {0.5, 5.0, 50.0}) {
        const cpl::ScriptIntegrals si = cpl::script_integrals(rho);
        const double a = rho / 2.0;
        const hq::QuadResult q = hq::integrate2d(
            [](double u, double v) {
                const double sden = 1.0 + u * u + v * v;
                return (1.0 + v * v) / (sden * sden * sden);
            },
            hq::Rect2{-a, a, -a, a});
        worst = std::max(worst, std::abs(q.value - si.i1) / si.i1);
    }
    sink.report(worst <= 1e-8, "first-integral-closed-form-vs-quadrature",
                fmt("max_rel_err=%.3g tol=%.3g", worst, 1e-8));
}

void check_noiseless_recovery(CheckSink& sink) {
    he::DipoleSource s;
    s.x_C = 6.0;
    s.y_C = s.z_C = 0.0;
    s.t_x = s.t_y = 0.0;
    s.t_z = 1.0;
    s.lambda = 0.1;
    s.l_s = s.lambda / 4.0;
    s.Z0 = he::kFreeSpaceImpedanceOhm;
    s.I_in = 2.0 * s.lambda / (s.Z0 * s.l_s);

    const mle::ReceiverGrid grid = mle::build_grid(1.0, s.lambda, 0.01);
    const mle::VoltageField v = mle::synthesize(s, grid, 0.0, 1);
    mle::MleConfig cfg;
    cfg.orientation_known = true;
    cfg.box = {{5.8, -0.2, -0.2}, {6.2, 0.2, 0.2}};
    const mle::TrialResult r = mle::estimate(mle::EstimatorKind::kAnalytic, v, grid,
                                             mle::SourceConstants::from(s), cfg);
    const double err = std::max({std::abs(r.u_hat.x - 6.0), std::abs(r.u_hat.y),
                                 std::abs(r.u_hat.z)});
    sink.report(r.converged && err <= 1e-6, "noiseless-likelihood-recovery",
                fmt("max_coord_err=%.3g tol=%.3g", err, 1e-6));
}

}  // namespace

int run_validate_suite(std::ostream& out) {
    CheckSink sink{out};
    check_gradients(sink);
    check_gradient_mutation_detection(sink);
    check_cpl_vs_quadrature(sink);
    check_integral_asymptotes(sink);
    check_i3_bracket(sink);
    check_bound_ordering(sink);
    check_lateral_bound_equality(sink);
    check_i1_consistency(sink);
    check_noiseless_recovery(sink);
    out << (sink.failures == 0 ? "validate: all checks passed\n"
                               : "validate: " + std::to_string(sink.failures) +
                                     " check(s) FAILED\n");
    return sink.failures;
}

}  // namespace holopos::cli
