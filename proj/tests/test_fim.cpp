#include "holopos/fim.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>

#include "holopos/em_field.hpp"
#include "holopos/quadrature.hpp"

namespace hf = holopos::fim;
namespace he = holopos::em_field;
namespace hq = holopos::quadrature;
using std::complex;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Generic off-axis, tilted configuration; all frozen numbers below were
// computed with 40-digit arithmetic from the model definitions.
he::DipoleSource tilted_source() {
    he::DipoleSource s;
    s.x_C = 2.0;
    s.y_C = 0.35;
    s.z_C = -0.6;
    s.t_x = 0.29986509105671;
    s.t_y = -0.54975266693730174;
    s.t_z = 0.77964923674744602;
    s.I_in = 1.0;
    s.l_s = 0.05;
    s.lambda = 0.4;
    return s;
}

he::DipoleSource cpl_vertical(double x_C, double lambda) {
    he::DipoleSource s;
    s.x_C = x_C;
    s.y_C = 0.0;
    s.z_C = 0.0;
    s.t_x = 0.0;
    s.t_y = 0.0;
    s.t_z = 1.0;
    s.I_in = 1.0;
    s.l_s = lambda / 8.0;
    s.lambda = lambda;
    return s;
}

void expect_cnear(const complex<double>& got, const complex<double>& want, double rel,
                  const char* what) {
    const double scale = std::max(1.0, std::abs(want));
    EXPECT_NEAR(got.real(), want.real(), rel * scale) << what;
    EXPECT_NEAR(got.imag(), want.imag(), rel * scale) << what;
}

Eigen::MatrixXd to_eigen6(const hf::FisherMatrix& F) {
    Eigen::MatrixXd out(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) out(i, j) = F.m[i][j];
    return out;
}

// Fisher matrix with prescribed 3x3 blocks (tc may be null for zero).
hf::FisherMatrix build_fisher(const Eigen::Matrix3d& tt, const Eigen::Matrix3d* tc,
                              const Eigen::Matrix3d& cc) {
    hf::FisherMatrix F;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            F.m[i][j] = tt(i, j);
            F.m[i + 3][j + 3] = cc(i, j);
            const double v = tc ? (*tc)(i, j) : 0.0;
            F.m[i][j + 3] = v;
            F.m[j + 3][i] = v;
        }
    }
    return F;
}

}  // namespace

TEST(FieldJacobian, FrozenTiltedConfig) {
    const auto J = hf::field_jacobian(tilted_source(), 0.25, -0.15);
    const double rel = 1e-11;
    expect_cnear(J.d[0][0], {-0.42457307143923852, -0.39324407967907530}, rel, "dEx/dtx");
    expect_cnear(J.d[0][1], {0.39959818488398919, 0.37011207499207087}, rel, "dEx/dty");
    expect_cnear(J.d[0][2], {-1.7981918319779514, -1.6655043374643189}, rel, "dEx/dtz");
    expect_cnear(J.d[0][3], {-23.114948761384586, 28.326893149899624}, rel, "dEx/dxC");
    expect_cnear(J.d[0][4], {-3.4318336861690835, -0.69179055435469460}, rel, "dEx/dyC");
    expect_cnear(J.d[0][5], {8.6731082333180349, -3.1575210507845894}, rel, "dEx/dzC");
    expect_cnear(J.d[1][1], {-8.3965568598748229, -7.7769799757708892}, rel, "dEy/dty");
    expect_cnear(J.d[1][2], {-0.089909591598897569, -0.083275216873215946}, rel, "dEy/dtz");
    expect_cnear(J.d[1][3], {63.955177018704374, -73.447393470045222}, rel, "dEy/dxC");
    expect_cnear(J.d[1][4], {3.4723590607393162, -3.4180320481365242}, rel, "dEy/dyC");
    expect_cnear(J.d[1][5], {-14.220661245347413, 16.682427994394693}, rel, "dEy/dzC");
    expect_cnear(J.d[2][2], {-8.0119436069239833, -7.4207471035910210}, rel, "dEz/dtz");
    expect_cnear(J.d[2][3], {-92.407407823992152, 105.97588332275120}, rel, "dEz/dxC");
    expect_cnear(J.d[2][4], {-4.1126096396163945, 5.7690875570411137}, rel, "dEz/dyC");
    expect_cnear(J.d[2][5], {20.417461565401559, -24.191166566185602}, rel, "dEz/dzC");
}

TEST(FieldJacobian, OrientationBlockSymmetry) {
    // The -r_a r_b structure makes the orientation block symmetric at every
    // point: dE_x/dt_y == dE_y/dt_x and so on.
    const auto J = hf::field_jacobian(tilted_source(), 0.7, -1.1);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            EXPECT_EQ(J.d[a][b], J.d[b][a]) << a << "," << b;
        }
    }
}

TEST(FieldJacobian, CplVerticalCenterOrientationEntry) {
    // On the central axis r_z = 0, so dE_z/dt_z reduces to -i chi e^{-ikr}/r.
    // The distance is an integer number of wavelengths here, leaving a purely
    // imaginary value up to double rounding of k.
    const auto s = cpl_vertical(6.0, 0.1);
    const auto J = hf::field_jacobian(s, 0.0, 0.0);
    EXPECT_NEAR(J.d[2][2].real(), 0.0, 1e-9);
    EXPECT_NEAR(J.d[2][2].imag(), -he::chi(s).real() / 6.0, 1e-12);
}

TEST(FieldJacobian, MatchesCentralFiniteDifferences) {
    // Oracle: central differences with step h = 1e-6 * max(1, |p_m|) on the
    // field model itself, 100 random configurations, per-column relative
    // error <= 1e-6. Orientation columns difference the raw field expression
    // (the model is linear in t, so no renormalization is involved); its
    // equality with analytic_field at unit t is asserted each round.
    auto raw_field = [](const he::DipoleSource& s, double y, double z) {
        const double xb = -s.x_C, yb = y - s.y_C, zb = z - s.z_C;
        const double r = std::sqrt(xb * xb + yb * yb + zb * zb);
        const double rx = xb / r, ry = yb / r, rz = zb / r;
        const double rt = rx * s.t_x + ry * s.t_y + rz * s.t_z;
        const complex<double> pref = complex<double>(0.0, -1.0) *
                                     (s.Z0 * s.I_in * s.l_s / (2.0 * s.lambda)) *
                                     std::exp(complex<double>(0.0, -s.k() * r)) / r;
        return he::ComplexVec3{pref * (s.t_x - rt * rx), pref * (s.t_y - rt * ry),
                               pref * (s.t_z - rt * rz)};
    };

    std::mt19937_64 rng(97);
    std::uniform_real_distribution<double> lam(0.2, 0.8);
    std::uniform_real_distribution<double> front(0.5, 4.0);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    std::uniform_real_distribution<double> pt(-1.5, 1.5);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int trial = 0; trial < 100; ++trial) {
        he::DipoleSource s;
        s.lambda = lam(rng);
        s.x_C = front(rng);
        s.y_C = off(rng);
        s.z_C = off(rng);
        s.l_s = 0.05;
        s.I_in = 1.0;
        double tx = gauss(rng), ty = gauss(rng), tz = gauss(rng);
        const double tn = std::sqrt(tx * tx + ty * ty + tz * tz);
        s.t_x = tx / tn;
        s.t_y = ty / tn;
        s.t_z = tz / tn;
        const double y = pt(rng), z = pt(rng);

        const auto base = raw_field(s, y, z);
        const auto model = he::analytic_field(s, y, z);
        ASSERT_LT(std::abs(base.ex - model.ex) + std::abs(base.ey - model.ey) +
                      std::abs(base.ez - model.ez),
                  1e-12 * std::abs(he::chi(s)));

        const auto J = hf::field_jacobian(s, y, z);
        double* params[6] = {&s.t_x, &s.t_y, &s.t_z, &s.x_C, &s.y_C, &s.z_C};
        for (int m = 0; m < 6; ++m) {
            const double p0 = *params[m];
            const double h = 1e-6 * std::max(1.0, std::abs(p0));
            *params[m] = p0 + h;
            const auto ep = m < 3 ? raw_field(s, y, z) : he::analytic_field(s, y, z);
            *params[m] = p0 - h;
            const auto em = m < 3 ? raw_field(s, y, z) : he::analytic_field(s, y, z);
            *params[m] = p0;

            const complex<double> fd[3] = {(ep.ex - em.ex) / (2.0 * h),
                                           (ep.ey - em.ey) / (2.0 * h),
                                           (ep.ez - em.ez) / (2.0 * h)};
            double num = 0.0, den = 0.0;
            for (int a = 0; a < 3; ++a) {
                num += std::norm(fd[a] - J.d[a][m]);
                den += std::norm(J.d[a][m]);
            }
            EXPECT_LE(std::sqrt(num), 1e-6 * std::sqrt(den))
                << "trial " << trial << " column " << m;
        }
    }
}

TEST(AssembleFim, FrozenTiltedConfig) {
    const he::ObservationSurface surf{1.6};
    const auto F = hf::assemble_fim(tilted_source(), surf, 1.3);

    const double want[6][6] = {
        {70.130251666533724, -56.13948129804907, 96.502414240474153, -46.419217100165945,
         -15.053144696886337, 22.811863016948667},
        {-56.13948129804907, 426.16972928607612, 14.347355475252607, 98.686178033541907,
         9.2867211605970219, -23.371848924358861},
        {96.502414240474153, 14.347355475252607, 410.2846801935242, -141.02300081359442,
         -18.730171004384903, 28.336427394202218},
        {-46.419217100165945, 98.686178033541907, -141.02300081359442, 90979.860063941436,
         13493.670540742156, -23055.744390616477},
        {-15.053144696886337, 9.2867211605970219, -18.730171004384903, 13493.670540742156,
         6482.062740475928, -3358.1555754164624},
        {22.811863016948667, -23.371848924358861, 28.336427394202218, -23055.744390616477,
         -3358.1555754164624, 10266.929414878698}};

    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            EXPECT_NEAR(F.m[i][j], want[i][j], 5e-8 * std::max(1.0, std::abs(want[i][j])))
                << i << "," << j;
            EXPECT_EQ(F.m[i][j], F.m[j][i]);
        }
    }
    EXPECT_EQ(F.length_scale, 2.0);
    EXPECT_GT(F.quad_cells, 0u);
}

TEST(AssembleFim, NoiseScalingIsExact) {
    const he::ObservationSurface surf{0.8};
    const auto F1 = hf::assemble_fim(tilted_source(), surf, 1.3);
    const auto F2 = hf::assemble_fim(tilted_source(), surf, 2.6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) EXPECT_DOUBLE_EQ(2.0 * F2.m[i][j], F1.m[i][j]);
}

TEST(AssembleFim, CplVerticalBlockStructure) {
    // Centered vertical dipole: both diagonal blocks are diagonal and the
    // mixed block has exactly two nonzero entries, (t_x, z_C) and (t_z, x_C).
    const auto F = hf::assemble_fim(cpl_vertical(6.0, 0.4), he::ObservationSurface{3.0}, 1.0);
    double diag_scale = 0.0;
    for (int i = 0; i < 6; ++i) diag_scale = std::max(diag_scale, std::abs(F.m[i][i]));

    for (int i = 0; i < 6; ++i) {
        for (int j = i + 1; j < 6; ++j) {
            const bool coupled = (i == 0 && j == 5) || (i == 2 && j == 3);
            if (coupled) {
                EXPECT_GT(std::abs(F.m[i][j]), 1e-6 * diag_scale) << i << "," << j;
            } else {
                EXPECT_LE(std::abs(F.m[i][j]), 1e-8 * diag_scale) << i << "," << j;
            }
        }
    }
}

TEST(AssembleFim, PsdUpToRoundoff) {
    const auto F = hf::assemble_fim(tilted_source(), he::ObservationSurface{1.6}, 1.3);
    const Eigen::MatrixXd M = to_eigen6(F);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * M.norm());
}

TEST(AssembleFim, MonotoneUnderSurfaceEnlargement) {
    // The integrand is a Gram matrix, so growing the surface can only add
    // information: F(L2) - F(L1) must be PSD.
    const auto F1 = hf::assemble_fim(tilted_source(), he::ObservationSurface{1.0}, 1.3);
    const auto F2 = hf::assemble_fim(tilted_source(), he::ObservationSurface{1.6}, 1.3);
    const Eigen::MatrixXd D = to_eigen6(F2) - to_eigen6(F1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * to_eigen6(F2).norm());
}

TEST(AssembleFim, AxisSwapSymmetry) {
    // For a centered source, swapping t_y <-> t_z is the same physical problem
    // with y and z relabeled, so F permutes by (1<->2, 4<->5).
    he::DipoleSource a = tilted_source();
    a.y_C = 0.0;
    a.z_C = 0.0;
    he::DipoleSource b = a;
    std::swap(b.t_y, b.t_z);

    const auto Fa = hf::assemble_fim(a, he::ObservationSurface{1.2}, 1.0);
    const auto Fb = hf::assemble_fim(b, he::ObservationSurface{1.2}, 1.0);
    const int perm[6] = {0, 2, 1, 3, 5, 4};
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            EXPECT_NEAR(Fb.m[i][j], Fa.m[perm[i]][perm[j]],
                        1e-8 * std::max(1.0, std::abs(Fa.m[perm[i]][perm[j]])))
                << i << "," << j;
        }
    }
}

TEST(AssembleFim, PropagatesQuadratureBudgetExhaustion) {
    hq::QuadTols tols;
    tols.rel_tol = 1e-13;
    tols.abs_tol = 1e-300;
    tols.max_cells = 4;
    EXPECT_THROW(hf::assemble_fim(tilted_source(), he::ObservationSurface{1.6}, 1.0, tols),
                 hq::AccuracyNotReached);
}

TEST(AssembleFim, RejectsInvalidArguments) {
    EXPECT_THROW(hf::assemble_fim(tilted_source(), he::ObservationSurface{0.0}, 1.0),
                 std::invalid_argument);
    EXPECT_THROW(hf::assemble_fim(tilted_source(), he::ObservationSurface{1.0}, -1.0),
                 std::invalid_argument);
}

TEST(CrbKnown, DiagonalReciprocals) {
    const auto F = build_fisher(Eigen::Matrix3d::Identity(), nullptr,
                                Eigen::Vector3d(2.0, 5.0, 0.25).asDiagonal());
    const auto crb = hf::crb_known(F);
    EXPECT_DOUBLE_EQ(crb[0], 0.5);
    EXPECT_DOUBLE_EQ(crb[1], 0.2);
    EXPECT_DOUBLE_EQ(crb[2], 4.0);
}

TEST(CrbKnown, FrozenTiltedConfig) {
    const auto F = hf::assemble_fim(tilted_source(), he::ObservationSurface{1.6}, 1.3);
    const auto crb = hf::crb_known(F);
    EXPECT_NEAR(crb[0], 3.0652537690520252e-05, 1e-7 * 3.07e-05);
    EXPECT_NEAR(crb[1], 0.00022321930725151753, 1e-7 * 2.23e-04);
    EXPECT_NEAR(crb[2], 0.00022607061041082603, 1e-7 * 2.26e-04);
}

TEST(CrbKnown, LargeSurfaceAsymptote) {
    // rho = L/x_C = 100 with x_C = 100 lambda: the depth bound approaches
    // lambda^2 / (SNR 3 pi^3) (within 5%).
    const auto s = cpl_vertical(1.0, 0.01);
    const double sigma2 = 0.7;
    hq::QuadTols tols;
    tols.rel_tol = 1e-7;
    tols.abs_tol = 1e-9;
    const auto F = hf::assemble_fim(s, he::ObservationSurface{100.0}, sigma2, tols);
    const auto crb = hf::crb_known(F);
    const double snr = 2.0 * std::norm(he::chi(s)) / sigma2;
    const double target = s.lambda * s.lambda / (snr * 3.0 * kPi * kPi * kPi);
    EXPECT_NEAR(crb[0], target, 0.05 * target);
}

TEST(CrbUnknown, DecoupledEqualsKnown) {
    Eigen::Matrix3d tt;
    tt << 4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0;
    Eigen::Matrix3d cc;
    cc << 9.0, -1.0, 0.2, -1.0, 7.0, 0.0, 0.2, 0.0, 5.0;
    const auto F = build_fisher(tt, nullptr, cc);
    const auto known = hf::crb_known(F);
    const auto unknown = hf::crb_unknown(F);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(unknown[i], known[i]);
}

TEST(CrbUnknown, NeverBelowKnown) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd A(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) A(i, j) = gauss(rng);
        const Eigen::MatrixXd M = A.transpose() * A + Eigen::MatrixXd::Identity(6, 6);
        hf::FisherMatrix F;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) F.m[i][j] = M(i, j);
        const auto known = hf::crb_known(F);
        const auto unknown = hf::crb_unknown(F);
        for (int i = 0; i < 3; ++i)
            EXPECT_GE(unknown[i], known[i] - 1e-10 * known[i]) << "trial " << trial;
    }
}

TEST(CrbUnknown, FrozenTiltedConfig) {
    const auto F = hf::assemble_fim(tilted_source(), he::ObservationSurface{1.6}, 1.3);
    const auto crb = hf::crb_unknown(F);
    EXPECT_NEAR(crb[0], 3.0697921022142655e-05, 1e-7 * 3.07e-05);
    EXPECT_NEAR(crb[1], 0.00022334157004838651, 1e-7 * 2.23e-04);
    EXPECT_NEAR(crb[2], 0.00022630544520393844, 1e-7 * 2.26e-04);
}

TEST(CrbUnknown, NegligibleLossForCenteredVerticalDipole) {
    const auto F = hf::assemble_fim(cpl_vertical(6.0, 0.4), he::ObservationSurface{3.0}, 1.0);
    const auto known = hf::crb_known(F);
    const auto unknown = hf::crb_unknown(F);
    for (int i = 0; i < 3; ++i) {
        EXPECT_GE(unknown[i], known[i] - 1e-10 * known[i]);
        EXPECT_LE((unknown[i] - known[i]) / known[i], 1e-3) << "axis " << i;
    }
}

TEST(MilResidual, RandomWellConditioned) {
    std::mt19937_64 rng(59);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd A(6, 6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) A(i, j) = gauss(rng);
        const Eigen::MatrixXd M = A.transpose() * A + Eigen::MatrixXd::Identity(6, 6);
        hf::FisherMatrix F;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) F.m[i][j] = M(i, j);
        EXPECT_LE(hf::mil_residual(F), 1e-8) << "trial " << trial;
    }
}

TEST(MilResidual, BlockDiagonalIsZero) {
    Eigen::Matrix3d tt;
    tt << 4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0;
    Eigen::Matrix3d cc;
    cc << 9.0, -1.0, 0.2, -1.0, 7.0, 0.0, 0.2, 0.0, 5.0;
    EXPECT_LE(hf::mil_residual(build_fisher(tt, nullptr, cc)), 1e-15);
}

TEST(MilResidual, PhysicalConfig) {
    const auto F = hf::assemble_fim(tilted_source(), he::ObservationSurface{1.6}, 1.3);
    EXPECT_LE(hf::mil_residual(F), 1e-8);
}

TEST(DeltaRcrb, DecoupledIsZero) {
    Eigen::Matrix3d tt = Eigen::Vector3d(2.0, 2.0, 3.0).asDiagonal();
    Eigen::Matrix3d cc = Eigen::Vector3d(5.0, 6.0, 7.0).asDiagonal();
    const auto d = hf::delta_rcrb(build_fisher(tt, nullptr, cc));
    EXPECT_EQ(d[0], 0.0);
    EXPECT_EQ(d[1], 0.0);
    EXPECT_EQ(d[2], 0.0);
}

TEST(DeltaRcrb, CenteredVerticalYLossUnderflows) {
    // The y-axis bound is unaffected by orientation uncertainty in this
    // geometry; the computed loss must be zero or vanishingly small.
    const auto F = hf::assemble_fim(cpl_vertical(6.0, 0.4), he::ObservationSurface{3.0}, 1.0);
    const auto d = hf::delta_rcrb(F);
    EXPECT_LE(d[1], 1e-7);
}

TEST(DeltaRcrb, HorizontalDipoleSmallSurfaceDepthLoss) {
    he::DipoleSource s = cpl_vertical(2.0, 0.4);
    s.t_x = 1.0;
    s.t_z = 0.0;
    const auto F = hf::assemble_fim(s, he::ObservationSurface{1.0}, 1.0);
    const auto d = hf::delta_rcrb(F);
    EXPECT_GT(d[0], 0.0);
}

TEST(Singularity, ZeroInformationAxisThrows) {
    Eigen::Matrix3d tt = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d cc = Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal();
    const auto F = build_fisher(tt, nullptr, cc);
    try {
        hf::crb_known(F);
        FAIL() << "expected SingularInformation";
    } catch (const hf::SingularInformation& e) {
        EXPECT_TRUE(!(e.condition_number < hf::kConditionCap));
    }

    Eigen::Matrix3d tt0 = Eigen::Vector3d(1.0, 1.0, 1e-14).asDiagonal();
    EXPECT_THROW(hf::crb_unknown(build_fisher(tt0, nullptr, cc)), hf::SingularInformation);
}

TEST(CrbReport, AggregatesAllQuantities) {
    const auto F = hf::assemble_fim(tilted_source(), he::ObservationSurface{1.6}, 1.3);
    const auto rep = hf::crb_report(F);
    const auto known = hf::crb_known(F);
    const auto unknown = hf::crb_unknown(F);
    const auto d = hf::delta_rcrb(F);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(rep.crb_known[i], known[i]);
        EXPECT_DOUBLE_EQ(rep.crb_unknown[i], unknown[i]);
        EXPECT_DOUBLE_EQ(rep.delta_rcrb[i], d[i]);
        EXPECT_GT(rep.crb_unknown[i], 0.0);
    }
    EXPECT_GE(rep.cond_tt, 1.0);
    EXPECT_GE(rep.cond_cc, 1.0);
    EXPECT_GE(rep.cond_schur, 1.0);
    EXPECT_LT(rep.cond_cc, hf::kConditionCap);
    EXPECT_GE(rep.quad_error_bound, 0.0);
    EXPECT_LT(rep.quad_error_bound, 1e-3);
}
