#include "holopos/fim.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace holopos::fim {

namespace {

using std::complex;

Eigen::Matrix3d to_eigen(const Mat3& a) {
    Eigen::Matrix3d out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(i, j) = a[i][j];
    return out;
}

// Spectral condition number of a symmetric 3x3 matrix.
double condition_number(const Eigen::Matrix3d& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().cwiseAbs().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

double require_invertible(const Eigen::Matrix3d& a, const char* which) {
    const double cond = condition_number(a);
    if (!(cond < kConditionCap)) throw SingularInformation(which, cond);
    return cond;
}

// The three blocks rescaled so that every entry is dimensionless: position
// rows/columns are multiplied by length_scale. This keeps the k^2 x_C^2
// dynamic range out of the inversions; the scaling is undone on the outputs.
struct ScaledBlocks {
    Eigen::Matrix3d tt;
    Eigen::Matrix3d tc;
    Eigen::Matrix3d cc;
    double s;  // length_scale
};

ScaledBlocks scaled_blocks(const FisherMatrix& F) {
    ScaledBlocks b;
    b.s = F.length_scale;
    b.tt = to_eigen(F.block_tt());
    b.tc = to_eigen(F.block_tc()) * b.s;
    b.cc = to_eigen(F.block_cc()) * (b.s * b.s);
    return b;
}

// diag(A^{-1}) through a factorization solve rather than an explicit inverse.
Eigen::Vector3d inverse_diagonal(const Eigen::Matrix3d& a) {
    const Eigen::Matrix3d inv = a.ldlt().solve(Eigen::Matrix3d::Identity());
    return inv.diagonal();
}

}  // namespace

Mat3 FisherMatrix::block_tt() const {
    Mat3 b;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = m[i][j];
    return b;
}

Mat3 FisherMatrix::block_tc() const {
    Mat3 b;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = m[i][j + 3];
    return b;
}

Mat3 FisherMatrix::block_cc() const {
    Mat3 b;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = m[i + 3][j + 3];
    return b;
}

FieldJacobian field_jacobian(const em_field::DipoleSource& s, double y, double z) {
    em_field::validate(s);

    const double xb = -s.x_C;
    const double yb = y - s.y_C;
    const double zb = z - s.z_C;
    const double r2 = xb * xb + yb * yb + zb * zb;
    if (r2 <= 0.0) throw em_field::DegenerateGeometry("observation point coincides with source");
    const double r = std::sqrt(r2);
    const double k = s.k();

    const complex<double> minus_i(0.0, -1.0);
    const complex<double> phase = std::exp(complex<double>(0.0, -k * r));
    const complex<double> chi_v = em_field::chi(s);
    const complex<double> pref_t = minus_i * chi_v * phase / r;
    const complex<double> pref_c = minus_i * chi_v * phase / (r2 * r2);
    const complex<double> ik(0.0, k);

    const double rx = xb / r, ry = yb / r, rz = zb / r;
    const double tx = s.t_x, ty = s.t_y, tz = s.t_z;

    FieldJacobian J;

    // Orientation block: de_a/dt_b = pref_t * (delta_ab - r_a r_b).
    const double rh[3] = {rx, ry, rz};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            J.d[a][b] = pref_t * ((a == b ? 1.0 : 0.0) - rh[a] * rh[b]);

    const double xb2 = xb * xb, yb2 = yb * yb, zb2 = zb * zb;
    // Transverse projections of the moment, one per field component.
    const double ax = tx * (yb2 + zb2) - xb * (ty * yb + tz * zb);
    const double ay = ty * (xb2 + zb2) - yb * (tx * xb + tz * zb);
    const double az = tz * (xb2 + yb2) - zb * (tx * xb + ty * yb);
    const double xyz3 = 3.0 * xb * yb * zb;

    J.d[0][3] = pref_c * (ik * xb * ax +
                          (3.0 * tx * xb * (yb2 + zb2) -
                           (ty * yb + tz * zb) * (2.0 * xb2 - yb2 - zb2)) / r);
    J.d[0][4] = pref_c * (ik * yb * ax -
                          (tx * yb * (2.0 * xb2 - yb2 - zb2) -
                           ty * xb * (xb2 - 2.0 * yb2 + zb2) + tz * xyz3) / r);
    J.d[0][5] = pref_c * (ik * zb * ax -
                          (tx * zb * (2.0 * xb2 - yb2 - zb2) + ty * xyz3 -
                           tz * xb * (xb2 + yb2 - 2.0 * zb2)) / r);

    J.d[1][3] = pref_c * (ik * xb * ay -
                          (ty * xb * (2.0 * yb2 - xb2 - zb2) -
                           tx * yb * (yb2 - 2.0 * xb2 + zb2) + tz * xyz3) / r);
    J.d[1][4] = pref_c * (ik * yb * ay +
                          (3.0 * ty * yb * (xb2 + zb2) -
                           (tx * xb + tz * zb) * (2.0 * yb2 - xb2 - zb2)) / r);
    J.d[1][5] = pref_c * (ik * zb * ay -
                          (ty * zb * (2.0 * yb2 - xb2 - zb2) + tx * xyz3 -
                           tz * yb * (xb2 + yb2 - 2.0 * zb2)) / r);

    J.d[2][3] = pref_c * (ik * xb * az -
                          (tz * xb * (2.0 * zb2 - xb2 - yb2) + ty * xyz3 -
                           tx * zb * (zb2 + yb2 - 2.0 * xb2)) / r);
    J.d[2][4] = pref_c * (ik * yb * az -
                          (tz * yb * (2.0 * zb2 - xb2 - yb2) -
                           ty * zb * (zb2 - 2.0 * yb2 + xb2) + tx * xyz3) / r);
    J.d[2][5] = pref_c * (ik * zb * az +
                          (3.0 * tz * zb * (xb2 + yb2) -
                           (tx * xb + ty * yb) * (2.0 * zb2 - yb2 - xb2)) / r);

    return J;
}

FisherMatrix assemble_fim(const em_field::DipoleSource& source,
                          const em_field::ObservationSurface& surface, double sigma2,
                          const quadrature::QuadTols& tols) {
    em_field::validate(source);
    if (!(surface.L > 0.0)) throw std::invalid_argument("surface side length must be positive");
    if (!(sigma2 > 0.0)) throw std::invalid_argument("noise power must be positive");

    const double h = surface.L / 2.0;
    const quadrature::Rect2 domain{-h, h, -h, h};
    const double scale = 2.0 / sigma2;

    FisherMatrix F;
    F.sigma2 = sigma2;
    F.length_scale = source.x_C;

    for (int mi = 0; mi < 6; ++mi) {
        for (int ni = mi; ni < 6; ++ni) {
            auto integrand = [&source, mi, ni](double y, double z) {
                const FieldJacobian J = field_jacobian(source, y, z);
                double acc = 0.0;
                for (int a = 0; a < 3; ++a)
                    acc += (J.d[a][mi] * std::conj(J.d[a][ni])).real();
                return acc;
            };
            const quadrature::QuadResult q = quadrature::integrate2d(integrand, domain, tols);
            F.m[mi][ni] = F.m[ni][mi] = scale * q.value;
            F.quad_error_bound += scale * q.abs_error_estimate;
            F.quad_cells += q.cells_used;
        }
    }
    return F;
}

Vec3d crb_known(const FisherMatrix& F) {
    const ScaledBlocks b = scaled_blocks(F);
    require_invertible(b.cc, "position information");
    const Eigen::Vector3d d = inverse_diagonal(b.cc);
    return {d(0) * b.s * b.s, d(1) * b.s * b.s, d(2) * b.s * b.s};
}

Vec3d crb_unknown(const FisherMatrix& F) {
    const ScaledBlocks b = scaled_blocks(F);
    require_invertible(b.tt, "orientation information");
    const Eigen::Matrix3d x = b.tt.ldlt().solve(b.tc);  // F_tt^{-1} F_tc
    const Eigen::Matrix3d schur = b.cc - b.tc.transpose() * x;
    require_invertible(schur, "effective position information");
    const Eigen::Vector3d d = inverse_diagonal(schur);
    return {d(0) * b.s * b.s, d(1) * b.s * b.s, d(2) * b.s * b.s};
}

double mil_residual(const FisherMatrix& F) {
    const ScaledBlocks b = scaled_blocks(F);
    require_invertible(b.tt, "orientation information");
    require_invertible(b.cc, "position information");

    const Eigen::Matrix3d schur_c = b.cc - b.tc.transpose() * b.tt.ldlt().solve(b.tc);
    require_invertible(schur_c, "effective position information");
    const Eigen::Vector3d lhs = inverse_diagonal(schur_c);

    const Eigen::Matrix3d cc_inv = b.cc.ldlt().solve(Eigen::Matrix3d::Identity());
    const Eigen::Matrix3d schur_t = b.tt - b.tc * cc_inv * b.tc.transpose();
    require_invertible(schur_t, "complementary orientation information");
    const Eigen::Matrix3d second =
        cc_inv * b.tc.transpose() * schur_t.ldlt().solve(b.tc * cc_inv);

    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double rhs = cc_inv(i, i) + second(i, i);
        worst = std::max(worst, std::abs(lhs(i) - rhs) / std::abs(lhs(i)));
    }
    return worst;
}

Vec3d delta_rcrb(const FisherMatrix& F) {
    const Vec3d known = crb_known(F);
    const Vec3d unknown = crb_unknown(F);
    Vec3d out{};
    for (int i = 0; i < 3; ++i) {
        const double diff = unknown[i] - known[i];
        out[i] = diff > 0.0 ? std::sqrt(diff / known[i]) : 0.0;
    }
    return out;
}

CrbReport crb_report(const FisherMatrix& F) {
    const ScaledBlocks b = scaled_blocks(F);
    CrbReport rep;
    rep.crb_known = crb_known(F);
    rep.crb_unknown = crb_unknown(F);
    rep.delta_rcrb = delta_rcrb(F);
    rep.cond_tt = condition_number(b.tt);
    rep.cond_cc = condition_number(b.cc);
    rep.cond_schur =
        condition_number(b.cc - b.tc.transpose() * b.tt.ldlt().solve(b.tc));
    rep.quad_error_bound = F.quad_error_bound;
    return rep;
}

}  // namespace holopos::fim
