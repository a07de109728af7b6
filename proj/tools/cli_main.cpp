// Command-line front end: emits the bound sweeps, maps, tables and estimator
// benchmarks as reproducible CSV, exposes a single-point field probe, and runs
// the self-validation suite.
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csv_output.hpp"
#include "holopos/cpl.hpp"
#include "holopos/em_field.hpp"
#include "holopos/fim.hpp"
#include "holopos/mle.hpp"
#include "run_config.hpp"
#include "validate_suite.hpp"

namespace hc = holopos::cli;
namespace he = holopos::em_field;
namespace hf = holopos::fim;
namespace hp = holopos::cpl;
namespace hm = holopos::mle;
namespace hq = holopos::quadrature;

namespace {

// Stream selection: --out path or stdout.
class OutputTarget {
  public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
    void finish() {
        if (file_.is_open()) {
            file_.flush();
            if (!file_) throw std::runtime_error("failed to write output file");
        }
    }

  private:
    std::ofstream file_;
};

struct NoiseOptionRefs {
    CLI::Option* snr = nullptr;
    CLI::Option* sigma2 = nullptr;
    CLI::Option* i_in = nullptr;
    CLI::Option* l_s = nullptr;
};

// Options shared by every computing subcommand.  `geometry` controls whether
// the source position/orientation is exposed (the centered-vertical table and
// distance sweep fix them by construction).
NoiseOptionRefs add_scenario_options(CLI::App& sub, hc::RunConfig& cfg, bool geometry) {
    if (geometry) {
        sub.add_option("--x-c", cfg.x_C, "Source depth x_C in meters")->capture_default_str();
        sub.add_option("--y-c", cfg.y_C, "Source lateral offset y_C in meters")
            ->capture_default_str();
        sub.add_option("--z-c", cfg.z_C, "Source vertical offset z_C in meters")
            ->capture_default_str();
        sub.add_option("--t-x", cfg.t_x, "Orientation x component")->capture_default_str();
        sub.add_option("--t-y", cfg.t_y, "Orientation y component")->capture_default_str();
        sub.add_option("--t-z", cfg.t_z, "Orientation z component")->capture_default_str();
    } else {
        sub.add_option("--x-c", cfg.x_C, "Source depth x_C in meters")->capture_default_str();
    }
    sub.add_option("--lambda", cfg.lambda, "Wavelength in meters")->capture_default_str();

    NoiseOptionRefs refs;
    refs.snr = sub.add_option("--snr-db", cfg.snr_db,
                              "SNR in dB, 10 log10(2 |chi|^2 / sigma^2); normalizes chi to 1 V")
                   ->capture_default_str();
    refs.sigma2 = sub.add_option("--sigma2", cfg.sigma2,
                                 "Noise variance in V^2/m^2 (explicit-variance route)");
    refs.i_in = sub.add_option("--i-in", cfg.I_in,
                               "Feed current in A (explicit-variance route; default 1)");
    refs.l_s = sub.add_option("--l-s", cfg.l_s,
                              "Transmit dipole length in meters (explicit-variance route; "
                              "default lambda/4)");
    sub.add_option("--quad-rel-tol", cfg.quad_rel_tol, "Quadrature relative tolerance")
        ->capture_default_str();
    sub.add_option("--quad-abs-tol", cfg.quad_abs_tol, "Quadrature absolute tolerance")
        ->capture_default_str();
    sub.add_option("--out", cfg.out_path, "Output CSV path (default: stdout)");
    return refs;
}

void finalize_noise_flags(hc::RunConfig& cfg, const NoiseOptionRefs& refs) {
    cfg.snr_given = refs.snr->count() > 0;
    cfg.sigma2_given = refs.sigma2->count() > 0;
    cfg.I_in_given = refs.i_in->count() > 0;
    cfg.l_s_given = refs.l_s->count() > 0;
}

std::string join_numbers(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        out += hc::format_number(values[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// crb-sweep: bounds against the surface side length.
// ---------------------------------------------------------------------------

struct CrbSweepArgs {
    hc::RunConfig cfg;
    std::vector<double> L_sweep{0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0, 20.0};
};

void run_crb_sweep(const CrbSweepArgs& args) {
    hc::require_strictly_increasing(args.L_sweep, "--L-sweep");
    const hc::ResolvedScenario sc = hc::resolve_scenario(args.cfg);
    const hq::QuadTols tols = hc::quad_tols(args.cfg);

    OutputTarget target(args.cfg.out_path);
    hc::CsvWriter csv(target.stream());
    hc::write_common_metadata(csv, "crb-sweep", args.cfg, sc);
    csv.add_metadata("L_sweep_m", join_numbers(args.L_sweep));
    csv.write_header({"L_m", "rcrb_x_m", "rcrb_y_m", "rcrb_z_m", "rcrb_u_x_m", "rcrb_u_y_m",
                      "rcrb_u_z_m", "asymptote_x_m"});

    for (double L : args.L_sweep) {
        const hf::FisherMatrix F = hf::assemble_fim(sc.source, he::ObservationSurface{L},
                                                    sc.sigma2, tols);
        const hf::CrbReport rep = hf::crb_report(F);
        const double asym_x = std::sqrt(
            hp::crb_asymptotic(sc.source.lambda, sc.snr_linear, L / sc.source.x_C)[0]);
        csv.begin_row();
        csv.add(L);
        for (int d = 0; d < 3; ++d) csv.add(std::sqrt(rep.crb_known[d]));
        for (int d = 0; d < 3; ++d) csv.add(std::sqrt(rep.crb_unknown[d]));
        csv.add(asym_x);
        csv.end_row();
    }
    target.finish();
}

// ---------------------------------------------------------------------------
// crb-map: unknown-orientation bounds over a grid of source offsets.
// ---------------------------------------------------------------------------

struct CrbMapArgs {
    hc::RunConfig cfg;
    double L = 3.0;
    double half_span = 1.0;
    int points = 9;
};

void run_crb_map(const CrbMapArgs& args) {
    if (args.points < 3 || args.points % 2 == 0)
        throw std::invalid_argument(
            "--map-points must be an odd number >= 3 so the grid contains the centered "
            "position (0, 0)");
    if (!(args.half_span > 0.0))
        throw std::invalid_argument("--map-half-span must be positive");
    const hc::ResolvedScenario sc = hc::resolve_scenario(args.cfg);
    const hq::QuadTols tols = hc::quad_tols(args.cfg);

    const int n = args.points;
    std::vector<double> offsets(n);
    for (int i = 0; i < n; ++i)
        offsets[i] = args.half_span * (2.0 * i / (n - 1) - 1.0);
    offsets[(n - 1) / 2] = 0.0;  // exact center

    std::vector<std::array<double, 3>> crb_u(static_cast<std::size_t>(n) * n);
    std::array<double, 3> center{};
    for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
            he::DipoleSource s = sc.source;
            s.y_C = offsets[iy];
            s.z_C = offsets[iz];
            const hf::FisherMatrix F = hf::assemble_fim(s, he::ObservationSurface{args.L},
                                                        sc.sigma2, tols);
            const hf::Vec3d u = hf::crb_unknown(F);
            crb_u[static_cast<std::size_t>(iy) * n + iz] = {u[0], u[1], u[2]};
            if (offsets[iy] == 0.0 && offsets[iz] == 0.0) center = {u[0], u[1], u[2]};
        }

    OutputTarget target(args.cfg.out_path);
    hc::CsvWriter csv(target.stream());
    hc::write_common_metadata(csv, "crb-map", args.cfg, sc);
    csv.add_metadata("L_m", args.L);
    csv.add_metadata("map_half_span_m", args.half_span);
    csv.add_metadata("map_points_per_axis", static_cast<long long>(n));
    csv.write_header({"y_C_m", "z_C_m", "rcrb_u_x_m", "rcrb_u_y_m", "rcrb_u_z_m", "norm_x_db",
                      "norm_y_db", "norm_z_db"});

    for (int iy = 0; iy < n; ++iy)
        for (int iz = 0; iz < n; ++iz) {
            const auto& u = crb_u[static_cast<std::size_t>(iy) * n + iz];
            csv.begin_row();
            csv.add(offsets[iy]);
            csv.add(offsets[iz]);
            for (int d = 0; d < 3; ++d) csv.add(std::sqrt(u[d]));
            for (int d = 0; d < 3; ++d) csv.add(10.0 * std::log10(u[d] / center[d]));
            csv.end_row();
        }
    target.finish();
}

// ---------------------------------------------------------------------------
// crb-distance: centered vertical dipole bounds against source depth.
// ---------------------------------------------------------------------------

struct CrbDistanceArgs {
    hc::RunConfig cfg;
    double L = 3.0;
    std::vector<double> x_sweep{1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 14.0, 20.0};
    std::vector<double> lambda_list{0.01, 0.1};
};

void run_crb_distance(const CrbDistanceArgs& args) {
    hc::require_strictly_increasing(args.x_sweep, "--x-sweep");
    hc::require_strictly_increasing(args.lambda_list, "--lambda-list");
    if (args.x_sweep.front() <= 0.0)
        throw std::invalid_argument("--x-sweep entries must be positive depths in front of "
                                    "the surface");
    const hc::ResolvedScenario sc = hc::resolve_scenario(args.cfg);
    const hq::QuadTols tols = hc::quad_tols(args.cfg);

    OutputTarget target(args.cfg.out_path);
    hc::CsvWriter csv(target.stream());
    hc::write_common_metadata(csv, "crb-distance", args.cfg, sc);
    csv.add_metadata("L_m", args.L);
    csv.add_metadata("x_sweep_m", join_numbers(args.x_sweep));
    csv.add_metadata("lambda_list_m", join_numbers(args.lambda_list));
    csv.write_header({"x_C_m", "lambda_m", "rcrb_x_m", "rcrb_y_m", "rcrb_z_m"});

    for (double lambda : args.lambda_list)
        for (double x : args.x_sweep) {
            const hp::CplParams p{args.L / x, 2.0 * 3.141592653589793238462643383279502884 /
                                                  lambda,
                                  x, sc.snr_linear};
            const hf::CrbReport rep = hp::crb_cpl(p, tols);
            csv.begin_row();
            csv.add(x);
            csv.add(lambda);
            for (int d = 0; d < 3; ++d) csv.add(std::sqrt(rep.crb_known[d]));
            csv.end_row();
        }
    target.finish();
}

// ---------------------------------------------------------------------------
// cpl-table: every centered-vertical-dipole quantity per aspect ratio.
// ---------------------------------------------------------------------------

struct CplTableArgs {
    hc::RunConfig cfg;
    std::vector<double> rho_list{0.5, 1.0, 5.0, 50.0, 1000.0};
};

void run_cpl_table(const CplTableArgs& args) {
    hc::require_strictly_increasing(args.rho_list, "--rho-list");
    const hc::ResolvedScenario sc = hc::resolve_scenario(args.cfg);
    const hq::QuadTols tols = hc::quad_tols(args.cfg);
    const double k = sc.source.k();

    OutputTarget target(args.cfg.out_path);
    hc::CsvWriter csv(target.stream());
    hc::write_common_metadata(csv, "cpl-table", args.cfg, sc);
    csv.add_metadata("rho_list", join_numbers(args.rho_list));
    csv.write_header({"rho",
                      "i1", "i2", "i3", "i4", "i5", "i6", "i7", "i8", "i9", "i10",
                      "quad_error_bound",
                      "i1_closed_vs_quad_abs",
                      "i3_lb", "i3_ub",
                      "ft11_lb", "ft11_ub", "ft22_lb", "ft22_ub",
                      "f_cc_x_per_m2", "f_cc_y_per_m2", "f_cc_z_per_m2",
                      "f_tt_x", "f_tt_y", "f_tt_z",
                      "f_tc_13_per_m", "f_tc_31_per_m",
                      "crb_x_m2", "crb_y_m2", "crb_z_m2",
                      "crb_u_x_m2", "crb_u_y_m2", "crb_u_z_m2",
                      "highfreq_crb_x_m2", "highfreq_crb_y_m2", "highfreq_regime_ok",
                      "asym_crb_x_m2", "asym_crb_y_m2", "asym_crb_z_m2"});

    for (double rho : args.rho_list) {
        const hp::CplParams p{rho, k, sc.source.x_C, sc.snr_linear};
        const hp::ScriptIntegrals si = hp::script_integrals(rho, tols);
        const auto [i3_lb, i3_ub] = hp::i3_bounds(rho);
        const hp::FtElementBounds ft = hp::ft_element_bounds(rho);
        const hp::CplFimBlocks blocks = hp::fim_blocks_cpl(p, tols);
        const hf::CrbReport rep = hp::crb_cpl(p, tols);
        const hp::HighFreqCrb hfq = hp::crb_highfreq(p, tols);
        const std::array<double, 3> asym =
            hp::crb_asymptotic(sc.source.lambda, sc.snr_linear, rho);

        const double a = rho / 2.0;
        const hq::QuadResult i1_quad = hq::integrate2d(
            [](double u, double v) {
                const double sden = 1.0 + u * u + v * v;
                return (1.0 + v * v) / (sden * sden * sden);
            },
            hq::Rect2{-a, a, -a, a}, tols);

        csv.begin_row();
        csv.add(rho);
        for (double v : {si.i1, si.i2, si.i3, si.i4, si.i5, si.i6, si.i7, si.i8, si.i9, si.i10})
            csv.add(v);
        csv.add(si.quad_error_bound);
        csv.add(std::abs(i1_quad.value - si.i1));
        csv.add(i3_lb);
        csv.add(i3_ub);
        for (double v : {ft.lb11, ft.ub11, ft.lb22, ft.ub22}) csv.add(v);
        for (double v : blocks.f_cc_diag) csv.add(v);
        for (double v : blocks.f_tt_diag) csv.add(v);
        csv.add(blocks.f_tc_13);
        csv.add(blocks.f_tc_31);
        for (double v : rep.crb_known) csv.add(v);
        for (double v : rep.crb_unknown) csv.add(v);
        csv.add(hfq.crb_x);
        csv.add(hfq.crb_y);
        csv.add(static_cast<long long>(hfq.regime_ok ? 1 : 0));
        for (double v : asym) csv.add(v);
        csv.end_row();
    }
    target.finish();
}

// ---------------------------------------------------------------------------
// mle-benchmark: Monte-Carlo RMSE against both bound flavors.
// ---------------------------------------------------------------------------

struct MleBenchmarkArgs {
    hc::RunConfig cfg;
    std::vector<double> L_sweep{2.0};
    std::vector<std::string> estimators{"analytic", "hu-scalar", "planar"};
    bool orientation_known = false;
    double l_r = 0.0;  // 0 = lambda/10
    int trials = 200;
    std::uint64_t seed = 0;
    int workers = 0;
    std::vector<double> box_x, box_y{-1.0, 1.0}, box_z{-1.0, 1.0};
};

hm::EstimatorKind estimator_kind(const std::string& name) {
    static const std::map<std::string, hm::EstimatorKind> kinds{
        {"analytic", hm::EstimatorKind::kAnalytic},
        {"hu-scalar", hm::EstimatorKind::kHuScalar},
        {"planar", hm::EstimatorKind::kPlanar}};
    return kinds.at(name);
}

void run_mle_benchmark(const MleBenchmarkArgs& args) {
    hc::require_strictly_increasing(args.L_sweep, "--L-sweep");
    if (args.estimators.empty())
        throw std::invalid_argument("--estimator must list at least one estimator");
    if (args.trials < 1) throw std::invalid_argument("--trials must be at least 1");
    const hc::ResolvedScenario sc = hc::resolve_scenario(args.cfg);

    const double l_r = args.l_r > 0.0 ? args.l_r : sc.source.lambda / 10.0;
    std::vector<double> box_x = args.box_x;
    if (box_x.empty()) box_x = {sc.source.x_C - 1.0, sc.source.x_C + 1.0};

    hm::MleConfig mle_cfg;
    mle_cfg.orientation_known = args.orientation_known;
    mle_cfg.known_orientation = {sc.source.t_x, sc.source.t_y, sc.source.t_z};
    mle_cfg.box = {{box_x[0], args.box_y[0], args.box_z[0]},
                   {box_x[1], args.box_y[1], args.box_z[1]}};
    mle_cfg.trials = args.trials;
    mle_cfg.seed = args.seed;
    mle_cfg.workers = args.workers;

    OutputTarget target(args.cfg.out_path);
    hc::CsvWriter csv(target.stream());
    hc::write_common_metadata(csv, "mle-benchmark", args.cfg, sc);
    csv.add_metadata("seed", static_cast<long long>(args.seed));
    csv.add_metadata("trials", static_cast<long long>(args.trials));
    csv.add_metadata("l_r_m", l_r);
    csv.add_metadata("box_x_m", join_numbers({mle_cfg.box.lo.x, mle_cfg.box.hi.x}));
    csv.add_metadata("box_y_m", join_numbers({mle_cfg.box.lo.y, mle_cfg.box.hi.y}));
    csv.add_metadata("box_z_m", join_numbers({mle_cfg.box.lo.z, mle_cfg.box.hi.z}));
    csv.write_header({"L_m", "estimator", "orientation_known", "rmse_x_m", "rmse_y_m",
                      "rmse_z_m", "rcrb_x_m", "rcrb_y_m", "rcrb_z_m", "rcrbz_x_m", "rcrbz_y_m",
                      "rcrbz_z_m", "trials", "failures", "seed"});

    for (double L : args.L_sweep) {
        // Full-vector-field bound over the continuous surface, and the
        // z-component bound of the sampled receive grid actually measured.
        const hf::FisherMatrix F = hf::assemble_fim(sc.source, he::ObservationSurface{L},
                                                    sc.sigma2, hc::quad_tols(args.cfg));
        const hf::Vec3d crb_full = args.orientation_known ? hf::crb_known(F)
                                                          : hf::crb_unknown(F);
        const hm::ReceiverGrid grid = hm::build_grid(L, sc.source.lambda, l_r);
        const std::array<double, 3> crbz = hm::crb_z_component(sc.source, grid, sc.sigma2);

        for (const std::string& name : args.estimators) {
            hm::MleConfig cfg = mle_cfg;
            cfg.estimator = estimator_kind(name);
            const hm::Scenario scenario{sc.source, L, l_r, sc.sigma2};
            const hm::RmseSummary summary = hm::monte_carlo(cfg, scenario);

            csv.begin_row();
            csv.add(L);
            csv.add(name);
            csv.add(static_cast<long long>(args.orientation_known ? 1 : 0));
            for (double v : summary.rmse) csv.add(v);
            for (double v : crb_full) csv.add(std::sqrt(v));
            for (double v : crbz) csv.add(std::sqrt(v));
            csv.add(static_cast<long long>(summary.trials));
            csv.add(static_cast<long long>(summary.convergence_failures));
            csv.add(static_cast<long long>(args.seed));
            csv.end_row();
        }
    }
    target.finish();
}

// ---------------------------------------------------------------------------
// field-probe: all four field models at one surface point.
// ---------------------------------------------------------------------------

struct FieldProbeArgs {
    hc::RunConfig cfg;
    double y = 0.0;
    double z = 0.0;
};

void run_field_probe(const FieldProbeArgs& args) {
    const hc::ResolvedScenario sc = hc::resolve_scenario(args.cfg);

    OutputTarget target(args.cfg.out_path);
    hc::CsvWriter csv(target.stream());
    hc::write_common_metadata(csv, "field-probe", args.cfg, sc);
    csv.add_metadata("probe_y_m", args.y);
    csv.add_metadata("probe_z_m", args.z);
    csv.write_header({"model", "component", "re_v_per_m", "im_v_per_m"});

    const auto emit = [&csv](const std::string& model, const std::string& component,
                             std::complex<double> value) {
        csv.begin_row();
        csv.add(model);
        csv.add(component);
        csv.add(value.real());
        csv.add(value.imag());
        csv.end_row();
    };
    const auto emit_vec = [&emit](const std::string& model, const he::ComplexVec3& e) {
        emit(model, "ex", e.ex);
        emit(model, "ey", e.ey);
        emit(model, "ez", e.ez);
    };

    emit_vec("exact-dyadic", he::dyadic_green_field(sc.source, args.y, args.z));
    emit_vec("analytic", he::analytic_field(sc.source, args.y, args.z));
    emit("hu-scalar", "scalar", he::hu_scalar_signal(sc.source, args.y, args.z));
    emit("planar", "scalar", he::planar_signal(sc.source, args.y, args.z));
    target.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dipole-positioning bounds and maximum-likelihood benchmarks"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML/INI file (sections name the "
                                   "subcommand; command-line flags override file values)");
    app.allow_config_extras(CLI::config_extras_mode::error);

    CrbSweepArgs sweep;
    sweep.cfg.lambda = 0.01;
    auto* sweep_cmd = app.add_subcommand(
        "crb-sweep", "Position bounds against the observation surface side length");
    NoiseOptionRefs sweep_noise = add_scenario_options(*sweep_cmd, sweep.cfg, true);
    sweep_cmd->add_option("--L-sweep", sweep.L_sweep,
                          "Surface side lengths in meters (strictly increasing)")
        ->delimiter(',')
        ->capture_default_str();

    CrbMapArgs map;
    auto* map_cmd = app.add_subcommand(
        "crb-map", "Unknown-orientation bounds over a grid of source offsets");
    NoiseOptionRefs map_noise = add_scenario_options(*map_cmd, map.cfg, true);
    map_cmd->add_option("--L", map.L, "Surface side length in meters")->capture_default_str();
    map_cmd->add_option("--map-half-span", map.half_span,
                        "Half-extent of the (y_C, z_C) grid in meters")
        ->capture_default_str();
    map_cmd->add_option("--map-points", map.points, "Grid points per axis (odd, >= 3)")
        ->capture_default_str();

    CrbDistanceArgs distance;
    auto* distance_cmd = app.add_subcommand(
        "crb-distance",
        "Centered-vertical-dipole bounds against source depth, per wavelength");
    NoiseOptionRefs distance_noise = add_scenario_options(*distance_cmd, distance.cfg, false);
    distance_cmd->add_option("--L", distance.L, "Surface side length in meters")
        ->capture_default_str();
    distance_cmd->add_option("--x-sweep", distance.x_sweep,
                             "Source depths in meters (strictly increasing)")
        ->delimiter(',')
        ->capture_default_str();
    distance_cmd
        ->add_option("--lambda-list", distance.lambda_list,
                     "Wavelengths in meters (strictly increasing)")
        ->delimiter(',')
        ->capture_default_str();

    CplTableArgs table;
    auto* table_cmd = app.add_subcommand(
        "cpl-table",
        "Surface integrals, Fisher blocks, bounds and limits of the centered vertical dipole");
    NoiseOptionRefs table_noise = add_scenario_options(*table_cmd, table.cfg, false);
    table_cmd->add_option("--rho-list", table.rho_list,
                          "Aspect ratios L/x_C (strictly increasing)")
        ->delimiter(',')
        ->capture_default_str();

    MleBenchmarkArgs bench;
    bench.cfg.lambda = 0.1;
    bench.cfg.snr_db = 30.0;
    auto* bench_cmd = app.add_subcommand(
        "mle-benchmark", "Monte-Carlo estimator RMSE against the position bounds");
    NoiseOptionRefs bench_noise = add_scenario_options(*bench_cmd, bench.cfg, true);
    bench_cmd->add_option("--L-sweep", bench.L_sweep,
                          "Surface side lengths in meters (strictly increasing)")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd
        ->add_option("--estimator", bench.estimators,
                     "Estimators to benchmark (analytic, hu-scalar, planar)")
        ->delimiter(',')
        ->check(CLI::IsMember({"analytic", "hu-scalar", "planar"}))
        ->capture_default_str();
    bench_cmd->add_flag("--orientation-known", bench.orientation_known,
                        "Give the analytic estimator the true orientation");
    bench_cmd->add_option("--l-r", bench.l_r,
                          "Receive dipole length in meters (default lambda/10)");
    bench_cmd->add_option("--trials", bench.trials, "Monte-Carlo trials")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Master RNG seed (required for reproducibility)")
        ->required();
    bench_cmd->add_option("--workers", bench.workers,
                          "Worker threads (0 = hardware concurrency; results do not depend "
                          "on this)")
        ->capture_default_str();
    bench_cmd->add_option("--box-x", bench.box_x,
                          "Search interval for x in meters (default x_C +- 1)")
        ->expected(2)
        ->delimiter(',');
    bench_cmd->add_option("--box-y", bench.box_y, "Search interval for y in meters")
        ->expected(2)
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--box-z", bench.box_z, "Search interval for z in meters")
        ->expected(2)
        ->delimiter(',')
        ->capture_default_str();

    FieldProbeArgs probe;
    auto* probe_cmd = app.add_subcommand(
        "field-probe", "Field of all four models at one point of the observation plane");
    NoiseOptionRefs probe_noise = add_scenario_options(*probe_cmd, probe.cfg, true);
    probe_cmd->add_option("--y", probe.y, "Probe point y in meters")->capture_default_str();
    probe_cmd->add_option("--z", probe.z, "Probe point z in meters")->capture_default_str();

    auto* validate_cmd = app.add_subcommand(
        "validate", "Run the invariant suite and report pass/fail with measured margins");

    // Let `subcommand --config file` reach the parent's --config option.
    for (CLI::App* sub : app.get_subcommands(
             [](const CLI::App*) { return true; }))
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep_cmd->parsed()) {
            finalize_noise_flags(sweep.cfg, sweep_noise);
            run_crb_sweep(sweep);
        } else if (map_cmd->parsed()) {
            finalize_noise_flags(map.cfg, map_noise);
            run_crb_map(map);
        } else if (distance_cmd->parsed()) {
            finalize_noise_flags(distance.cfg, distance_noise);
            run_crb_distance(distance);
        } else if (table_cmd->parsed()) {
            finalize_noise_flags(table.cfg, table_noise);
            run_cpl_table(table);
        } else if (bench_cmd->parsed()) {
            finalize_noise_flags(bench.cfg, bench_noise);
            run_mle_benchmark(bench);
        } else if (probe_cmd->parsed()) {
            finalize_noise_flags(probe.cfg, probe_noise);
            run_field_probe(probe);
        } else if (validate_cmd->parsed()) {
            return hc::run_validate_suite(std::cout) == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
