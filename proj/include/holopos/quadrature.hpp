#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace holopos::quadrature {

// Axis-aligned integration rectangle.
struct Rect2 {
    double u_min;
    double u_max;
    double v_min;
    double v_max;
};

struct QuadResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t cells_used = 0;
};

struct QuadResultComplex {
    std::complex<double> value{0.0, 0.0};
    double abs_error_estimate = 0.0;
    std::size_t cells_used = 0;
};

// Tolerance bundle shared by every caller that owns a quadrature budget.
// Defaults leave ~3 digits of headroom below the 1e-6 tolerances used by the
// closed-form cross-checks, since the integrals feed a 6x6 matrix inverse.
struct QuadTols {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::size_t max_cells = 1'000'000;
};

// The integrand returned NaN or Inf.
struct NonFinite : std::runtime_error {
    NonFinite(double u, double v)
        : std::runtime_error("integrand is not finite at (" + std::to_string(u) + ", " +
                             std::to_string(v) + ")"),
          u(u),
          v(v) {}
    double u;
    double v;
};

// Cell budget exhausted before the error target was met. The best available
// estimate is attached so callers can decide whether it is still usable.
struct AccuracyNotReached : std::runtime_error {
    explicit AccuracyNotReached(const QuadResultComplex& partial)
        : std::runtime_error("quadrature cell budget exhausted; achieved abs error " +
                             std::to_string(partial.abs_error_estimate)),
          partial(partial) {}
    QuadResultComplex partial;
};

// Adaptive tensor-product Gauss-Legendre integration of a real scalar f over
// an axis-aligned rectangle. Cells are bisected along the axis with the larger
// estimated error until the total satisfies
//   abs_error_estimate <= max(abs_tol, rel_tol * |value|).
// Deterministic: refinement order and the final summation order are fixed,
// independent of any parallelism in the caller.
QuadResult integrate2d(const std::function<double(double, double)>& f, const Rect2& domain,
                       double rel_tol = 1e-9, double abs_tol = 1e-12,
                       std::size_t max_cells = 1'000'000);

QuadResult integrate2d(const std::function<double(double, double)>& f, const Rect2& domain,
                       const QuadTols& tols);

// Component-wise complex integration: real and imaginary parts are integrated
// independently with the same tolerances; error estimates add.
QuadResultComplex integrate2d_complex(const std::function<std::complex<double>(double, double)>& f,
                                      const Rect2& domain, double rel_tol = 1e-9,
                                      double abs_tol = 1e-12, std::size_t max_cells = 1'000'000);

QuadResultComplex integrate2d_complex(const std::function<std::complex<double>(double, double)>& f,
                                      const Rect2& domain, const QuadTols& tols);

}  // namespace holopos::quadrature
