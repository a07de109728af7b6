#include "holopos/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace holopos::quadrature {
namespace {

// Embedded Gauss-Legendre pair on [-1,1]. Both rules contain the origin, so
// their union has 21 distinct abscissae per axis and one panel evaluation
// serves all four tensor estimates Q(7,7), Q(7,15), Q(15,7), Q(15,15).
constexpr int kN7 = 7;
constexpr int kN15 = 15;
constexpr int kNodes = kN7 + kN15 - 1;  // shared origin

constexpr double kX7[kN7] = {
    -0.94910791234275852453, -0.74153118559939443986, -0.40584515137739716691,
    0.0,
    0.40584515137739716691,  0.74153118559939443986,  0.94910791234275852453,
};
constexpr double kW7[kN7] = {
    0.12948496616886969327, 0.27970539148927666790, 0.38183005050511894495,
    0.41795918367346938776,
    0.38183005050511894495, 0.27970539148927666790, 0.12948496616886969327,
};
constexpr double kX15[kN15] = {
    -0.98799251802048542849, -0.93727339240070590431, -0.84820658341042721620,
    -0.72441773136017004742, -0.57097217260853884754, -0.39415134707756336990,
    -0.20119409399743452230, 0.0,                     0.20119409399743452230,
    0.39415134707756336990,  0.57097217260853884754,  0.72441773136017004742,
    0.84820658341042721620,  0.93727339240070590431,  0.98799251802048542849,
};
constexpr double kW15[kN15] = {
    0.030753241996117268355, 0.070366047488108124709, 0.10715922046717193501,
    0.13957067792615431445,  0.16626920581699393355,  0.18616100001556221103,
    0.19843148532711157646,  0.20257824192556127288,  0.19843148532711157646,
    0.18616100001556221103,  0.16626920581699393355,  0.13957067792615431445,
    0.10715922046717193501,  0.070366047488108124709, 0.030753241996117268355,
};

struct UnionRule {
    double x[kNodes];    // sorted union of the two rules' nodes
    double w7[kNodes];   // 7-point weights scattered onto the union (0 elsewhere)
    double w15[kNodes];  // 15-point weights scattered onto the union
};

UnionRule build_union_rule() {
    UnionRule r{};
    std::vector<double> xs(kX15, kX15 + kN15);
    for (double x : kX7) {
        if (x != 0.0) xs.push_back(x);  // origin is shared
    }
    std::sort(xs.begin(), xs.end());
    for (int i = 0; i < kNodes; ++i) {
        r.x[i] = xs[i];
        r.w7[i] = 0.0;
        r.w15[i] = 0.0;
        for (int j = 0; j < kN7; ++j)
            if (xs[i] == kX7[j]) r.w7[i] = kW7[j];
        for (int j = 0; j < kN15; ++j)
            if (xs[i] == kX15[j]) r.w15[i] = kW15[j];
    }
    return r;
}

const UnionRule& union_rule() {
    static const UnionRule r = build_union_rule();
    return r;
}

struct Cell {
    Rect2 rect;
    double q1515;
    double err_u;    // |Q(15,15) - Q(7,15)|, error attributed to the u axis
    double err_v;    // |Q(15,15) - Q(15,7)|
    double err;      // |Q(15,15) - Q(7,7)|
    std::size_t seq; // creation order; ties in the heap resolve on this
};

Cell evaluate_cell(const std::function<double(double, double)>& f, const Rect2& rect,
                   std::size_t seq) {
    const UnionRule& r = union_rule();
    const double cu = 0.5 * (rect.u_min + rect.u_max);
    const double hu = 0.5 * (rect.u_max - rect.u_min);
    const double cv = 0.5 * (rect.v_min + rect.v_max);
    const double hv = 0.5 * (rect.v_max - rect.v_min);

    double vals[kNodes][kNodes];
    for (int i = 0; i < kNodes; ++i) {
        const double u = cu + hu * r.x[i];
        for (int j = 0; j < kNodes; ++j) {
            const double v = cv + hv * r.x[j];
            const double y = f(u, v);
            if (!std::isfinite(y)) throw NonFinite(u, v);
            vals[i][j] = y;
        }
    }

    // Contract v first, once per (u-node, v-rule), then contract u.
    double q77 = 0.0, q715 = 0.0, q157 = 0.0, q1515 = 0.0;
    for (int i = 0; i < kNodes; ++i) {
        double s7 = 0.0, s15 = 0.0;
        for (int j = 0; j < kNodes; ++j) {
            s7 += r.w7[j] * vals[i][j];
            s15 += r.w15[j] * vals[i][j];
        }
        q77 += r.w7[i] * s7;
        q715 += r.w7[i] * s15;
        q157 += r.w15[i] * s7;
        q1515 += r.w15[i] * s15;
    }
    const double scale = hu * hv;
    q77 *= scale;
    q715 *= scale;
    q157 *= scale;
    q1515 *= scale;

    Cell c;
    c.rect = rect;
    c.q1515 = q1515;
    c.err_u = std::abs(q1515 - q715);
    c.err_v = std::abs(q1515 - q157);
    c.err = std::abs(q1515 - q77);
    c.seq = seq;
    return c;
}

struct WorstFirst {
    // priority_queue keeps the *largest*; we want the largest error on top,
    // with older cells winning ties so refinement order is reproducible.
    bool operator()(const Cell& a, const Cell& b) const {
        if (a.err != b.err) return a.err < b.err;
        return a.seq > b.seq;
    }
};

QuadResult sum_leaves(std::vector<Cell> leaves) {
    // Fixed summation order (creation sequence) keeps the result bit-stable.
    std::sort(leaves.begin(), leaves.end(),
              [](const Cell& a, const Cell& b) { return a.seq < b.seq; });
    QuadResult out;
    for (const Cell& c : leaves) {
        out.value += c.q1515;
        out.abs_error_estimate += c.err;
    }
    return out;
}

// Core loop shared by the throwing wrappers; reports budget exhaustion via the
// flag so the complex wrapper can assemble a two-component partial result.
QuadResult integrate_scalar(const std::function<double(double, double)>& f, const Rect2& domain,
                            double rel_tol, double abs_tol, std::size_t max_cells,
                            bool& reached) {
    if (!(domain.u_min < domain.u_max) || !(domain.v_min < domain.v_max) ||
        !std::isfinite(domain.u_min) || !std::isfinite(domain.u_max) ||
        !std::isfinite(domain.v_min) || !std::isfinite(domain.v_max)) {
        throw std::invalid_argument("integrate2d: domain must be a finite rectangle");
    }
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_cells == 0) {
        throw std::invalid_argument("integrate2d: tolerances must be positive");
    }

    std::priority_queue<Cell, std::vector<Cell>, WorstFirst> heap;
    std::size_t seq = 0;
    std::size_t cells_used = 1;
    heap.push(evaluate_cell(f, domain, seq++));
    double total = heap.top().q1515;
    double total_err = heap.top().err;

    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (cells_used + 2 > max_cells) break;
        Cell worst = heap.top();
        heap.pop();
        total -= worst.q1515;
        total_err -= worst.err;

        Rect2 a = worst.rect, b = worst.rect;
        if (worst.err_u >= worst.err_v) {
            const double mid = 0.5 * (worst.rect.u_min + worst.rect.u_max);
            a.u_max = mid;
            b.u_min = mid;
        } else {
            const double mid = 0.5 * (worst.rect.v_min + worst.rect.v_max);
            a.v_max = mid;
            b.v_min = mid;
        }
        for (const Rect2& half : {a, b}) {
            Cell c = evaluate_cell(f, half, seq++);
            total += c.q1515;
            total_err += c.err;
            heap.push(c);
        }
        cells_used += 2;
    }

    std::vector<Cell> leaves;
    leaves.reserve(heap.size());
    while (!heap.empty()) {
        leaves.push_back(heap.top());
        heap.pop();
    }
    QuadResult out = sum_leaves(std::move(leaves));
    out.cells_used = cells_used;
    reached = out.abs_error_estimate <= std::max(abs_tol, rel_tol * std::abs(out.value));
    return out;
}

}  // namespace

QuadResult integrate2d(const std::function<double(double, double)>& f, const Rect2& domain,
                       double rel_tol, double abs_tol, std::size_t max_cells) {
    bool reached = false;
    QuadResult r = integrate_scalar(f, domain, rel_tol, abs_tol, max_cells, reached);
    if (!reached) {
        QuadResultComplex partial;
        partial.value = {r.value, 0.0};
        partial.abs_error_estimate = r.abs_error_estimate;
        partial.cells_used = r.cells_used;
        throw AccuracyNotReached(partial);
    }
    return r;
}

QuadResult integrate2d(const std::function<double(double, double)>& f, const Rect2& domain,
                       const QuadTols& tols) {
    return integrate2d(f, domain, tols.rel_tol, tols.abs_tol, tols.max_cells);
}

QuadResultComplex integrate2d_complex(const std::function<std::complex<double>(double, double)>& f,
                                      const Rect2& domain, double rel_tol, double abs_tol,
                                      std::size_t max_cells) {
    bool re_ok = false, im_ok = false;
    QuadResult re = integrate_scalar([&f](double u, double v) { return f(u, v).real(); }, domain,
                                     rel_tol, abs_tol, max_cells, re_ok);
    QuadResult im = integrate_scalar([&f](double u, double v) { return f(u, v).imag(); }, domain,
                                     rel_tol, abs_tol, max_cells, im_ok);
    QuadResultComplex out;
    out.value = {re.value, im.value};
    out.abs_error_estimate = re.abs_error_estimate + im.abs_error_estimate;
    out.cells_used = re.cells_used + im.cells_used;
    if (!re_ok || !im_ok) throw AccuracyNotReached(out);
    return out;
}

QuadResultComplex integrate2d_complex(const std::function<std::complex<double>(double, double)>& f,
                                      const Rect2& domain, const QuadTols& tols) {
    return integrate2d_complex(f, domain, tols.rel_tol, tols.abs_tol, tols.max_cells);
}

}  // namespace holopos::quadrature
