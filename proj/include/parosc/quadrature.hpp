// quadrature.hpp — Adaptive Gauss-Kronrod panels and the Chebyshev band grid
#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include "parosc/model.hpp"

namespace parosc {

struct QuadResult {
    cplx value{};
    double error = 0.0;
    int evals = 0;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1] (QUADPACK values).
inline constexpr std::array<double, 8> gk_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kron_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
QuadResult gk15_panel(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    cplx kron = kron_w[7] * f(mid);
    cplx gauss = gauss_w[3] * f(mid);
    for (int i = 0; i < 7; ++i) {
        const cplx flo = f(mid - half * gk_nodes[i]);
        const cplx fhi = f(mid + half * gk_nodes[i]);
        kron += kron_w[i] * (flo + fhi);
        if (i % 2 == 1) gauss += gauss_w[i / 2] * (flo + fhi);
    }
    QuadResult r;
    r.value = half * kron;
    r.error = std::abs(half * (kron - gauss));
    r.evals = 15;
    return r;
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration of a complex-valued f on [a, b].
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double atol = 1e-12,
                              double rtol = 1e-10, int max_panels = 4000) {
    struct Panel {
        double a, b, err;
        cplx val;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    std::priority_queue<Panel> heap;
    QuadResult first = detail::gk15_panel(f, a, b);
    heap.push({a, b, first.error, first.value});
    cplx total = first.value;
    double errsum = first.error;
    int evals = first.evals, n = 1;
    while (errsum > atol + rtol * std::abs(total) && n < max_panels) {
        Panel top = heap.top();
        heap.pop();
        const double mid = 0.5 * (top.a + top.b);
        QuadResult l = detail::gk15_panel(f, top.a, mid);
        QuadResult r = detail::gk15_panel(f, mid, top.b);
        total += l.value + r.value - top.val;
        errsum += l.error + r.error - top.err;
        heap.push({top.a, mid, l.error, l.value});
        heap.push({mid, top.b, r.error, r.value});
        evals += l.evals + r.evals;
        ++n;
    }
    return {total, errsum, evals};
}

// Chebyshev-Gauss grid on the band, Delta_j = deltaB + B cos(theta_j).
// The cosine substitution absorbs the square-root edge behavior of g^2, so
// any integrand carrying at least one explicit g^2 factor is smooth in theta.
struct BandGrid {
    std::vector<double> theta;    // theta_j = j pi / (n+1), j = 1..n
    std::vector<double> delta;    // band frequencies, descending from band_hi
    std::vector<double> w_plain;  // weights for  int F(Delta) dDelta
    std::vector<double> w_g2;     // weights for  int g^2(Delta) phi(Delta) dDelta

    BandGrid(int n, const ModelParams& p) {
        if (n < 2) throw ConfigError("BandGrid: need at least 2 nodes");
        theta.resize(n);
        delta.resize(n);
        w_plain.resize(n);
        w_g2.resize(n);
        const double step = std::numbers::pi / (n + 1);
        for (int j = 0; j < n; ++j) {
            theta[j] = (j + 1) * step;
            const double s = std::sin(theta[j]);
            delta[j] = p.deltaB + p.bandB * std::cos(theta[j]);
            w_plain[j] = p.bandB * step * s;
            w_g2[j] = 2.0 * p.g0 * p.g0 * p.bandB * s * s / (n + 1);
        }
    }

    int size() const { return static_cast<int>(delta.size()); }
};

}  // namespace parosc
