// analytic.hpp — Sheet-resolved self-energy, effective Liouvillian, Green function
#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "parosc/model.hpp"
#include "parosc/quadrature.hpp"

namespace parosc {

enum class Sheet { First, Second };

// Branch choice for the two self-energy factors entering the Green function:
// `plus` selects the sheet of Sigma(z), `minus` the sheet of Sigma(-z).
// The explicit branch functions obey the Schwarz reflection
// Sigma_s(conj z) = conj(Sigma_s(z)), so conjugating a point keeps the same
// selector; G(-z) maps to the swapped selector.
struct SheetSelector {
    Sheet plus = Sheet::First;
    Sheet minus = Sheet::First;

    SheetSelector swapped() const { return {minus, plus}; }
    bool operator==(const SheetSelector&) const = default;

    static SheetSelector first() { return {Sheet::First, Sheet::First}; }
    static SheetSelector second() { return {Sheet::Second, Sheet::Second}; }

    // Sheet reached by analytic continuation from the upper half-plane.
    // A point in the lower half-plane picks the second sheet of each factor
    // whose branch cut lies above it.
    static SheetSelector physical(cplx z, const ModelParams& p) {
        SheetSelector s;
        if (z.imag() < 0.0) {
            if (std::abs(z.real() - p.deltaB) < p.bandB) s.plus = Sheet::Second;
            if (std::abs(z.real() + p.deltaB) < p.bandB) s.minus = Sheet::Second;
        }
        return s;
    }
};

struct ComplexPoint {
    cplx z{};
    SheetSelector sheet{};
};

namespace detail {

// Two-valued square root w = sqrt(zeta^2 - B^2) with |zeta - w| < B.
// On the cut itself (where both candidates give |zeta - w| = B) the value
// continued from the upper half-plane is returned.
inline cplx branch_sqrt(cplx zeta, double B) {
    cplx w = std::sqrt(zeta * zeta - B * B);
    const double dm = std::abs(zeta - w), dp = std::abs(zeta + w);
    if (dp < dm) {
        w = -w;
    } else if (dp == dm) {
        // real zeta inside the cut: i0+ limit, w = +i sqrt(B^2 - zeta^2)
        w = cplx(0.0, std::sqrt(std::max(B * B - zeta.real() * zeta.real(), 0.0)));
    }
    return w;
}

}  // namespace detail

// Self-energy Sigma(z) = 2 (g0/B)^2 [zeta -/+ sqrt(zeta^2 - B^2)], zeta = z - deltaB.
// First sheet takes the upper sign and decays as g0^2/z at infinity; the
// second sheet flips the sign of the square-root term.
inline cplx self_energy(cplx z, Sheet sheet, const ModelParams& p) {
    if (p.g0 == 0.0) return {};
    const cplx zeta = z - p.deltaB;
    const double c = 2.0 * (p.g0 / p.bandB) * (p.g0 / p.bandB);
    if (std::abs(zeta - p.bandB) < 1e-13 * p.bandB || std::abs(zeta + p.bandB) < 1e-13 * p.bandB)
        throw BranchPointError("self_energy: z is a band-edge branch point");
    const cplx w = detail::branch_sqrt(zeta, p.bandB);
    return sheet == Sheet::First ? c * (zeta - w) : c * (zeta + w);
}

inline cplx self_energy_dz(cplx z, Sheet sheet, const ModelParams& p) {
    if (p.g0 == 0.0) return {};
    const cplx zeta = z - p.deltaB;
    const double c = 2.0 * (p.g0 / p.bandB) * (p.g0 / p.bandB);
    const cplx w = detail::branch_sqrt(zeta, p.bandB);
    return sheet == Sheet::First ? c * (1.0 - zeta / w) : c * (1.0 + zeta / w);
}

// Defining integral of the self-energy, evaluated by adaptive quadrature in
// the theta substitution Delta = deltaB + B cos(theta). Independent oracle
// for the closed form (first sheet) away from the cut.
inline cplx self_energy_quadrature(cplx z, const ModelParams& p, double atol = 1e-13,
                                   double rtol = 1e-12) {
    if (z.imag() == 0.0 && p.in_band(z.real()))
        throw BranchPointError("self_energy_quadrature: z on the cut; use +/- i eps offsets");
    const double c = 2.0 * p.g0 * p.g0 / std::numbers::pi;
    auto integrand = [&](double th) {
        const double s = std::sin(th);
        return c * s * s / (z - p.deltaB - p.bandB * std::cos(th));
    };
    return integrate_adaptive(integrand, 0.0, std::numbers::pi, atol, rtol).value;
}

// Effective Liouvillian L_eff(z) = [[d0 + Sigma(z), f0], [-f0, -d0 - Sigma(-z)]].
struct Mat2 {
    cplx a11, a12, a21, a22;
};

inline Mat2 effective_liouvillian(const ComplexPoint& zp, const ModelParams& p) {
    const cplx sp = self_energy(zp.z, zp.sheet.plus, p);
    const cplx sm = self_energy(-zp.z, zp.sheet.minus, p);
    return {p.delta0 + sp, cplx(p.f0), cplx(-p.f0), -p.delta0 - sm};
}

// det[z I - L_eff(z)] = [z - d0 - Sigma(z)][z + d0 + Sigma(-z)] + f0^2,
// whose zeros are the complex eigenfrequencies.
inline cplx green_inverse(cplx z, SheetSelector s, const ModelParams& p) {
    const cplx sp = self_energy(z, s.plus, p);
    const cplx sm = self_energy(-z, s.minus, p);
    return (z - p.delta0 - sp) * (z + p.delta0 + sm) + p.f0 * p.f0;
}

inline cplx green_inverse(const ComplexPoint& zp, const ModelParams& p) {
    return green_inverse(zp.z, zp.sheet, p);
}

inline cplx green_inverse_dz(cplx z, SheetSelector s, const ModelParams& p) {
    const cplx sp = self_energy(z, s.plus, p);
    const cplx sm = self_energy(-z, s.minus, p);
    const cplx dsp = self_energy_dz(z, s.plus, p);
    const cplx dsm = self_energy_dz(-z, s.minus, p);
    return (1.0 - dsp) * (z + p.delta0 + sm) + (z - p.delta0 - sp) * (1.0 - dsm);
}

inline cplx green(const ComplexPoint& zp, const ModelParams& p, double pole_tol = 1e-14) {
    const cplx d = green_inverse(zp, p);
    if (std::abs(d) < pole_tol)
        throw PoleError("green: z is a pole of the Green function", zp.z);
    return 1.0 / d;
}

inline cplx green(cplx z, SheetSelector s, const ModelParams& p) {
    return green({z, s}, p);
}

// G(Delta + i0+): boundary value continued from the upper half-plane,
// realized as Delta + i eps on the first sheet.
inline cplx green_above(double delta, const ModelParams& p, double eps_scale = 1e-9) {
    const cplx z(delta, eps_scale * p.bandB);
    return green(z, SheetSelector::first(), p);
}

}  // namespace parosc
