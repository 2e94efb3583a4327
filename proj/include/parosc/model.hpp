// model.hpp — Rotating-frame model parameters, coupling function, and dispersion
#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "parosc/errors.hpp"

namespace parosc {

using cplx = std::complex<double>;

// Parameters of the driven oscillator coupled to a one-dimensional photonic
// band. All frequencies are rotating-frame detunings from half the drive
// frequency; bandB (the half-bandwidth) is the natural frequency unit.
struct ModelParams {
    double delta0 = 0.0;  // oscillator detuning
    double f0 = 0.0;      // drive coupling (pair creation strength), >= 0
    double g0 = 0.3;      // oscillator-continuum coupling, >= 0
    double bandB = 1.0;   // half-bandwidth of the photonic band, > 0
    double deltaB = 0.0;  // band-center detuning
    std::optional<double> omegaDrive;  // rest-frame drive frequency; energy bookkeeping only

    double band_lo() const { return deltaB - bandB; }
    double band_hi() const { return deltaB + bandB; }
    bool in_band(double delta) const { return std::abs(delta - deltaB) < bandB; }

    void validate() const {
        if (!(bandB > 0.0)) throw ConfigError("ModelParams: bandB must be > 0");
        if (!(g0 >= 0.0)) throw ConfigError("ModelParams: g0 must be >= 0");
        if (!(f0 >= 0.0)) throw ConfigError("ModelParams: f0 must be >= 0");
        if (omegaDrive && !(*omegaDrive > 0.0))
            throw ConfigError("ModelParams: omegaDrive must be > 0");
    }

    // Same model expressed with frequency unit `unit` (divides every frequency).
    ModelParams rescaled(double unit) const {
        if (!(unit > 0.0)) throw ConfigError("ModelParams::rescaled: unit must be > 0");
        ModelParams q = *this;
        q.delta0 /= unit;
        q.f0 /= unit;
        q.g0 /= unit;
        q.bandB /= unit;
        q.deltaB /= unit;
        if (q.omegaDrive) *q.omegaDrive /= unit;
        return q;
    }
};

// Coupling function g(Delta): fourth root of the semicircle, identically zero
// outside the band and continuous at the edges.
inline double coupling_g(double delta, const ModelParams& p) {
    const double x = delta - p.deltaB;
    if (std::abs(x) >= p.bandB) return 0.0;
    double arg = p.bandB * p.bandB - x * x;
    if (std::abs(arg) < 1e-14 * p.bandB * p.bandB) arg = 0.0;  // FP dust at the theta edge
    if (arg < 0.0) arg = 0.0;
    return p.g0 / p.bandB * std::sqrt(2.0 / std::numbers::pi) * std::pow(arg, 0.25);
}

// g^2(Delta), the semicircular weight. Integrates to g0^2 over the band.
inline double coupling_g2(double delta, const ModelParams& p) {
    const double x = delta - p.deltaB;
    if (std::abs(x) >= p.bandB) return 0.0;
    double arg = p.bandB * p.bandB - x * x;
    if (std::abs(arg) < 1e-14 * p.bandB * p.bandB) arg = 0.0;
    if (arg < 0.0) arg = 0.0;
    return p.g0 * p.g0 / (p.bandB * p.bandB) * (2.0 / std::numbers::pi) * std::sqrt(arg);
}

// Band dispersion omega_k = omega_B - B cos k on 0 < k < pi. The band center
// is the rotating-frame deltaB, shifted by Omega/2 when omegaDrive is set.
inline double dispersion_omega_k(double k, const ModelParams& p) {
    if (!(k > 0.0 && k < std::numbers::pi))
        throw std::domain_error("dispersion_omega_k: k must lie in (0, pi)");
    const double omega_band = p.deltaB + (p.omegaDrive ? 0.5 * *p.omegaDrive : 0.0);
    return omega_band - p.bandB * std::cos(k);
}

// Rest-frame energy of n_total photons: each photon carries Omega/2 on
// average (the rotating-frame vacuum contribution is zero by normal ordering).
inline double rest_frame_energy(double n_total, const ModelParams& p) {
    if (!p.omegaDrive) throw ConfigError("rest_frame_energy: omegaDrive not set");
    if (n_total < 0.0) throw std::domain_error("rest_frame_energy: n_total must be >= 0");
    return 0.5 * *p.omegaDrive * n_total;
}

// ---------------------------------------------------------------------------
// Flat key=value config (keys: delta0, f0, g0, bandB, deltaB, omegaDrive).

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void apply_param_override(ModelParams& p, const std::string& key,
                                 const std::string& value) {
    double v = 0.0;
    try {
        std::size_t pos = 0;
        v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value '" + value + "' for key '" + key + "'");
    }
    if (key == "delta0") p.delta0 = v;
    else if (key == "f0") p.f0 = v;
    else if (key == "g0") p.g0 = v;
    else if (key == "bandB") p.bandB = v;
    else if (key == "deltaB") p.deltaB = v;
    else if (key == "omegaDrive") p.omegaDrive = v;
    else throw ConfigError("config: unknown key '" + key + "'");
}

inline ModelParams params_from_config(const std::string& text) {
    ModelParams p;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: expected key = value, got '" + line + "'");
        apply_param_override(p, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    p.validate();
    return p;
}

inline std::string params_to_config(const ModelParams& p) {
    std::string out;
    out += "delta0 = " + detail::format_full(p.delta0) + "\n";
    out += "f0 = " + detail::format_full(p.f0) + "\n";
    out += "g0 = " + detail::format_full(p.g0) + "\n";
    out += "bandB = " + detail::format_full(p.bandB) + "\n";
    out += "deltaB = " + detail::format_full(p.deltaB) + "\n";
    if (p.omegaDrive) out += "omegaDrive = " + detail::format_full(*p.omegaDrive) + "\n";
    return out;
}

}  // namespace parosc
