// spectral.hpp — Eigenfrequency search, stability thresholds, parameter sweeps
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "parosc/analytic.hpp"

namespace parosc {

enum class Classification {
    RealFirstSheet,
    RealSecondSheet,
    ComplexFirstSheet,
    ComplexSecondSheet,
};

// A located zero of green_inverse: complex eigenfrequency of the effective
// Liouvillian on the given sheet pair.
struct EigenRecord {
    cplx z{};
    SheetSelector sheet{};
    Classification classification = Classification::RealFirstSheet;
    cplx residue{};  // residue of G at z (simple-pole formula)
    int quartet_id = -1;
};

struct SearchRect {
    double re_lo, re_hi, im_lo, im_hi;
    double width() const { return re_hi - re_lo; }
    double height() const { return im_hi - im_lo; }
    double diag() const { return std::hypot(width(), height()); }
    cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    bool contains(cplx z, double slack = 0.0) const {
        return z.real() >= re_lo - slack && z.real() <= re_hi + slack &&
               z.imag() >= im_lo - slack && z.imag() <= im_hi + slack;
    }
};

struct RootSearchOptions {
    double root_tol = 1e-10;      // |green_inverse| at an accepted root
    double newton_tol = 1e-12;    // Newton step tolerance
    int max_depth = 40;           // rectangle subdivision depth
    double coalesce_tol = 1e-4;   // rect size below which a multiple root is assumed
    double real_axis_tol = 1e-9;  // |Im z| below which a root is classified real
};

namespace detail {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Phase increment along one boundary segment. Subdivision continues until the
// phase step is small AND the Lipschitz bound len * max|f'| << min|f| certifies
// that the phase cannot have wrapped unseen between the samples (zeros just
// off the boundary otherwise leave no endpoint signature).
template <class F, class DF>
double edge_arg_delta(F& f, DF& df, cplx a, cplx b, cplx fa, cplx fb, double da, double db,
                      int depth) {
    const double dphi = std::arg(fb / fa);
    const double len = std::abs(b - a);
    const double fmin = std::min(std::abs(fa), std::abs(fb));
    const bool coarse = len > 0.25 * (1.0 + std::min(std::abs(a), std::abs(b)));
    if (!coarse && std::abs(dphi) <= 0.7 && len * std::max(da, db) <= 0.45 * fmin) return dphi;
    if (depth >= 60)
        throw ConvergenceError("winding_number: phase tracking failed (zero on boundary?)");
    const cplx m = 0.5 * (a + b);
    const cplx fm = f(m);
    if (std::abs(fm) == 0.0)
        throw ConvergenceError("winding_number: exact zero on rectangle boundary");
    const double dm = std::abs(df(m));
    return edge_arg_delta(f, df, a, m, fa, fm, da, dm, depth + 1) +
           edge_arg_delta(f, df, m, b, fm, fb, dm, db, depth + 1);
}

// Winding number of f around the rectangle boundary by adaptive phase tracking.
template <class F, class DF>
int winding_number(F&& f, DF&& df, const SearchRect& r) {
    const cplx c1(r.re_lo, r.im_lo), c2(r.re_hi, r.im_lo), c3(r.re_hi, r.im_hi), c4(r.re_lo, r.im_hi);
    const cplx f1 = f(c1), f2 = f(c2), f3 = f(c3), f4 = f(c4);
    const double d1 = std::abs(df(c1)), d2 = std::abs(df(c2)), d3 = std::abs(df(c3)),
                 d4 = std::abs(df(c4));
    double total = 0.0;
    total += edge_arg_delta(f, df, c1, c2, f1, f2, d1, d2, 0);
    total += edge_arg_delta(f, df, c2, c3, f2, f3, d2, d3, 0);
    total += edge_arg_delta(f, df, c3, c4, f3, f4, d3, d4, 0);
    total += edge_arg_delta(f, df, c4, c1, f4, f1, d4, d1, 0);
    const double w = total / kTwoPi;
    const long n = std::lround(w);
    if (std::abs(w - n) > 0.25)
        throw ConvergenceError("winding_number: non-integer winding " + std::to_string(w));
    return static_cast<int>(n);
}

template <class F, class DF>
std::optional<cplx> newton_root(F& f, DF& df, cplx z, double tol, int max_iter = 80) {
    for (int i = 0; i < max_iter; ++i) {
        const cplx fz = f(z);
        const cplx d = df(z);
        if (std::abs(d) < 1e-300) return std::nullopt;
        const cplx dz = fz / d;
        z -= dz;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
        if (std::abs(dz) < tol * (1.0 + std::abs(z))) {
            z -= f(z) / df(z);  // one polishing step
            return z;
        }
    }
    return std::nullopt;
}

}  // namespace detail

inline int winding_count(const ModelParams& p, SheetSelector sel, const SearchRect& r) {
    auto f = [&](cplx z) { return green_inverse(z, sel, p); };
    auto df = [&](cplx z) { return green_inverse_dz(z, sel, p); };
    return detail::winding_number(f, df, r);
}

inline bool rect_clears_cuts(const SearchRect& r, const ModelParams& p, double margin = 1e-6) {
    if (p.g0 == 0.0) return true;
    auto edge_hits = [&](double lo, double hi) {
        // vertical edges cross Im = 0 when the rect straddles the axis
        if (r.im_lo < margin && r.im_hi > -margin) {
            if (r.re_lo > lo - margin && r.re_lo < hi + margin) return true;
            if (r.re_hi > lo - margin && r.re_hi < hi + margin) return true;
        }
        // a horizontal edge lying on the axis must not overlap the cut
        for (double im : {r.im_lo, r.im_hi}) {
            if (std::abs(im) < margin && r.re_hi > lo - margin && r.re_lo < hi + margin)
                return true;
        }
        return false;
    };
    if (edge_hits(p.band_lo(), p.band_hi())) return false;
    if (edge_hits(-p.band_hi(), -p.band_lo())) return false;
    return true;
}

namespace detail {

inline Classification classify(cplx z, SheetSelector sel, double real_tol) {
    const bool real = std::abs(z.imag()) < real_tol;
    const bool first = sel == SheetSelector::first();
    if (real) return first ? Classification::RealFirstSheet : Classification::RealSecondSheet;
    return first ? Classification::ComplexFirstSheet : Classification::ComplexSecondSheet;
}

inline EigenRecord make_record(cplx z, SheetSelector sel, const ModelParams& p,
                               const RootSearchOptions& opts) {
    EigenRecord rec;
    rec.z = z;
    rec.sheet = sel;
    rec.classification = classify(z, sel, opts.real_axis_tol);
    const cplx d = green_inverse_dz(z, sel, p);
    rec.residue = std::abs(d) > 1e-300 ? 1.0 / d : cplx{};
    return rec;
}

template <class F, class DF>
void collect_roots(F& f, DF& df, const SearchRect& rect, int depth,
                   const RootSearchOptions& opts, std::vector<cplx>& out) {
    int w;
    try {
        w = winding_number(f, df, rect);
    } catch (const ConvergenceError&) {
        if (depth == 0) throw;
        // boundary passes too close to a zero: nudge the rect asymmetrically
        SearchRect r2 = rect;
        const double dx = 0.013 * rect.width(), dy = 0.017 * rect.height();
        r2.re_lo -= dx;
        r2.re_hi += 0.7 * dx;
        r2.im_lo -= dy;
        r2.im_hi += 0.6 * dy;
        w = winding_number(f, df, r2);
        collect_roots(f, df, r2, depth, opts, out);
        return;
    }
    if (w == 0) return;
    if (w == 1) {
        auto z = newton_root(f, df, rect.center(), opts.newton_tol);
        if (z && rect.contains(*z, 1e-12) && std::abs(f(*z)) < opts.root_tol) {
            out.push_back(*z);
            return;
        }
    }
    if (rect.diag() < opts.coalesce_tol || depth >= opts.max_depth) {
        // presumed multiple root (exceptional point): Newton on u = f/f'
        auto u = [&](cplx z) { return f(z) / df(z); };
        auto du = [&](cplx z) {
            const double h = 1e-7 * (1.0 + std::abs(z));
            return (u(z + h) - u(z - h)) / (2.0 * h);
        };
        auto z = newton_root(u, du, rect.center(), opts.newton_tol);
        if (z && rect.contains(*z, rect.diag()) && std::abs(f(*z)) < 1e3 * opts.root_tol) {
            for (int i = 0; i < w; ++i) out.push_back(*z);
            return;
        }
        throw ConvergenceError("find_eigenfrequencies: winding/root-count mismatch at max subdivision");
    }
    // split along the longer side; retry with shifted fractions if a zero
    // lands on the split line
    const bool vertical = rect.width() >= rect.height();
    for (double frac : {0.5, 0.53, 0.44, 0.59}) {
        SearchRect a = rect, b = rect;
        if (vertical) {
            const double m = rect.re_lo + frac * rect.width();
            a.re_hi = m;
            b.re_lo = m;
        } else {
            const double m = rect.im_lo + frac * rect.height();
            a.im_hi = m;
            b.im_lo = m;
        }
        try {
            std::vector<cplx> tmp;
            collect_roots(f, df, a, depth + 1, opts, tmp);
            collect_roots(f, df, b, depth + 1, opts, tmp);
            out.insert(out.end(), tmp.begin(), tmp.end());
            return;
        } catch (const ConvergenceError&) {
            if (frac == 0.59) throw;
        }
    }
}

}  // namespace detail

// All zeros of green_inverse inside the rectangle on the given sheet pair,
// located by argument-principle counting on adaptively subdivided rectangles
// followed by Newton refinement. The rectangle boundary must stay clear of
// the branch cuts.
inline std::vector<EigenRecord> find_eigenfrequencies(const ModelParams& p, SheetSelector sel,
                                                      const SearchRect& rect,
                                                      const RootSearchOptions& opts = {}) {
    if (!rect_clears_cuts(rect, p))
        throw std::invalid_argument("find_eigenfrequencies: rectangle boundary crosses a branch cut");
    auto f = [&](cplx z) { return green_inverse(z, sel, p); };
    auto df = [&](cplx z) { return green_inverse_dz(z, sel, p); };
    std::vector<cplx> zs;
    detail::collect_roots(f, df, rect, 0, opts, zs);
    // dedupe overlap from nudged sub-rectangles; double roots are recovered
    // from the derivative below
    std::vector<cplx> uniq;
    for (cplx z : zs) {
        bool merged = false;
        for (cplx u : uniq) {
            if (std::abs(z - u) < 1e-9 * (1.0 + std::abs(z))) {
                merged = true;
                break;
            }
        }
        if (!merged && rect.contains(z, 1e-9 * rect.diag())) uniq.push_back(z);
    }
    std::vector<EigenRecord> out;
    for (cplx z : uniq) {
        out.push_back(detail::make_record(z, sel, p, opts));
        if (std::abs(green_inverse_dz(z, sel, p)) < 1e-5)  // coalesced pair
            out.push_back(out.back());
    }
    const int total_winding = detail::winding_number(f, df, rect);
    if (static_cast<int>(out.size()) != total_winding)
        throw ConvergenceError("find_eigenfrequencies: found " + std::to_string(out.size()) +
                               " roots but winding number is " + std::to_string(total_winding));
    std::sort(out.begin(), out.end(), [](const EigenRecord& a, const EigenRecord& b) {
        return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
    });
    return out;
}

namespace detail {

// Real-line roots on a cut-free segment by sign scanning plus bisection.
inline void scan_real_segment(const ModelParams& p, SheetSelector sel, double lo, double hi,
                              const RootSearchOptions& opts, std::vector<EigenRecord>& out) {
    if (!(hi > lo)) return;
    auto f = [&](double x) { return green_inverse(cplx(x, 0.0), sel, p).real(); };
    const int n = std::max(64, static_cast<int>((hi - lo) * 256));
    double x_prev = lo, f_prev = f(lo);
    for (int i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        const double fx = f(x);
        if (f_prev == 0.0) out.push_back(make_record(cplx(x_prev, 0.0), sel, p, opts));
        if (f_prev * fx < 0.0) {
            double a = x_prev, b = x, fa = f_prev;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = f(m);
                if (fm == 0.0 || 0.5 * (b - a) < 1e-15 * (1.0 + std::abs(m))) {
                    a = b = m;
                    break;
                }
                if (fa * fm < 0.0) b = m;
                else {
                    a = m;
                    fa = fm;
                }
            }
            out.push_back(make_record(cplx(0.5 * (a + b), 0.0), sel, p, opts));
        }
        x_prev = x;
        f_prev = fx;
    }
}

}  // namespace detail

// Default search box: all eigenfrequencies lie within a coupling-bounded
// region around the band and the decoupled frequencies.
inline SearchRect default_search_box(const ModelParams& p) {
    const double R = p.bandB + std::abs(p.deltaB) + std::abs(p.delta0) + p.f0 + 1.0;
    return {-R, R, -(p.f0 + 1.0), p.f0 + 1.0};
}

// Finds the eigenfrequency quartets on one sheet pair inside `box`:
// real-line roots on the cut-free segments plus complex roots in the upper
// and lower half-planes.
inline std::vector<EigenRecord> find_sheet_roots(const ModelParams& p, SheetSelector sel,
                                                 const SearchRect& box,
                                                 const RootSearchOptions& opts = {}) {
    std::vector<EigenRecord> out;
    const double gap = 2e-6 * p.bandB;
    // real segments excluding the cuts
    std::vector<std::pair<double, double>> cuts;
    if (p.g0 > 0.0) {
        cuts.push_back({p.band_lo(), p.band_hi()});
        cuts.push_back({-p.band_hi(), -p.band_lo()});
        std::sort(cuts.begin(), cuts.end());
        if (cuts[0].second >= cuts[1].first) {  // overlapping cuts merge
            cuts = {{cuts[0].first, std::max(cuts[0].second, cuts[1].second)}};
        }
    }
    double seg_lo = box.re_lo;
    const double m = 1e-5 * p.bandB;
    for (auto [c_lo, c_hi] : cuts) {
        detail::scan_real_segment(p, sel, seg_lo, c_lo - m, opts, out);
        seg_lo = c_hi + m;
    }
    detail::scan_real_segment(p, sel, seg_lo, box.re_hi, opts, out);
    // complex roots off the axis
    SearchRect upper{box.re_lo, box.re_hi, gap, box.im_hi};
    SearchRect lower{box.re_lo, box.re_hi, box.im_lo, -gap};
    for (const SearchRect& r : {upper, lower}) {
        if (r.im_hi <= r.im_lo) continue;
        auto found = find_eigenfrequencies(p, sel, r, opts);
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

// Quartet grouping: eigenfrequencies occur as (z, -z, z*, -z*); -z lives on
// the swapped selector and z* on the same selector.
inline void assign_quartets(std::vector<EigenRecord>& recs, double tol = 1e-7) {
    int next_id = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (recs[i].quartet_id >= 0) continue;
        recs[i].quartet_id = next_id;
        const cplx z = recs[i].z;
        for (std::size_t j = i + 1; j < recs.size(); ++j) {
            if (recs[j].quartet_id >= 0) continue;
            const cplx w = recs[j].z;
            const bool same = recs[j].sheet == recs[i].sheet;
            const bool swapped = recs[j].sheet == recs[i].sheet.swapped();
            const bool partner =
                (same && std::abs(w - std::conj(z)) < tol) ||
                (swapped && (std::abs(w + z) < tol || std::abs(w + std::conj(z)) < tol));
            if (partner) recs[j].quartet_id = next_id;
        }
        ++next_id;
    }
}

// All roots on the uniform sheet pairs (First,First) and (Second,Second)
// inside the default box, grouped into quartets.
inline std::vector<EigenRecord> find_all_eigenfrequencies(const ModelParams& p,
                                                          const RootSearchOptions& opts = {}) {
    const SearchRect box = default_search_box(p);
    std::vector<EigenRecord> out = find_sheet_roots(p, SheetSelector::first(), box, opts);
    if (p.g0 > 0.0) {
        auto ss = find_sheet_roots(p, SheetSelector::second(), box, opts);
        out.insert(out.end(), ss.begin(), ss.end());
    }
    assign_quartets(out);
    return out;
}

// Instability threshold in the detuning: complex eigenfrequencies reach the
// first sheet for |delta0| < sqrt(f0^2 - 4 g0^4 / B^2).
inline std::optional<double> threshold_detuning(const ModelParams& p) {
    const double disc =
        p.f0 * p.f0 - 4.0 * std::pow(p.g0, 4) / (p.bandB * p.bandB);
    if (disc <= 0.0) return std::nullopt;
    return std::sqrt(disc);
}

// Growth rate gamma_I of the unstable mode: largest positive imaginary part
// among first-sheet eigenfrequencies, if any.
inline std::optional<double> instability_rate(const ModelParams& p,
                                              const RootSearchOptions& opts = {}) {
    const SearchRect box = default_search_box(p);
    const double gap = 2e-6 * p.bandB;
    SearchRect upper{box.re_lo, box.re_hi, gap, box.im_hi};
    auto roots = find_eigenfrequencies(p, SheetSelector::first(), upper, opts);
    double best = 0.0;
    for (const auto& r : roots) best = std::max(best, r.z.imag());
    if (best > gap) return best;
    return std::nullopt;
}

}  // namespace parosc
