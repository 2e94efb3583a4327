// sweep.hpp — Predictor-corrector branch continuation over the detuning,
// with exceptional-point, sheet-crossing, and real-axis-crossing events
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "parosc/spectral.hpp"

namespace parosc {

enum class SweepEventKind { ExceptionalPoint, SheetCrossing, RealAxisCrossing };

inline const char* to_string(SweepEventKind k) {
    switch (k) {
        case SweepEventKind::ExceptionalPoint: return "exceptional_point";
        case SweepEventKind::SheetCrossing: return "sheet_crossing";
        case SweepEventKind::RealAxisCrossing: return "real_axis_crossing";
    }
    return "?";
}

struct SweepEvent {
    double param = 0.0;
    SweepEventKind kind{};
    cplx z{};
    int branch_a = -1, branch_b = -1;
};

struct BranchSample {
    double param = 0.0;
    EigenRecord rec{};
};

struct BranchTrack {
    std::string parameter = "delta0";
    int branch_id = 0;
    std::vector<BranchSample> samples;
    std::vector<SweepEvent> events;
};

struct SweepOptions {
    double initial_step = 1e-2;
    double min_step = 1e-7;
    double ep_tol = 1e-4;          // coalescence distance that confirms an EP
    double ep_watch = 0.06;        // pair distance below which minima are examined
    double real_axis_tol = 1e-9;
    RootSearchOptions root_opts{};
};

struct SweepResult {
    std::vector<BranchTrack> tracks;
    std::vector<SweepEvent> events;  // merged, deduplicated, ordered by param
};

namespace detail {

struct BranchState {
    SheetSelector sel{};
    cplx z{}, z_prev{};
    double h_prev = 0.0;
    bool was_complex = false;
};

inline ModelParams at_delta0(ModelParams p, double d0) {
    p.delta0 = d0;
    return p;
}

inline std::optional<cplx> refine_root(const ModelParams& p, SheetSelector sel, cplx seed,
                                       double tol) {
    auto f = [&](cplx z) { return green_inverse(z, sel, p); };
    auto df = [&](cplx z) { return green_inverse_dz(z, sel, p); };
    return newton_root(f, df, seed, tol);
}

// Newton for a presumed double root, minimizing |f| + |f'| via u = f/f'.
inline std::optional<cplx> refine_double_root(const ModelParams& p, SheetSelector sel, cplx seed,
                                              double tol) {
    auto u = [&](cplx z) {
        return green_inverse(z, sel, p) / green_inverse_dz(z, sel, p);
    };
    auto du = [&](cplx z) {
        const double h = 1e-7 * (1.0 + std::abs(z));
        return (u(z + h) - u(z - h)) / (2.0 * h);
    };
    return newton_root(u, du, seed, tol);
}

// Does the real interval between a and b contain x?
inline bool straddles(double a, double b, double x) {
    return (a - x) * (b - x) <= 0.0 && a != b;
}

}  // namespace detail

// Continuation of every eigenfrequency branch from delta0 = lo to hi.
// Events are logged when two roots coalesce (ExceptionalPoint), when a root
// continues through a branch cut with a sheet reassignment (SheetCrossing),
// and when Im z changes sign (RealAxisCrossing).
inline SweepResult sweep_branches(const ModelParams& p0, double lo, double hi,
                                  const SweepOptions& opts = {}) {
    using detail::BranchState;
    SweepResult res;
    const auto seeds = find_all_eigenfrequencies(detail::at_delta0(p0, lo), opts.root_opts);
    const int nb = static_cast<int>(seeds.size());
    if (nb == 0) throw ConvergenceError("sweep_branches: no seed roots at the start of the range");

    std::vector<BranchState> st(nb);
    res.tracks.resize(nb);
    for (int i = 0; i < nb; ++i) {
        st[i].sel = seeds[i].sheet;
        st[i].z = st[i].z_prev = seeds[i].z;
        st[i].was_complex = std::abs(seeds[i].z.imag()) > opts.real_axis_tol;
        res.tracks[i].branch_id = i;
        res.tracks[i].samples.push_back({lo, seeds[i]});
    }

    // pair-distance history for EP local-minimum detection
    std::map<std::pair<int, int>, std::array<double, 2>> pair_hist;
    std::map<std::pair<int, int>, bool> pair_episode;
    auto pair_key = [](int i, int j) { return std::make_pair(std::min(i, j), std::max(i, j)); };

    auto sheet_flips_at = [&](double x) {
        std::pair<bool, bool> f{false, false};
        if (p0.g0 > 0.0) {
            if (std::abs(x - p0.deltaB) < p0.bandB) f.first = true;
            if (std::abs(x + p0.deltaB) < p0.bandB) f.second = true;
        }
        return f;
    };
    auto apply_flips = [](SheetSelector s, std::pair<bool, bool> f) {
        auto flip = [](Sheet x) { return x == Sheet::First ? Sheet::Second : Sheet::First; };
        if (f.first) s.plus = flip(s.plus);
        if (f.second) s.minus = flip(s.minus);
        return s;
    };

    double param = lo;
    double h = opts.initial_step * (hi > lo ? 1.0 : -1.0);
    const double newton_tol = opts.root_opts.newton_tol;

    while ((hi > lo) ? (param < hi - 1e-15) : (param > hi + 1e-15)) {
        if ((hi > lo) ? (param + h > hi) : (param + h < hi)) h = hi - param;
        const double pn = param + h;
        const ModelParams pp = detail::at_delta0(p0, pn);

        // predict and correct every branch
        std::vector<cplx> preds(nb), news(nb);
        bool ok = true;
        for (int i = 0; i < nb && ok; ++i) {
            const double ratio = st[i].h_prev != 0.0 ? h / st[i].h_prev : 0.0;
            preds[i] = st[i].z + (st[i].z - st[i].z_prev) * ratio;
            auto z = detail::refine_root(pp, st[i].sel, preds[i], newton_tol);
            if (!z) {
                ok = false;
                break;
            }
            const double expected = std::abs(st[i].z - st[i].z_prev) * std::abs(ratio);
            const double bound = std::max(10.0 * expected + 1e-9, 2e-3 * (1.0 + std::abs(st[i].z)));
            if (std::abs(*z - preds[i]) > bound) {
                ok = false;
                break;
            }
            news[i] = *z;
        }

        // duplicate resolution: two branches converging to one root after a
        // coalescence are split again by deflation
        if (ok) {
            for (int i = 0; i < nb && ok; ++i) {
                for (int j = i + 1; j < nb && ok; ++j) {
                    if (!(st[i].sel == st[j].sel)) continue;
                    if (std::abs(news[i] - news[j]) > 1e-10 * (1.0 + std::abs(news[i]))) continue;
                    const cplx z0 = news[i];
                    auto q = [&](cplx z) { return green_inverse(z, st[i].sel, pp) / (z - z0); };
                    auto dq = [&](cplx z) {
                        return (green_inverse_dz(z, st[i].sel, pp) * (z - z0) -
                                green_inverse(z, st[i].sel, pp)) /
                               ((z - z0) * (z - z0));
                    };
                    std::optional<cplx> other;
                    for (cplx seed : {std::conj(z0), 2.0 * preds[j] - z0, z0 + (z0 - preds[j])}) {
                        if (std::abs(seed - z0) < 1e-12) continue;
                        other = detail::newton_root(q, dq, seed, newton_tol);
                        if (other && std::abs(*other - z0) > 1e-9) break;
                        other.reset();
                    }
                    if (!other) {
                        ok = false;  // halve the step and try to resolve later
                        break;
                    }
                    // give the deflated root to whichever branch predicts it better
                    const int take =
                        std::abs(preds[i] - *other) < std::abs(preds[j] - *other) ? i : j;
                    news[take] = *other;
                }
            }
        }

        if (!ok) {
            h *= 0.5;
            if (std::abs(h) >= opts.min_step) continue;
            // stalled: a branch may be pinned against a branch cut; try the
            // sheet-flipped continuation before giving up
            bool recovered = false;
            h = opts.initial_step * (hi > lo ? 1.0 : -1.0) * 0.25;
            const double pr = param + h;
            const ModelParams pr_params = detail::at_delta0(p0, pr);
            for (int i = 0; i < nb; ++i) {
                const double x = st[i].z.real();
                auto flips = sheet_flips_at(x);
                if (!flips.first && !flips.second && p0.g0 > 0.0) {
                    // pinned just outside a cut: flip the factor whose cut
                    // endpoint is nearest
                    const double d_plus =
                        std::min(std::abs(x - p0.band_lo()), std::abs(x - p0.band_hi()));
                    const double d_minus =
                        std::min(std::abs(x + p0.band_lo()), std::abs(x + p0.band_hi()));
                    flips.first = d_plus <= d_minus + 1e-12;
                    flips.second = d_minus <= d_plus + 1e-12;
                }
                const SheetSelector flipped = apply_flips(st[i].sel, flips);
                if (flipped == st[i].sel) continue;
                auto z = detail::refine_root(pr_params, flipped, st[i].z, newton_tol);
                if (z && std::abs(*z - st[i].z) < 0.1 * (1.0 + std::abs(st[i].z))) {
                    SweepEvent ev{param, SweepEventKind::SheetCrossing, st[i].z, i, -1};
                    res.tracks[i].events.push_back(ev);
                    res.events.push_back(ev);
                    st[i].sel = flipped;
                    st[i].h_prev = 0.0;  // restart the secant predictor
                    recovered = true;
                }
            }
            if (!recovered)
                throw ConvergenceError(
                    "sweep_branches: continuation stalled at delta0 = " + std::to_string(param));
            continue;
        }

        // per-branch transition events
        for (int i = 0; i < nb; ++i) {
            const cplx zc = st[i].z, zn = news[i];
            const bool real_c = std::abs(zc.imag()) < opts.real_axis_tol;
            const bool real_n = std::abs(zn.imag()) < opts.real_axis_tol;
            if (!real_c && !real_n && zc.imag() * zn.imag() < 0.0) {
                // complex root crossed the real axis: locate the crossing and
                // reassign sheets when it happened inside a cut
                double a = param, b = pn;
                cplx za = zc, zx = zn;
                SheetSelector sel_lo = st[i].sel;
                for (int it = 0; it < 60 && b - a > 0; ++it) {
                    const double mid = 0.5 * (a + b);
                    auto zm = detail::refine_root(detail::at_delta0(p0, mid), sel_lo, za, newton_tol);
                    if (!zm) break;
                    if (std::abs(zm->imag()) < opts.real_axis_tol) {
                        zx = *zm;
                        a = b = mid;
                        break;
                    }
                    if (zm->imag() * zc.imag() > 0.0) {
                        a = mid;
                        za = *zm;
                    } else {
                        b = mid;
                        zx = *zm;
                    }
                }
                const double pstar = 0.5 * (a + b);
                const cplx zstar(zx.real(), 0.0);
                SweepEvent ev{pstar, SweepEventKind::RealAxisCrossing, zstar, i, -1};
                res.tracks[i].events.push_back(ev);
                res.events.push_back(ev);
                const auto flips = sheet_flips_at(zstar.real());
                if (flips.first || flips.second) {
                    st[i].sel = apply_flips(st[i].sel, flips);
                    SweepEvent sev{pstar, SweepEventKind::SheetCrossing, zstar, i, -1};
                    res.tracks[i].events.push_back(sev);
                    res.events.push_back(sev);
                    auto z = detail::refine_root(pp, st[i].sel, preds[i], newton_tol);
                    if (z) news[i] = *z;
                }
            } else if (real_c && real_n) {
                // real root sliding through a cut endpoint changes sheets
                for (double edge : {p0.band_lo(), p0.band_hi(), -p0.band_lo(), -p0.band_hi()}) {
                    if (p0.g0 == 0.0) break;
                    if (!detail::straddles(zc.real(), zn.real(), edge)) continue;
                    const double inner = edge + (zc.real() < edge ? 1e-6 : -1e-6);
                    st[i].sel = apply_flips(st[i].sel, sheet_flips_at(inner));
                    SweepEvent ev{pn, SweepEventKind::SheetCrossing, cplx(edge, 0.0), i, -1};
                    res.tracks[i].events.push_back(ev);
                    res.events.push_back(ev);
                    auto z = detail::refine_root(pp, st[i].sel, preds[i], newton_tol);
                    if (z) news[i] = *z;
                    break;
                }
            }
        }

        // exceptional points: pairwise distance develops a local minimum
        for (int i = 0; i < nb; ++i) {
            for (int j = i + 1; j < nb; ++j) {
                if (!(st[i].sel == st[j].sel)) continue;
                const auto key = pair_key(i, j);
                const double d_new = std::abs(news[i] - news[j]);
                auto& hist = pair_hist[key];
                const double d_prev = hist[1], d_older = hist[0];
                bool& episode = pair_episode[key];
                if (episode && d_new > 10.0 * opts.ep_tol && d_new > d_prev) episode = false;
                const bool local_min = d_older > 0.0 && d_prev > 0.0 && d_prev <= d_older &&
                                       d_new > d_prev && d_prev < opts.ep_watch;
                if (!episode && (d_new < opts.ep_tol || local_min)) {
                    // ternary search for the coalescence parameter
                    double a = std::min(param - 2.0 * h, pn), b = std::max(param - 2.0 * h, pn);
                    auto dist_at = [&](double q) -> double {
                        const ModelParams pq = detail::at_delta0(p0, q);
                        auto zi = detail::refine_root(pq, st[i].sel, st[i].z, newton_tol);
                        auto zj = detail::refine_root(pq, st[j].sel, st[j].z, newton_tol);
                        if (!zi || !zj) return 1e9;
                        return std::abs(*zi - *zj);
                    };
                    for (int it = 0; it < 80 && b - a > 1e-13; ++it) {
                        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
                        if (dist_at(m1) < dist_at(m2)) b = m2;
                        else a = m1;
                    }
                    const double pstar = 0.5 * (a + b);
                    const ModelParams pq = detail::at_delta0(p0, pstar);
                    auto zi = detail::refine_root(pq, st[i].sel, st[i].z, newton_tol);
                    cplx z_ep = zi ? *zi : st[i].z;
                    if (auto zd = detail::refine_double_root(pq, st[i].sel, z_ep, newton_tol))
                        z_ep = *zd;
                    const double coal = dist_at(pstar);
                    if (coal < opts.ep_tol) {
                        SweepEvent ev{pstar, SweepEventKind::ExceptionalPoint, z_ep, i, j};
                        res.tracks[i].events.push_back(ev);
                        res.tracks[j].events.push_back(ev);
                        res.events.push_back(ev);
                        episode = true;
                    }
                }
                hist = {d_prev == 0.0 ? d_new : d_prev, d_new};
            }
        }

        // accept
        for (int i = 0; i < nb; ++i) {
            st[i].z_prev = st[i].z;
            st[i].z = news[i];
            st[i].h_prev = h;
            st[i].was_complex = std::abs(news[i].imag()) > opts.real_axis_tol;
            EigenRecord rec = detail::make_record(news[i], st[i].sel, pp, opts.root_opts);
            rec.quartet_id = i;
            res.tracks[i].samples.push_back({pn, rec});
        }
        param = pn;
        if (std::abs(h) < 0.5 * opts.initial_step) h *= 2.0;  // recover the step after refinement
    }

    std::sort(res.events.begin(), res.events.end(),
              [](const SweepEvent& a, const SweepEvent& b) { return a.param < b.param; });
    // dedupe EP events recorded from both member branches
    res.events.erase(std::unique(res.events.begin(), res.events.end(),
                                 [](const SweepEvent& a, const SweepEvent& b) {
                                     return a.kind == b.kind && a.param == b.param &&
                                            a.z == b.z && a.branch_a == b.branch_a &&
                                            a.branch_b == b.branch_b;
                                 }),
                     res.events.end());
    return res;
}

// Numerically locates the real-axis crossing of the unstable branch by
// bisecting the detuning on the instability rate; the closed-form
// threshold_detuning should agree to the stated tolerance.
inline std::optional<double> locate_threshold_crossing(const ModelParams& p0, double tol = 1e-6) {
    auto unstable = [&](double d0) {
        return instability_rate(detail::at_delta0(p0, d0)).has_value();
    };
    if (!unstable(0.0)) return std::nullopt;
    double lo = 0.0, hi = std::max(p0.f0, 1e-3);
    while (unstable(hi)) {
        hi *= 1.5;
        if (hi > 10.0 * (p0.bandB + p0.f0)) throw ConvergenceError("locate_threshold_crossing: no stable detuning found");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (unstable(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace parosc
