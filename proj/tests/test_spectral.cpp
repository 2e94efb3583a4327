#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "parosc/spectral.hpp"
#include "parosc/sweep.hpp"

using namespace parosc;
using Catch::Approx;

namespace {

ModelParams base(double d0 = 0.0, double f0 = 0.2, double g0 = 0.3, double dB = 0.0) {
    ModelParams p;
    p.delta0 = d0;
    p.f0 = f0;
    p.g0 = g0;
    p.bandB = 1.0;
    p.deltaB = dB;
    return p;
}

double gamma_imaginary_axis(double f0, double g0, double B = 1.0) {
    auto fn = [&](double g) {
        return g + 2.0 * (g0 / B) * (g0 / B) * (std::sqrt(g * g + B * B) - g) - f0;
    };
    double lo = 0.0, hi = f0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (fn(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<cplx> sorted_zs(const std::vector<EigenRecord>& recs) {
    std::vector<cplx> zs;
    for (const auto& r : recs) zs.push_back(r.z);
    std::sort(zs.begin(), zs.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return zs;
}

}  // namespace

TEST_CASE("winding count over a known pair of roots") {
    ModelParams p = base(0.5, 0.2, 0.0);
    CHECK(winding_count(p, SheetSelector::first(), {-1.0, 1.0, -0.5, 0.5}) == 2);
    CHECK(winding_count(p, SheetSelector::first(), {0.1, 1.0, -0.5, 0.5}) == 1);
    CHECK(winding_count(p, SheetSelector::first(), {2.0, 3.0, -0.5, 0.5}) == 0);
}

TEST_CASE("decoupled eigenfrequencies across 50 detunings") {
    // z = +-sqrt(delta0^2 - f0^2): real outside the bifurcation, imaginary inside
    const double f0 = 0.2;
    for (int i = 0; i < 50; ++i) {
        const double d0 = -2.0 + 4.0 * i / 49.0;
        ModelParams p = base(d0, f0, 0.0);
        auto roots = find_all_eigenfrequencies(p);
        REQUIRE(roots.size() == 2);
        const double disc = d0 * d0 - f0 * f0;
        const cplx expect = disc >= 0.0 ? cplx(std::sqrt(disc), 0.0) : cplx(0.0, std::sqrt(-disc));
        auto zs = sorted_zs(roots);
        CHECK(std::abs(zs[1] - expect) < 1e-10);
        CHECK(std::abs(zs[0] + expect) < 1e-10);
    }
}

TEST_CASE("coupled first-sheet root on the imaginary axis") {
    ModelParams p = base(0.0, 0.2, 0.3);
    auto roots = find_eigenfrequencies(p, SheetSelector::first(),
                                       {-4.2, 4.2, 2e-6, 1.2});
    REQUIRE(roots.size() == 1);
    const double gI = gamma_imaginary_axis(0.2, 0.3);
    CHECK(std::abs(roots[0].z - cplx(0.0, gI)) < 1e-8);
    CHECK(roots[0].z.imag() == Approx(0.02433).margin(1e-4));
    CHECK(roots[0].classification == Classification::ComplexFirstSheet);
    CHECK(std::abs(green_inverse(roots[0].z, roots[0].sheet, p)) < 1e-10);
}

TEST_CASE("stable drive has no first-sheet complex roots") {
    ModelParams p = base(0.0, 0.1, 0.3);
    auto roots = find_eigenfrequencies(p, SheetSelector::first(), {-4.2, 4.2, 2e-6, 1.1});
    CHECK(roots.empty());
    CHECK(!instability_rate(p));
}

TEST_CASE("second-sheet roots: pure imaginary at delta0 = 0.15") {
    ModelParams p = base(0.15, 0.2, 0.3);
    auto roots = find_all_eigenfrequencies(p);
    REQUIRE(roots.size() == 4);
    for (const auto& r : roots) {
        CHECK(r.sheet == SheetSelector::second());
        CHECK(std::abs(r.z.real()) < 1e-9);
        CHECK(r.classification == Classification::ComplexSecondSheet);
    }
    auto zs = sorted_zs(roots);
    // values pinned from an independent 1-D reduction on the imaginary axis
    CHECK(zs[0].imag() == Approx(-0.39754886939951745).margin(1e-7));
    CHECK(zs[1].imag() == Approx(-0.05856198266936476).margin(1e-7));
}

TEST_CASE("second-sheet quartet at delta0 = 0.3") {
    ModelParams p = base(0.3, 0.2, 0.3);
    auto roots = find_all_eigenfrequencies(p);
    REQUIRE(roots.size() == 4);
    for (const auto& r : roots) {
        CHECK(std::abs(std::abs(r.z.real()) - 0.2864962096171605) < 1e-7);
        CHECK(std::abs(std::abs(r.z.imag()) - 0.2160322241588046) < 1e-7);
        CHECK(r.quartet_id == roots[0].quartet_id);
    }
}

TEST_CASE("quartet closure: partners of every root are roots") {
    for (ModelParams p : {base(0.3, 0.2, 0.3), base(1.4, 0.2, 0.3), base(0.05, 0.2, 0.3),
                          base(0.2, 0.15, 0.25, 0.1)}) {
        auto roots = find_all_eigenfrequencies(p);
        REQUIRE(!roots.empty());
        for (const auto& r : roots) {
            const cplx z = r.z;
            const SheetSelector s = r.sheet;
            CHECK(std::abs(green_inverse(-z, s.swapped(), p)) < 1e-8);
            CHECK(std::abs(green_inverse(std::conj(z), s, p)) < 1e-8);
            CHECK(std::abs(green_inverse(-std::conj(z), s.swapped(), p)) < 1e-8);
        }
    }
}

TEST_CASE("real first-sheet roots approach +-delta0 asymptotes") {
    for (double d0 : {2.0, 3.0, 4.0}) {
        ModelParams p = base(d0, 0.2, 0.3);
        SearchRect box = default_search_box(p);
        auto roots = find_sheet_roots(p, SheetSelector::first(), box);
        REQUIRE(roots.size() == 2);
        auto zs = sorted_zs(roots);
        CHECK(zs[1].imag() == 0.0);
        const double bound = 2.0 * p.g0 * p.g0 / (d0 - p.bandB);
        CHECK(std::abs(zs[1].real() - d0) < bound);
        CHECK(std::abs(zs[0].real() + d0) < bound);
    }
}

TEST_CASE("threshold detuning") {
    ModelParams p = base(0.0, 0.2, 0.3);
    auto thr = threshold_detuning(p);
    REQUIRE(thr.has_value());
    CHECK(*thr == Approx(0.08717797887081348).margin(1e-12));
    CHECK(*thr == Approx(0.0872).margin(1e-4));

    CHECK(!threshold_detuning(base(0.0, 0.1, 0.3)));  // 0.01 < 0.0324

    auto thr0 = threshold_detuning(base(0.0, 0.2, 1e-5));
    REQUIRE(thr0.has_value());
    CHECK(*thr0 == Approx(0.2).margin(1e-8));  // decoupled bifurcation at |delta0| = f0
}

TEST_CASE("instability rate") {
    auto r = instability_rate(base(0.0, 0.2, 0.3));
    REQUIRE(r.has_value());
    CHECK(*r == Approx(0.02433).margin(1e-4));
    CHECK(*r == Approx(gamma_imaginary_axis(0.2, 0.3)).margin(1e-8));

    CHECK(!instability_rate(base(0.0, 0.1, 0.3)));

    auto rdec = instability_rate(base(0.0, 0.2, 0.0));
    REQUIRE(rdec.has_value());
    CHECK(*rdec == Approx(0.2).margin(1e-10));
}

TEST_CASE("numerically located threshold agrees with the closed form") {
    ModelParams p = base(0.0, 0.2, 0.3);
    auto crossing = locate_threshold_crossing(p, 1e-7);
    REQUIRE(crossing.has_value());
    CHECK(std::abs(*crossing - *threshold_detuning(p)) < 1e-4);
    CHECK(!locate_threshold_crossing(base(0.0, 0.1, 0.3)));
}

TEST_CASE("sweep of the driven, coupled system (strong drive)") {
    ModelParams p = base(0.0, 0.2, 0.3);
    auto res = sweep_branches(p, -2.0, 2.0);
    REQUIRE(res.tracks.size() == 4);

    // every sample satisfies the root condition on its recorded sheet
    for (const auto& tr : res.tracks) {
        REQUIRE(tr.samples.size() > 100);
        for (std::size_t i = 0; i < tr.samples.size(); i += 7) {
            const auto& s = tr.samples[i];
            ModelParams q = p;
            q.delta0 = s.param;
            CHECK(std::abs(green_inverse(s.rec.z, s.rec.sheet, q)) < 1e-8);
        }
    }

    // real-axis crossings at +-threshold
    std::vector<double> crossings;
    for (const auto& ev : res.events)
        if (ev.kind == SweepEventKind::RealAxisCrossing) crossings.push_back(ev.param);
    REQUIRE(crossings.size() >= 2);
    const double thr = *threshold_detuning(p);
    const double lo = *std::min_element(crossings.begin(), crossings.end());
    const double hi = *std::max_element(crossings.begin(), crossings.end());
    CHECK(std::abs(lo + thr) < 1e-4);
    CHECK(std::abs(hi - thr) < 1e-4);

    // exceptional points: band-edge collisions away from the axis origin and
    // parametric-bifurcation collisions on the imaginary axis
    int ep_edge = 0, ep_bifurcation = 0;
    for (const auto& ev : res.events) {
        if (ev.kind != SweepEventKind::ExceptionalPoint) continue;
        ModelParams q = p;
        q.delta0 = ev.param;
        // double-root signature
        CHECK(std::abs(green_inverse_dz(ev.z, SheetSelector::second(), q)) < 1e-5);
        if (std::abs(ev.z.real()) > 0.9) ++ep_edge;
        if (std::abs(ev.z.real()) < 1e-6) ++ep_bifurcation;
    }
    CHECK(ep_edge >= 2);
    CHECK(ep_bifurcation >= 2);

    // sheet crossings: band-edge transitions plus the threshold transitions
    int sheet_crossings = 0;
    for (const auto& ev : res.events)
        if (ev.kind == SweepEventKind::SheetCrossing) ++sheet_crossings;
    CHECK(sheet_crossings >= 4);

    // an unstable segment exists around delta0 = 0 on the first sheet
    bool unstable_segment = false;
    for (const auto& tr : res.tracks)
        for (const auto& s : tr.samples)
            if (s.rec.sheet == SheetSelector::first() && s.rec.z.imag() > 1e-3 &&
                std::abs(s.param) < thr)
                unstable_segment = true;
    CHECK(unstable_segment);
}

TEST_CASE("sweep of the weak drive stays stable everywhere") {
    ModelParams p = base(0.0, 0.1, 0.3);
    auto res = sweep_branches(p, -2.0, 2.0);
    REQUIRE(res.tracks.size() == 4);
    for (const auto& ev : res.events) CHECK(ev.kind != SweepEventKind::RealAxisCrossing);
    for (const auto& tr : res.tracks)
        for (const auto& s : tr.samples)
            CHECK(s.rec.classification != Classification::ComplexFirstSheet);
}

TEST_CASE("decoupled sweep reproduces the closed-form branches") {
    ModelParams p = base(0.0, 0.2, 0.0);
    auto res = sweep_branches(p, -2.0, 2.0);
    REQUIRE(res.tracks.size() == 2);
    for (const auto& tr : res.tracks) {
        for (const auto& s : tr.samples) {
            const double disc = s.param * s.param - 0.04;
            const cplx expect =
                disc >= 0.0 ? cplx(std::sqrt(disc), 0.0) : cplx(0.0, std::sqrt(-disc));
            const double err = std::min(std::abs(s.rec.z - expect), std::abs(s.rec.z + expect));
            CHECK(err < 1e-8);
        }
    }
    // parametric bifurcation EPs at delta0 = +-f0
    std::vector<double> eps;
    for (const auto& ev : res.events)
        if (ev.kind == SweepEventKind::ExceptionalPoint) eps.push_back(ev.param);
    REQUIRE(eps.size() >= 2);
    std::sort(eps.begin(), eps.end());
    CHECK(std::abs(eps.front() + 0.2) < 1e-3);
    CHECK(std::abs(eps.back() - 0.2) < 1e-3);
}
